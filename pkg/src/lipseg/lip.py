"""Logarithmic Image Processing (LIP) arithmetic on grey tones.

Grey tones live on the inverted LIP scale ``[0, M)``: 0 is the white end
(full source transmission) and values grow toward dark. Every function
accepts Python floats or numpy arrays and returns the same kind.

>>> lip_add(128.0, 128.0)
192.0
>>> lmc(192.0, 128.0)
2.0
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LipDomainError


@dataclass(frozen=True)
class GreyScale:
    """The grey-scale bound ``M``; 256 for 8-bit data."""

    m_bound: float = 256.0

    def __post_init__(self):
        if not (np.isfinite(self.m_bound) and self.m_bound > 0):
            raise LipDomainError(f"grey-scale bound must be positive, got {self.m_bound!r}")

    @property
    def top(self) -> float:
        """Largest value the complement is defined for (``M - 1``)."""
        return self.m_bound - 1.0


DEFAULT_SCALE = GreyScale()


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_tones(name, x, scale: GreyScale):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all((arr >= 0) & (arr < scale.m_bound)):
        raise LipDomainError(f"{name} must lie in [0, {scale.m_bound:g})")
    return arr


def _below_bound(r, scale: GreyScale):
    # rounding can land exactly on M for inputs a hair below it
    return np.minimum(r, np.nextafter(scale.m_bound, 0.0))


def lip_add(a, b, scale: GreyScale = DEFAULT_SCALE):
    """LIP addition ``a + b - a*b/M``."""
    a = _check_tones("a", a, scale)
    b = _check_tones("b", b, scale)
    return _unwrap(_below_bound(a + b - a * b / scale.m_bound, scale))


def lip_sub(a, b, scale: GreyScale = DEFAULT_SCALE):
    """LIP subtraction ``(a - b) / (1 - b/M)``.

    The result is an unconstrained real: it is negative whenever ``a < b``.
    """
    a = _check_tones("a", a, scale)
    b = _check_tones("b", b, scale)
    return _unwrap((a - b) / (1.0 - b / scale.m_bound))


def lip_mul(lam, a, scale: GreyScale = DEFAULT_SCALE):
    """LIP scalar multiplication ``M - M(1 - a/M)**lam``.

    Evaluated as ``-M expm1(lam log1p(-a/M))`` which keeps full relative
    precision for small tones and small multipliers.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if not np.all(np.isfinite(lam) & (lam >= 0)):
        raise LipDomainError("LIP multiplier must be a non-negative real")
    a = _check_tones("a", a, scale)
    m = scale.m_bound
    r = -m * np.expm1(lam * np.log1p(-a / m))
    return _unwrap(_below_bound(r, scale))


def complement(a, scale: GreyScale = DEFAULT_SCALE):
    """Complement ``M - 1 - a``; swaps classical and LIP orientation."""
    arr = np.asarray(a, dtype=np.float64)
    if not np.all((arr >= 0) & (arr <= scale.top)):
        raise LipDomainError(f"complement needs values in [0, {scale.top:g}]")
    return _unwrap(scale.top - arr)


def _guarded_extrema(lo, hi):
    # a zero minimum becomes one grey level; the maximum follows so the
    # ratio never drops below one for regions lying entirely under 1
    lo = np.where(lo == 0, 1.0, lo)
    hi = np.maximum(hi, lo)
    return lo, hi


def lmc_from_extrema(lo, hi, scale: GreyScale = DEFAULT_SCALE):
    """LMC of a pair already ordered as ``lo <= hi`` (no range checks)."""
    lo, hi = _guarded_extrema(np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64))
    m = scale.m_bound
    # subnormal non-zero minima legitimately overflow to inf
    with np.errstate(over="ignore"):
        return _unwrap(np.log1p(-hi / m) / np.log1p(-lo / m))


def lmc(g1, g2, scale: GreyScale = DEFAULT_SCALE):
    """Logarithmic Multiplicative Contrast of two grey tones.

    The number of times the brighter tone must be LIP-multiplied onto
    itself to reach the darker one, so that
    ``lip_mul(lmc(g1, g2), min(g1, g2)) == max(g1, g2)``. A zero minimum is
    replaced by 1 before taking logarithms.
    """
    g1 = _check_tones("g1", g1, scale)
    g2 = _check_tones("g2", g2, scale)
    return lmc_from_extrema(np.minimum(g1, g2), np.maximum(g1, g2), scale)
