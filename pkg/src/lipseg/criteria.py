"""Region homogeneity criteria.

The two LIP criteria depend only on the extrema of the region:

* additive, the LIP dynamic ``sup - inf`` (LIP subtraction). It is unchanged
  when a constant is LIP-added to the image (exposure-time / source
  intensity changes);
* multiplicative, the LMC of ``sup`` over ``inf``. It is unchanged under LIP
  scalar multiplication (object thickness / opacity changes).

Variance and the classical dynamic are kept as baselines. Criteria are
evaluated on the image they are handed; evaluating on the complement is
the caller's business.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from . import lip
from .lip import DEFAULT_SCALE, GreyScale
from .raster import GreyImage, RegionMask, region_values


class Criterion(str, Enum):
    ADDITIVE = "add"
    MULTIPLICATIVE = "mul"
    VARIANCE = "variance"
    DYNAMIC = "dynamic"

    @property
    def extrema_only(self) -> bool:
        """True when the value is a function of (inf, sup) alone."""
        return self is not Criterion.VARIANCE


def from_extrema(kind: Criterion, lo: float, hi: float, scale: GreyScale = DEFAULT_SCALE) -> float:
    """Criterion value of a region whose infimum is ``lo`` and supremum ``hi``."""
    kind = Criterion(kind)
    if kind is Criterion.ADDITIVE:
        return (hi - lo) / (1.0 - lo / scale.m_bound)
    if kind is Criterion.MULTIPLICATIVE:
        return lip.lmc_from_extrema(lo, hi, scale)
    if kind is Criterion.DYNAMIC:
        return hi - lo
    raise ValueError("variance is not a function of the extrema")


def from_values(kind: Criterion, values: np.ndarray, scale: GreyScale = DEFAULT_SCALE) -> float:
    kind = Criterion(kind)
    if kind is Criterion.VARIANCE:
        return float(np.var(values))
    return float(from_extrema(kind, float(values.min()), float(values.max()), scale))


def h_additive(img: GreyImage, region: RegionMask) -> float:
    """LIP-additive homogeneity: ``sup_R f`` LIP-minus ``inf_R f``, in ``[0, M)``."""
    return from_values(Criterion.ADDITIVE, region_values(img, region), img.scale)


def h_multiplicative(img: GreyImage, region: RegionMask) -> float:
    """LIP-multiplicative homogeneity, ``LMC(sup_R f, inf_R f) >= 1``.

    A zero infimum is replaced by one grey level to keep the value finite.
    """
    return from_values(Criterion.MULTIPLICATIVE, region_values(img, region), img.scale)


def h_variance(img: GreyImage, region: RegionMask) -> float:
    """Population variance of the region."""
    return from_values(Criterion.VARIANCE, region_values(img, region), img.scale)


def h_classical_dynamic(img: GreyImage, region: RegionMask) -> float:
    return from_values(Criterion.DYNAMIC, region_values(img, region), img.scale)


def evaluate(kind: Criterion, img: GreyImage, region: RegionMask) -> float:
    return from_values(kind, region_values(img, region), img.scale)
