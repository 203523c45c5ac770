"""Homogeneity-driven seeded region growing.

Each outer iteration dilates the current region ``R_n`` by the structuring
element and measures the criterion on the dilated region ``D``:

1. ``H(D) <= t``: accept ``D``.
2. otherwise reduce ``D`` to the pixels inside the dynamic range of ``R_n``,
   giving ``D'``, then

   a. ``H(D') <= t``: extend ``D'`` with neighbours within LIP-distance 1
      of its extrema that keep it homogeneous;
   b. otherwise contract ``D'`` by peeling extremal histogram classes.

Growth stops once an iteration adds nothing. Criteria are evaluated on the
complement of the input when ``work_in_complement`` is set (the default),
so that bright objects of an ordinary photograph are low LIP grey tones.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import criteria
from .criteria import Criterion
from .errors import DegenerateContractionError, EmptySeedError, LipsegError, SeedNotHomogeneousError
from .raster import (
    SQUARE_3X3,
    GreyImage,
    RegionMask,
    StructuringElement,
    components_touching,
    dilate,
    dynamic_range,
    _check_same_shape,
)

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = {Criterion.ADDITIVE: 200.0, Criterion.MULTIPLICATIVE: 2.7}


@dataclass(frozen=True)
class GrowConfig:
    criterion: Criterion = Criterion.ADDITIVE
    threshold: float | None = None
    se: StructuringElement = SQUARE_3X3
    connectivity: int = 4
    max_iterations: int | None = None
    work_in_complement: bool = True
    # largest LIP-difference to the region extrema admitted by extension
    extension_tolerance: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        if self.threshold is None:
            if self.criterion not in DEFAULT_THRESHOLDS:
                raise ValueError(f"no default threshold for criterion {self.criterion.value!r}")
            object.__setattr__(self, "threshold", DEFAULT_THRESHOLDS[self.criterion])
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    def iteration_cap(self, shape) -> int:
        return self.max_iterations or 10 * max(shape)


class TraceEntry(NamedTuple):
    step: str  # seed | grow | extend | contract
    size: int
    value: float


@dataclass
class GrowTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def record(self, step, region: RegionMask, value):
        self.entries.append(TraceEntry(step, region.count, float(value)))

    @property
    def iterations(self) -> int:
        return sum(1 for e in self.entries if e.step != "seed")

    def sizes(self) -> list[int]:
        return [e.size for e in self.entries]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def working_image(img: GreyImage, cfg: GrowConfig) -> GreyImage:
    return img.complement() if cfg.work_in_complement else img


def reduce(img: GreyImage, grown: RegionMask, prev: RegionMask, connectivity: int = 4) -> RegionMask:
    """Keep the pixels of ``grown`` inside the dynamic range of ``prev``.

    Only the connected components of the kept pixels that meet ``prev`` are
    returned, so the result always contains ``prev``.
    """
    lo, hi = dynamic_range(img, prev)
    px = img.pixels
    kept = RegionMask(grown.bits & (px >= lo) & (px <= hi))
    return components_touching(kept, prev, connectivity)


class _Running:
    """Incremental region statistics for cheap per-pixel criterion checks."""

    def __init__(self, values: np.ndarray):
        self.lo = float(values.min())
        self.hi = float(values.max())
        self.n = values.size
        self.s = float(values.sum())
        self.ss = float(np.dot(values, values))

    def value_with(self, kind: Criterion, v: float, scale) -> float:
        lo, hi = min(self.lo, v), max(self.hi, v)
        if kind is Criterion.VARIANCE:
            n = self.n + 1
            mean = (self.s + v) / n
            return max((self.ss + v * v) / n - mean * mean, 0.0)
        return float(criteria.from_extrema(kind, lo, hi, scale))

    def add(self, v: float):
        self.lo, self.hi = min(self.lo, v), max(self.hi, v)
        self.n += 1
        self.s += v
        self.ss += v * v


def _lip_gap(v: float, ref: float, m: float) -> float:
    return abs((v - ref) / (1.0 - ref / m))


def extend(img: GreyImage, region: RegionMask, cfg: GrowConfig) -> RegionMask:
    """Add neighbours close to the region's extrema while it stays homogeneous.

    A neighbour ``x`` (per ``cfg.connectivity``) is admitted when
    ``min(|f(x) - max_R f|, |f(x) - min_R f|) <= 1`` in the LIP sense and
    the region with ``x`` still satisfies ``H <= t``. Candidates are visited
    in raster order, the extrema are updated after every admission, and
    passes repeat until nothing changes.
    """
    px = img.pixels
    m = img.scale.m_bound
    bits = region.bits.copy()
    stats = _Running(px[bits])
    kind, t, tol = cfg.criterion, cfg.threshold, cfg.extension_tolerance
    changed = True
    while changed:
        changed = False
        frontier = dilate(RegionMask(bits), _se_for(cfg.connectivity)).bits & ~bits
        for r, c in zip(*np.nonzero(frontier)):
            v = float(px[r, c])
            if min(_lip_gap(v, stats.hi, m), _lip_gap(v, stats.lo, m)) > tol:
                continue
            if stats.value_with(kind, v, img.scale) > t:
                continue
            bits[r, c] = True
            stats.add(v)
            changed = True
    return RegionMask(bits)


def _se_for(connectivity: int) -> StructuringElement:
    return StructuringElement.cross() if connectivity == 4 else SQUARE_3X3


def contract(img: GreyImage, region: RegionMask, seed: RegionMask, cfg: GrowConfig) -> RegionMask:
    """Peel extremal histogram classes until the region is homogeneous.

    Classes are unit-width bins ``[k, k+1)``. Each step removes the lowest
    or the highest class, whichever lowers the criterion more (ties remove
    the highest), then keeps only the components meeting the seed. A class
    holding a seed pixel is never removed; if both extremal classes hold
    seed pixels while the region is still inhomogeneous,
    ``DegenerateContractionError`` is raised. The loop also stops when a
    single class is left, so the result can remain above threshold.
    """
    _check_same_shape(region, seed)
    if not seed.issubset(region):
        raise LipsegError("contraction needs the seed inside the region")
    px = img.pixels
    kind, t = cfg.criterion, cfg.threshold
    current = components_touching(region, seed, cfg.connectivity)
    value = criteria.evaluate(kind, img, current)
    classes = np.floor(px).astype(np.int64)
    seed_classes = set(np.unique(classes[seed.bits]).tolist())

    while value > t:
        present = np.unique(classes[current.bits])
        if present.size == 1:
            break
        lo_cls, hi_cls = int(present[0]), int(present[-1])
        options = []
        for cls in (hi_cls, lo_cls):
            if cls in seed_classes:
                continue
            cand = components_touching(RegionMask(current.bits & (classes != cls)), seed, cfg.connectivity)
            options.append((criteria.evaluate(kind, img, cand), cand))
        if not options:
            raise DegenerateContractionError(
                f"both extremal classes {lo_cls} and {hi_cls} hold seed pixels; criterion {value:.6g} > {t:g}"
            )
        # min() keeps the first of equal values: the high-side class
        value, current = min(options, key=lambda o: o[0])
    return current


def grow(img: GreyImage, seed: RegionMask, cfg: GrowConfig | None = None) -> tuple[RegionMask, GrowTrace]:
    """Grow ``seed`` into a maximal homogeneous region of ``img``.

    Returns the final mask and the per-iteration trace. The seed must be
    non-empty and already satisfy ``H(seed) <= t``.
    """
    cfg = cfg or GrowConfig()
    _check_same_shape(img, seed)
    if seed.is_empty():
        raise EmptySeedError("seed region is empty")
    work = working_image(img, cfg)
    kind, t = cfg.criterion, cfg.threshold

    def h(region):
        return criteria.evaluate(kind, work, region)

    region = seed
    value = h(region)
    if value > t:
        raise SeedNotHomogeneousError(f"seed criterion {value:.6g} exceeds threshold {t:g}")
    trace = GrowTrace()
    trace.record("seed", region, value)

    for _ in range(cfg.iteration_cap(img.shape)):
        dilated = dilate(region, cfg.se)
        if dilated == region:
            break
        d_value = h(dilated)
        if d_value <= t:
            step, candidate, c_value = "grow", dilated, d_value
        else:
            reduced = reduce(work, dilated, region, cfg.connectivity)
            if h(reduced) <= t:
                step, candidate = "extend", extend(work, reduced, cfg)
            else:
                step = "contract"
                try:
                    candidate = contract(work, reduced, seed, cfg)
                except DegenerateContractionError as exc:
                    log.debug("contraction rejected: %s", exc)
                    break
            c_value = h(candidate)
        # an iteration is only accepted if it keeps R_n and stays homogeneous
        if c_value > t or not region.issubset(candidate):
            log.debug("%s step rejected (value %.6g, threshold %g)", step, c_value, t)
            break
        if candidate == region:
            break
        region, value = candidate, c_value
        trace.record(step, region, value)
    return region, trace
