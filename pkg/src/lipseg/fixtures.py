"""Deterministic synthetic test images.

``python -m lipseg.fixtures OUTDIR`` writes the bundled invariance fixtures
(image + region mask pairs) as PGM files.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .raster import GreyImage, RegionMask, write_mask, write_pgm

# Every pixel of an invariance fixture stays in this band so that both the
# additive variants (f^c (+/-) 120)^c and the multiplicative ones
# (lam (x) f^c)^c, lam in {4, 0.1}, remain on the grey scale.
INVARIANCE_BAND = (63, 135)


class PlateauFixture(NamedTuple):
    image: GreyImage
    plateau: RegionMask
    seed: tuple[int, int]  # (x, y)


def plateau_fixture(rng: np.random.Generator, min_contrast: int = 40) -> PlateauFixture:
    """Constant plateau (union of overlapping rectangles) on a patchwork background.

    All levels lie in [63, 250] and every background level differs from the
    plateau level by at least ``min_contrast``.
    """
    h, w = (int(v) for v in rng.integers(16, 33, size=2))
    p_level = int(rng.integers(63, 251))
    choices = [v for v in range(63, 251) if abs(v - p_level) >= min_contrast]
    img = np.empty((h, w))
    # background: vertical bands of constant level
    cuts = sorted(set(rng.integers(1, w, size=2).tolist()))
    edges = [0, *cuts, w]
    for a, b in zip(edges[:-1], edges[1:]):
        img[:, a:b] = choices[int(rng.integers(len(choices)))]

    plateau = np.zeros((h, w), dtype=bool)
    y0, x0 = int(rng.integers(2, h - 8)), int(rng.integers(2, w - 8))
    ph, pw = int(rng.integers(3, 7)), int(rng.integers(3, 7))
    plateau[y0:y0 + ph, x0:x0 + pw] = True
    for _ in range(int(rng.integers(0, 3))):
        # overlapping extra rectangle keeps the plateau 4-connected
        yy = int(rng.integers(y0, y0 + ph))
        xx = int(rng.integers(x0, x0 + pw))
        eh, ew = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        plateau[max(yy - eh // 2, 1):min(yy + eh, h - 1), max(xx - ew // 2, 1):min(xx + ew, w - 1)] = True
    img[plateau] = p_level
    ys, xs = np.nonzero(plateau)
    k = int(rng.integers(len(ys)))
    return PlateauFixture(GreyImage(img), RegionMask(plateau), (int(xs[k]), int(ys[k])))


def plateau_fixtures(count: int = 20, seed: int = 2024) -> list[PlateauFixture]:
    rng = np.random.default_rng(seed)
    return [plateau_fixture(rng) for _ in range(count)]


def invariance_fixtures() -> dict[str, tuple[GreyImage, RegionMask]]:
    """Integer-valued images in ``INVARIANCE_BAND`` with a region each."""
    lo, hi = INVARIANCE_BAND
    rng = np.random.default_rng(7)
    out = {}

    yy, xx = np.mgrid[0:64, 0:64]
    r = np.hypot(yy - 30.0, xx - 34.0)
    blob = hi - (hi - lo) * np.exp(-(r / 14.0) ** 2)
    out["blob"] = (blob, r < 10)

    ramp = lo + (hi - lo) * (xx / 63.0) * (0.6 + 0.4 * np.sin(yy / 9.0) ** 2)
    region = np.zeros((64, 64), dtype=bool)
    region[20:44, 8:40] = True
    out["ramp"] = (ramp, region)

    noise = rng.normal(100.0, 12.0, size=(48, 80))
    region = np.zeros((48, 80), dtype=bool)
    region[10:30, 30:70] = True
    region[25:40, 15:35] = True
    out["texture"] = (noise, region)

    return {
        name: (GreyImage(np.clip(np.rint(px), lo, hi)), RegionMask(mask))
        for name, (px, mask) in out.items()
    }


def write_fixtures(outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, (img, region) in invariance_fixtures().items():
        write_pgm(img, outdir / f"{name}.pgm")
        write_mask(region, outdir / f"{name}_region.pgm")
        written += [outdir / f"{name}.pgm", outdir / f"{name}_region.pgm"]
    return written


if __name__ == "__main__":
    for path in write_fixtures(sys.argv[1] if len(sys.argv) > 1 else "fixtures"):
        print(path)
