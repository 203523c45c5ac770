"""Grey images, region masks and the raster plumbing around them.

Pixels are kept as float64 in memory; quantization to 8-bit integers is an
explicit step used when writing files.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np
from scipy import ndimage

from . import lip
from .errors import (
    DimensionMismatchError,
    EmptyRegionError,
    ImageFormatError,
    LipDomainError,
    RangeViolationError,
)
from .lip import DEFAULT_SCALE, GreyScale

# ITU-R BT.601 luma weights
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GreyImage:
    """A 2-D raster of grey tones in ``[0, scale.m_bound)``, indexed ``[row, col]``."""

    pixels: np.ndarray
    scale: GreyScale = DEFAULT_SCALE

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"grey image must be 2-D, got shape {arr.shape}")
        bad = ~((arr >= 0) & (arr < self.scale.m_bound))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise RangeViolationError(
                f"pixel (row={r}, col={c}) = {arr[r, c]!r} outside [0, {self.scale.m_bound:g})",
                row=int(r), col=int(c), value=float(arr[r, c]),
            )
        object.__setattr__(self, "pixels", _frozen(arr))

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def is_integral(self) -> bool:
        return bool(np.all(self.pixels == np.round(self.pixels)))

    def complement(self) -> "GreyImage":
        return GreyImage(lip.complement(self.pixels, self.scale), self.scale)

    def __eq__(self, other):
        if not isinstance(other, GreyImage):
            return NotImplemented
        return self.scale == other.scale and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean selection of pixels of a ``height x width`` support."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"region mask must be 2-D, got shape {arr.shape}")
        object.__setattr__(self, "bits", _frozen(arr.astype(bool)))

    @classmethod
    def empty(cls, shape) -> "RegionMask":
        return cls(np.zeros(shape, dtype=bool))

    @classmethod
    def full(cls, shape) -> "RegionMask":
        return cls(np.ones(shape, dtype=bool))

    @classmethod
    def from_points(cls, shape, points: Iterable[tuple[int, int]]) -> "RegionMask":
        """Build a mask from ``(x, y)`` points, i.e. ``(col, row)``."""
        bits = np.zeros(shape, dtype=bool)
        for x, y in points:
            if not (0 <= y < shape[0] and 0 <= x < shape[1]):
                raise DimensionMismatchError(f"point ({x}, {y}) outside a {shape[1]}x{shape[0]} support")
            bits[y, x] = True
        return cls(bits)

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    @property
    def count(self) -> int:
        return int(self.bits.sum())

    def is_empty(self) -> bool:
        return not self.bits.any()

    def issubset(self, other: "RegionMask") -> bool:
        return not np.any(self.bits & ~other.bits)

    def __or__(self, other):
        return RegionMask(self.bits | other.bits)

    def __and__(self, other):
        return RegionMask(self.bits & other.bits)

    def __sub__(self, other):
        return RegionMask(self.bits & ~other.bits)

    def __eq__(self, other):
        if not isinstance(other, RegionMask):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None


@dataclass(frozen=True)
class StructuringElement:
    """Set of ``(dx, dy)`` displacements; ``dx`` along columns, ``dy`` along rows."""

    offsets: frozenset = field(default_factory=lambda: frozenset({(0, 0)}))

    @classmethod
    def square(cls, side: int = 3) -> "StructuringElement":
        if side < 1 or side % 2 == 0:
            raise ValueError("square side must be a positive odd integer")
        h = side // 2
        return cls(frozenset((dx, dy) for dx in range(-h, h + 1) for dy in range(-h, h + 1)))

    @classmethod
    def cross(cls) -> "StructuringElement":
        return cls(frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}))

    def is_symmetric(self) -> bool:
        return all((-dx, -dy) in self.offsets for dx, dy in self.offsets)


SQUARE_3X3 = StructuringElement.square(3)


class DynamicRange(NamedTuple):
    lo: float
    hi: float


def _check_same_shape(a, b):
    if tuple(a.shape) != tuple(b.shape):
        raise DimensionMismatchError(f"shape {tuple(a.shape)} does not match {tuple(b.shape)}")


def region_values(img: GreyImage, region: RegionMask) -> np.ndarray:
    _check_same_shape(img, region)
    values = img.pixels[region.bits]
    if values.size == 0:
        raise EmptyRegionError("region is empty")
    return values


def luminance(rgb, scale: GreyScale = DEFAULT_SCALE) -> GreyImage:
    """BT.601 luma of an 8-bit RGB(A) raster, kept real-valued.

    A 2-D input is taken as already grey.
    """
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim == 2:
        return GreyImage(arr, scale)
    if arr.ndim != 3 or arr.shape[2] not in (3, 4):
        raise ValueError(f"unsupported channel layout {arr.shape}")
    r, g, b = (arr[..., i] for i in range(3))
    wr, wg, wb = LUMA_WEIGHTS
    return GreyImage(wr * r + wg * g + wb * b, scale)


LIP_OPS = ("add", "sub", "mul")


def lip_transform_image(img: GreyImage, op: str, value: float, in_complement: bool = False) -> GreyImage:
    """Apply a LIP law pixel-wise, optionally conjugated by the complement.

    ``op`` is ``"add"`` (``f + C``), ``"sub"`` (``f - C``) or ``"mul"``
    (``lam * f``), all in the LIP sense. With ``in_complement`` the law acts
    on ``f^c`` and the result is complemented back, e.g. the darkened image
    ``(f^c (+) 120)^c``.
    """
    scale = img.scale
    src = lip.complement(img.pixels, scale) if in_complement else img.pixels
    if op == "add":
        out = lip.lip_add(src, value, scale)
    elif op == "sub":
        lip._check_tones("C", value, scale)
        out = lip.lip_sub(src, value, scale)
    elif op == "mul":
        out = lip.lip_mul(value, src, scale)
    else:
        raise ValueError(f"unknown LIP operation {op!r}; expected one of {LIP_OPS}")
    out = np.asarray(out, dtype=np.float64)
    upper = scale.top if in_complement else scale.m_bound
    bad = ~((out >= 0) & ((out <= upper) if in_complement else (out < upper)))
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise RangeViolationError(
            f"LIP {op} {value:g} sends pixel (row={r}, col={c}) to {out[r, c]:.6g}, outside the grey scale",
            row=int(r), col=int(c), value=float(out[r, c]),
        )
    if in_complement:
        out = scale.top - out
    return GreyImage(out, scale)


def quantize(img: GreyImage) -> GreyImage:
    """Round to the nearest integer grey level, clamped to ``[0, M-1]``."""
    top = np.floor(img.scale.top)
    return GreyImage(np.clip(np.rint(img.pixels), 0.0, top), img.scale)


def dilate(mask: RegionMask, se: StructuringElement = SQUARE_3X3) -> RegionMask:
    """Minkowski dilation, clipped to the support (no padding pixels)."""
    src = mask.bits
    h, w = src.shape
    out = np.zeros_like(src)
    for dx, dy in se.offsets:
        # out[y+dy, x+dx] |= src[y, x] over the overlap
        ys, yd = (slice(0, h - dy), slice(dy, h)) if dy >= 0 else (slice(-dy, h), slice(0, h + dy))
        xs, xd = (slice(0, w - dx), slice(dx, w)) if dx >= 0 else (slice(-dx, w), slice(0, w + dx))
        if abs(dy) >= h or abs(dx) >= w:
            continue
        out[yd, xd] |= src[ys, xs]
    return RegionMask(out)


def dynamic_range(img: GreyImage, region: RegionMask) -> DynamicRange:
    values = region_values(img, region)
    return DynamicRange(float(values.min()), float(values.max()))


def histogram(img: GreyImage, region: RegionMask) -> dict[int, int]:
    """Counts per unit-width class ``[k, k+1)`` over the region."""
    classes, counts = np.unique(np.floor(region_values(img, region)).astype(np.int64), return_counts=True)
    return dict(zip(classes.tolist(), counts.tolist()))


def connectivity_structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return ndimage.generate_binary_structure(2, 1)
    if connectivity == 8:
        return ndimage.generate_binary_structure(2, 2)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def components_touching(mask: RegionMask, anchor: RegionMask, connectivity: int = 4) -> RegionMask:
    """Union of the connected components of ``mask`` that meet ``anchor``."""
    _check_same_shape(mask, anchor)
    labels, _ = ndimage.label(mask.bits, structure=connectivity_structure(connectivity))
    keep = np.unique(labels[anchor.bits & mask.bits])
    keep = keep[keep > 0]
    return RegionMask(np.isin(labels, keep))


# --- PGM codec -------------------------------------------------------------

_WHITESPACE = b" \t\r\n\v\f"


def _pgm_tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\r\n":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header")
        tokens.append(data[start:pos])
    return tokens, pos


def decode_pgm(data: bytes, scale: GreyScale = DEFAULT_SCALE) -> GreyImage:
    if data[:2] not in (b"P2", b"P5"):
        raise ImageFormatError(f"not a P2/P5 PGM (magic {data[:2]!r})")
    magic = data[:2]
    try:
        (w, h, maxval), pos = _pgm_tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ImageFormatError(f"malformed PGM header: {exc}") from None
    if w <= 0 or h <= 0:
        raise ImageFormatError(f"bad PGM dimensions {w}x{h}")
    if not 0 < maxval <= 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval} (only 1..255)")
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        payload = data[pos:pos + w * h]
        if len(payload) < w * h:
            raise ImageFormatError(f"truncated PGM payload: {len(payload)} of {w * h} bytes")
        arr = np.frombuffer(payload, dtype=np.uint8).reshape(h, w)
    else:
        fields = data[pos:].split()
        if len(fields) < w * h:
            raise ImageFormatError(f"truncated PGM payload: {len(fields)} of {w * h} samples")
        try:
            arr = np.array([int(v) for v in fields[: w * h]], dtype=np.int64).reshape(h, w)
        except ValueError:
            raise ImageFormatError("non-integer sample in P2 raster") from None
    if arr.max() > maxval:
        raise ImageFormatError("sample exceeds maxval")
    return GreyImage(arr.astype(np.float64), scale)


def encode_pgm(img: GreyImage) -> bytes:
    """Binary (P5) encoding; the image must be integer-valued in ``[0, 255]``."""
    px = img.pixels
    if not img.is_integral() or px.max(initial=0) > 255:
        raise LipDomainError("PGM output needs integer pixels in [0, 255]; quantize first")
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + px.astype(np.uint8).tobytes()


def read_pgm(path, scale: GreyScale = DEFAULT_SCALE) -> GreyImage:
    with open(path, "rb") as fh:
        return decode_pgm(fh.read(), scale)


def write_pgm(img: GreyImage, path) -> None:
    data = encode_pgm(img)
    with open(path, "wb") as fh:
        fh.write(data)


def read_image(path, scale: GreyScale = DEFAULT_SCALE) -> GreyImage:
    """Read a PGM, or an 8-bit PNG through Pillow (RGB is reduced to luma)."""
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head[:2] in (b"P2", b"P5"):
        return read_pgm(path, scale)
    if head == b"\x89PNG\r\n\x1a\n":
        try:
            from PIL import Image
        except ImportError:  # pragma: no cover
            raise ImageFormatError("reading PNG requires Pillow (pip install 'artifact[png]')") from None
        with Image.open(path) as im:
            if im.mode not in ("L", "RGB", "RGBA"):
                raise ImageFormatError(f"unsupported PNG mode {im.mode}")
            return luminance(np.asarray(im), scale)
    raise ImageFormatError(f"{os.fspath(path)}: unrecognised image format")


def mask_to_image(mask: RegionMask) -> GreyImage:
    return GreyImage(np.where(mask.bits, 255.0, 0.0))


def read_mask(path) -> RegionMask:
    """Any non-zero pixel of the file is inside the region."""
    return RegionMask(read_image(path).pixels > 0)


def write_mask(mask: RegionMask, path) -> None:
    write_pgm(mask_to_image(mask), path)
