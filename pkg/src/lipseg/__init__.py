"""Lighting-invariant region homogeneity and segmentation in the LIP model."""

from .criteria import Criterion, h_additive, h_classical_dynamic, h_multiplicative, h_variance
from .ctree import MaxTree, build_max_tree, d_alpha, reconstruct, segment_ct
from .lip import DEFAULT_SCALE, GreyScale, complement, lip_add, lip_mul, lip_sub, lmc
from .raster import (
    GreyImage,
    RegionMask,
    StructuringElement,
    dilate,
    dynamic_range,
    lip_transform_image,
    luminance,
    quantize,
    read_image,
    read_pgm,
    write_pgm,
)
from .region_grow import GrowConfig, contract, extend, grow, reduce

__version__ = "0.1.0"
