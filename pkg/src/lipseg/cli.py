"""Command line: lighting simulation, criteria, both segmenters, invariance runs.

Exit status: 0 success, 1 I/O or format error, 2 precondition violation,
3 invariance check failure.
"""

from __future__ import annotations

import argparse
import itertools
import logging
import sys
from pathlib import Path

import numpy as np

from . import criteria, ctree
from .criteria import Criterion
from .errors import ImageFormatError, LipsegError
from .lip import GreyScale
from .raster import (
    GreyImage,
    RegionMask,
    StructuringElement,
    dilate,
    lip_transform_image,
    quantize,
    read_image,
    read_mask,
    region_values,
    write_mask,
    write_pgm,
)
from .region_grow import GrowConfig, grow
from .report import SegmentationReport

log = logging.getLogger("lipseg")

EXIT_OK, EXIT_IO, EXIT_PRECONDITION, EXIT_INVARIANCE = 0, 1, 2, 3

DEFAULT_K = 120.0
DEFAULT_LAMBDA_DARK = 4.0
DEFAULT_LAMBDA_BRIGHT = 0.1
QUANTIZED_TOLERANCE = 2.0
QUANTIZED_DARK_LIMIT = 0.9  # fraction of M for the complemented region infimum

_OPS = {"lip-add": "add", "lip-sub": "sub", "lip-mul": "mul"}


class InvarianceFailure(Exception):
    pass


def _seed(text: str) -> tuple[int, int]:
    try:
        x, y = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must look like X,Y, got {text!r}") from None
    return x, y


def _se(text: str) -> StructuringElement:
    if text == "cross":
        return StructuringElement.cross()
    a, sep, b = text.partition("x")
    if not sep or a != b or not a.isdigit():
        raise argparse.ArgumentTypeError(f"structuring element must be NxN (odd N) or 'cross', got {text!r}")
    try:
        return StructuringElement.square(int(a))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _emit(report: SegmentationReport, path) -> None:
    if path:
        Path(path).write_text(report.to_json() + "\n")
    else:
        print(report.to_json())


def _load(path, scale):
    return read_image(path, GreyScale(scale))


# --- transform ---------------------------------------------------------------

STANDARD_VARIANTS = (
    ("dark_add", "add", DEFAULT_K),
    ("bright_add", "sub", DEFAULT_K),
    ("dark_mul", "mul", DEFAULT_LAMBDA_DARK),
    ("bright_mul", "mul", DEFAULT_LAMBDA_BRIGHT),
)


def cmd_transform(args) -> int:
    img = _load(args.input, args.scale)
    if args.op is None:
        # the four simulated lightings, all applied to the complement
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        stem = Path(args.input).stem
        for name, op, value in STANDARD_VARIANTS:
            variant = lip_transform_image(img, op, value, in_complement=True)
            write_pgm(quantize(variant), out / f"{stem}_{name}.pgm")
        return EXIT_OK
    op = _OPS[args.op]
    value = args.value
    if value is None:
        value = DEFAULT_LAMBDA_DARK if op == "mul" else DEFAULT_K
    write_pgm(quantize(lip_transform_image(img, op, value, in_complement=args.complement)), args.output)
    return EXIT_OK


# --- homogeneity ------------------------------------------------------------

def cmd_homogeneity(args) -> int:
    img = _load(args.image, args.scale)
    region = read_mask(args.mask)
    target = img.complement() if args.complement else img
    value = criteria.evaluate(Criterion(args.criterion), target, region)
    report = SegmentationReport(
        command="homogeneity",
        inputs=[str(args.image), str(args.mask)],
        parameters={"criterion": args.criterion, "complement": args.complement, "m_bound": args.scale},
        criterion_value=value,
        region_pixel_count=region.count,
    )
    _emit(report, args.report)
    if args.report:
        print(f"{value:.10g}")
    return EXIT_OK


# --- grow -------------------------------------------------------------------

def cmd_grow(args) -> int:
    img = _load(args.image, args.scale)
    seed = RegionMask.from_points(img.shape, args.seed)
    cfg = GrowConfig(
        criterion=Criterion(args.criterion),
        threshold=args.threshold,
        se=args.se,
        connectivity=args.connectivity,
        max_iterations=args.max_iterations,
        work_in_complement=args.complement,
    )
    region, trace = grow(img, seed, cfg)
    write_mask(region, args.out)
    work = img.complement() if cfg.work_in_complement else img
    report = SegmentationReport(
        command="grow",
        inputs=[str(args.image)],
        parameters={
            "criterion": cfg.criterion.value,
            "threshold": cfg.threshold,
            "seeds": [list(s) for s in args.seed],
            "se": sorted(list(o) for o in cfg.se.offsets),
            "connectivity": cfg.connectivity,
            "complement": cfg.work_in_complement,
            "m_bound": args.scale,
        },
        criterion_value=criteria.evaluate(cfg.criterion, work, region),
        region_pixel_count=region.count,
        iterations=trace.iterations,
        details={"trace": [e._asdict() for e in trace], "mask": str(args.out)},
    )
    _emit(report, args.report)
    return EXIT_OK


# --- segment-ct -------------------------------------------------------------

def cmd_segment_ct(args) -> int:
    img = _load(args.image, args.scale)
    if not img.is_integral():
        img = quantize(img)
    if args.complement:
        img = img.complement()
    seeds = RegionMask.from_points(img.shape, args.seed)
    marker = dilate(seeds, StructuringElement.square(3))
    tree = ctree.build_max_tree(img, args.connectivity)
    result = ctree.segment_ct(tree, marker, args.alpha)
    write_mask(result.mask, args.out)
    fp = int(np.count_nonzero(result.mask.bits & ~marker.bits))
    fn = int(np.count_nonzero(marker.bits & ~result.mask.bits))
    report = SegmentationReport(
        command="segment-ct",
        inputs=[str(args.image)],
        parameters={
            "alpha": args.alpha,
            "seeds": [list(s) for s in args.seed],
            "connectivity": args.connectivity,
            "complement": args.complement,
            "m_bound": args.scale,
        },
        criterion_value=result.cost,
        region_pixel_count=result.mask.count,
        details={
            "d_alpha": result.cost,
            "false_negatives": fn,
            "false_positives": fp,
            "marker_pixel_count": marker.count,
            "tree_nodes": len(tree),
            "selected_nodes": list(result.nodes),
            "mask": str(args.out),
        },
    )
    _emit(report, args.report)
    if args.dump_tree:
        Path(args.dump_tree).write_text(ctree.dump_tree(tree))
    return EXIT_OK


# --- experiment-invariance --------------------------------------------------

def invariance_variants(img: GreyImage, mode: str, k: float, lambdas: tuple[float, float]):
    """The original image and its two simulated lightings, by name."""
    if mode == "additive":
        return {
            "original": img,
            "dark": lip_transform_image(img, "add", k, in_complement=True),
            "bright": lip_transform_image(img, "sub", k, in_complement=True),
        }
    dark, bright = lambdas
    return {
        "original": img,
        "dark": lip_transform_image(img, "mul", dark, in_complement=True),
        "bright": lip_transform_image(img, "mul", bright, in_complement=True),
    }


def _max_pairwise(values) -> float:
    return max((abs(a - b) for a, b in itertools.combinations(values, 2)), default=0.0)


def run_invariance(img: GreyImage, region: RegionMask, mode: str, k=DEFAULT_K,
                   lambdas=(DEFAULT_LAMBDA_DARK, DEFAULT_LAMBDA_BRIGHT)) -> dict:
    """Criterion on f^c for the original and both variants, real and 8-bit paths."""
    kind = Criterion.ADDITIVE if mode == "additive" else Criterion.MULTIPLICATIVE
    variants = invariance_variants(img, mode, k, lambdas)
    real = {name: criteria.evaluate(kind, v.complement(), region) for name, v in variants.items()}
    quant = {name: criteria.evaluate(kind, quantize(v).complement(), region) for name, v in variants.items()}

    real_dev = _max_pairwise(real.values())
    if kind is Criterion.ADDITIVE:
        tolerance = 1e-9 * img.scale.m_bound
        passed = real_dev <= tolerance
    else:
        # relative to the original value
        tolerance = 1e-9
        passed = real_dev <= tolerance * abs(real["original"])
    comp_inf = float(region_values(img.complement(), region).min())
    quant_dev = _max_pairwise(quant.values())
    quant_applicable = comp_inf <= QUANTIZED_DARK_LIMIT * img.scale.m_bound
    return {
        "criterion": kind.value,
        "real": real,
        "real_max_deviation": real_dev,
        "real_tolerance": tolerance,
        "real_tolerance_kind": "absolute" if kind is Criterion.ADDITIVE else "relative",
        "real_passed": passed,
        "quantized": quant,
        "quantized_max_deviation": quant_dev,
        "quantized_tolerance": QUANTIZED_TOLERANCE,
        "complemented_infimum": comp_inf,
        "quantized_applicable": quant_applicable,
        "quantized_passed": quant_dev <= QUANTIZED_TOLERANCE,
    }


def cmd_experiment_invariance(args) -> int:
    img = _load(args.image, args.scale)
    region = read_mask(args.mask)
    lambdas = (args.lambda_dark, args.lambda_bright)
    result = run_invariance(img, region, args.mode, args.k, lambdas)
    report = SegmentationReport(
        command="experiment-invariance",
        inputs=[str(args.image), str(args.mask)],
        parameters={"mode": args.mode, "k": args.k, "lambdas": list(lambdas), "m_bound": args.scale},
        criterion_value=result["real"]["original"],
        region_pixel_count=region.count,
        variant_values=result["real"],
        details=result,
    )
    _emit(report, args.report)
    if not result["real_passed"]:
        raise InvarianceFailure(
            f"criterion varies by {result['real_max_deviation']:.3g} across lightings "
            f"({result['real_tolerance_kind']} tolerance {result['real_tolerance']:.3g})"
        )
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lipseg", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    parser.add_argument("--scale", type=float, default=256.0, help="grey-scale bound M (default 256)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="simulate a lighting change with a LIP law")
    p.add_argument("input")
    p.add_argument("output", help="output PGM, or a directory when --op is omitted")
    p.add_argument("--op", choices=sorted(_OPS), help="omit to write the four standard variants")
    p.add_argument("--value", type=float, help="constant k for add/sub (default 120), lambda for mul (default 4)")
    p.add_argument("--complement", action="store_true", help="apply the law to the complement f^c")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("homogeneity", help="evaluate a homogeneity criterion over a region")
    p.add_argument("image")
    p.add_argument("mask")
    p.add_argument("--criterion", choices=[c.value for c in Criterion], default="add")
    p.add_argument("--complement", action="store_true", help="evaluate on f^c")
    p.add_argument("--report")
    p.set_defaults(func=cmd_homogeneity)

    p = sub.add_parser("grow", help="seeded region growing")
    p.add_argument("image")
    p.add_argument("--seed", type=_seed, action="append", required=True, metavar="X,Y")
    p.add_argument("--criterion", choices=["add", "mul", "variance", "dynamic"], default="add")
    p.add_argument("--threshold", type=float, help="default 200 (add) or 2.7 (mul)")
    p.add_argument("--se", type=_se, default=StructuringElement.square(3), help="NxN square or 'cross'")
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=4)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--complement", action=argparse.BooleanOptionalAction, default=True,
                   help="work on f^c (default on)")
    p.add_argument("--out", required=True, help="output mask PGM (255 inside)")
    p.add_argument("--report")
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("segment-ct", help="component-tree segmentation from markers")
    p.add_argument("image")
    p.add_argument("--seed", type=_seed, action="append", required=True, metavar="X,Y")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--connectivity", type=int, choices=[4, 8], default=4)
    p.add_argument("--complement", action="store_true", help="build the tree of f^c")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--dump-tree", help="write a text listing of the max-tree")
    p.set_defaults(func=cmd_segment_ct)

    p = sub.add_parser("experiment-invariance", help="criterion under simulated lightings")
    p.add_argument("image")
    p.add_argument("mask")
    p.add_argument("--mode", choices=["additive", "multiplicative"], required=True)
    p.add_argument("--k", type=float, default=DEFAULT_K)
    p.add_argument("--lambda-dark", type=float, default=DEFAULT_LAMBDA_DARK)
    p.add_argument("--lambda-bright", type=float, default=DEFAULT_LAMBDA_BRIGHT)
    p.add_argument("--report")
    p.set_defaults(func=cmd_experiment_invariance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ImageFormatError) as exc:
        print(f"lipseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (LipsegError, ValueError) as exc:
        print(f"lipseg: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except InvarianceFailure as exc:
        print(f"lipseg: invariance check failed: {exc}", file=sys.stderr)
        return EXIT_INVARIANCE


if __name__ == "__main__":
    sys.exit(main())
