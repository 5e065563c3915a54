"""Command line front end.

    halfamoeba degrees -i line.sys
    halfamoeba fiber --space amoeba --point 0,0 -i line.sys
    halfamoeba render --space amoeba --box -4:4 --resolution 200 -i line.sys --out a.pgm

Computation results go to stdout as JSON.  Exit codes: 0 success, 1
computation error, 2 usage or input error.  Negative values for
``--point`` and ``--box`` need the ``--flag=value`` spelling.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .fibers import (
    NonGenericQueryError,
    SingularPointError,
    SolverConfig,
    amoeba_fiber,
    coamoeba_fiber,
    curve_fiber_exact,
    fiber_counts,
)
from .laurent import (
    LaurentError,
    PolySystem,
    format_system,
    newton_polytope,
    parse_system,
    system_to_json,
)
from .measure import MeasureError, amoeba_volume_box, multiharnack_check, multivol_amoeba_box, multivol_coamoeba
from .polytope import PolytopeError, alpha_beta
from .verify import VerifyConfig, verify_system

MAX_RESOLUTION = 4096
PIXEL_CAP = 255
RENDER_CHUNK = 4096


class UsageError(Exception):
    """Bad flags or unreadable input; exit code 2."""


class Unsupported(ValueError):
    """The operation is not available for this system."""


# ---------------------------------------------------------------------------
# rasters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RasterImage:
    """Fiber counts at pixel centers, row-major, row 0 at the top (largest second coordinate)."""

    width: int
    height: int
    box: tuple
    values: tuple
    space: str = "amoeba"

    def __post_init__(self):
        if self.width * self.height != len(self.values):
            raise ValueError("width * height does not match the number of values")

    def to_pgm(self) -> str:
        maxval = max(max(self.values, default=0), 1)
        lines = ["P2", f"# {self.space} fiber counts, box {list(map(list, self.box))}",
                 f"{self.width} {self.height}", str(maxval)]
        for r in range(self.height):
            row = self.values[r * self.width:(r + 1) * self.width]
            lines.append(" ".join(str(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "space": self.space,
            "width": self.width,
            "height": self.height,
            "box": [list(b) for b in self.box],
            "values": list(self.values),
        }


def render_raster(
    system: PolySystem,
    space: str,
    box=None,
    resolution=(200, 200),
    cfg: SolverConfig = SolverConfig(),
    threads: int = 1,
) -> RasterImage:
    """Exact fiber counts of a curve on a pixel grid.

    ``box`` is ``((lo1, hi1), (lo2, hi2))``; the default is ``[-4, 4]^2`` for
    the amoeba and ``[0, pi]^2`` for the rolled coamoeba.  A box with zero
    area gives an empty raster.
    """
    if system.n != 1:
        raise Unsupported("rasters are only available for curves (n = 1)")
    if space not in ("amoeba", "coamoeba"):
        raise ValueError(f"unknown space {space!r}")
    width, height = (int(resolution), int(resolution)) if np.isscalar(resolution) else map(int, resolution)
    if not (1 <= width <= MAX_RESOLUTION and 1 <= height <= MAX_RESOLUTION):
        raise ValueError(f"resolution must be between 1 and {MAX_RESOLUTION} per axis")
    if box is None:
        box = ((-4.0, 4.0), (-4.0, 4.0)) if space == "amoeba" else ((0.0, math.pi), (0.0, math.pi))
    b = np.asarray(box, dtype=float).reshape(2, 2)
    box_t = tuple(tuple(float(x) for x in r) for r in b)
    if np.any(b[:, 1] <= b[:, 0]):
        return RasterImage(0, 0, box_t, (), space)
    xs = b[0, 0] + (np.arange(width) + 0.5) * (b[0, 1] - b[0, 0]) / width
    ys = b[1, 1] - (np.arange(height) + 0.5) * (b[1, 1] - b[1, 0]) / height
    gx, gy = np.meshgrid(xs, ys)
    queries = np.stack([gx.ravel(), gy.ravel()], axis=1)

    def job(a):
        counts, _ = fiber_counts(system, space, queries[a:a + RENDER_CHUNK], cfg=cfg, method="exact")
        return counts

    starts = range(0, len(queries), RENDER_CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, starts))
    else:
        parts = [job(a) for a in starts]
    values = np.minimum(np.concatenate(parts), PIXEL_CAP)
    return RasterImage(width, height, box_t, tuple(int(v) for v in values), space)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from None


def parse_box(text: str, dim: int) -> list[tuple[float, float]]:
    """``lo:hi[,lo:hi...]``; a single interval is used for every axis."""
    out = []
    for part in text.split(","):
        lo, sep, hi = part.partition(":")
        if not sep:
            raise UsageError(f"box interval {part!r} is not lo:hi")
        try:
            out.append((float(lo), float(hi)))
        except ValueError:
            raise UsageError(f"box interval {part!r} is not numeric") from None
    if len(out) == 1:
        out = out * dim
    if len(out) != dim:
        raise UsageError(f"box has {len(out)} intervals, expected {dim}")
    return out


def parse_resolution(text: str) -> tuple[int, int]:
    w, sep, h = text.lower().partition("x")
    try:
        w_i = int(w)
        h_i = int(h) if sep else w_i
    except ValueError:
        raise UsageError(f"resolution {text!r} is not W or WxH") from None
    return w_i, h_i


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-i", "--input", metavar="FILE", help="system file ('-' for stdin)")
    common.add_argument("--json", action="store_true", help="JSON output where text is the default")
    common.add_argument("--seed", type=_seed, default=0, metavar="U64")
    common.add_argument("--samples", type=int, default=None, metavar="N")
    common.add_argument("--box", default=None, metavar="LO:HI[,LO:HI...]")
    common.add_argument("--resolution", default=None, metavar="W[xH]")
    common.add_argument("--threads", type=int, default=1, metavar="N")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--tol", type=float, default=None, metavar="X", help="solver residual tolerance")

    parser = argparse.ArgumentParser(prog="halfamoeba", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    sub.add_parser("parse-check", parents=[common], help="parse a system and print its canonical form")
    sub.add_parser("newton", parents=[common], help="Newton polytopes of the equations")
    sub.add_parser("degrees", parents=[common], help="conj-degree alpha and conj'-degree beta")
    p = sub.add_parser("fiber", parents=[common], help="one amoeba or coamoeba fiber")
    p.add_argument("--space", choices=("amoeba", "coamoeba"), required=True)
    p.add_argument("--point", required=True, metavar="V1,V2,...")
    p.add_argument("--exact", action="store_true", help="resultant oracle (curves only)")
    p = sub.add_parser("multivol", parents=[common], help="multiplicity volume estimate")
    p.add_argument("--space", choices=("amoeba", "coamoeba"), default="coamoeba")
    p.add_argument("--harnack", action="store_true", help="also run the multiHarnack test")
    p.add_argument("--harnack-tol", type=float, default=0.05)
    sub.add_parser("volume", parents=[common], help="amoeba volume inside a box (grid with --resolution)")
    p = sub.add_parser("verify", parents=[common], help="run the full check battery")
    p.add_argument("--fiber-samples", type=int, default=None)
    p = sub.add_parser("render", parents=[common], help="PGM raster of fiber counts (curves only)")
    p.add_argument("--space", choices=("amoeba", "coamoeba"), default="amoeba")
    p.add_argument("--sidecar", default=None, metavar="PATH", help="also write the raw grid as JSON")
    return parser


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _load(args) -> PolySystem:
    if not args.input:
        raise UsageError("missing input system (-i FILE)")
    try:
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc.strerror}") from None
    return parse_system(text)


def _solver(args) -> SolverConfig:
    cfg = SolverConfig(seed=args.seed)
    if args.tol is not None:
        cfg = replace(cfg, tol=args.tol)
    return cfg


def _box_arg(args, system):
    return None if args.box is None else parse_box(args.box, system.nvars)


def _emit(args, payload, text: str | None = None):
    out = json.dumps(payload, indent=2) if (text is None or args.json) else text.rstrip("\n")
    if args.out and args.command != "render":
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    else:
        print(out)


def cmd_parse_check(args):
    s = _load(args)
    _emit(args, system_to_json(s), format_system(s))


def cmd_newton(args):
    s = _load(args)
    _emit(args, {"polytopes": [newton_polytope(f).to_json() for f in s.polys]})


def cmd_degrees(args):
    s = _load(args)
    _emit(args, alpha_beta(s).to_json())


def cmd_fiber(args):
    s = _load(args)
    point = _floats(args.point)
    cfg = _solver(args)
    if args.exact:
        rep = curve_fiber_exact(s, args.space, point, cfg)
    elif args.space == "amoeba":
        rep = amoeba_fiber(s, point, cfg)
    else:
        rep = coamoeba_fiber(s, point, cfg)
    _emit(args, rep.to_json())


def cmd_multivol(args):
    s = _load(args)
    cfg = _solver(args)
    samples = args.samples or 10_000
    if args.harnack:
        if args.space != "coamoeba":
            raise UsageError("--harnack uses the coamoeba estimate")
        rep = multiharnack_check(s, args.harnack_tol, samples, args.seed, cfg, args.threads)
        _emit(args, rep.to_json())
        return
    if args.space == "coamoeba":
        est = multivol_coamoeba(s, samples, args.seed, cfg, args.threads)
    else:
        est = multivol_amoeba_box(s, _box_arg(args, s), samples, args.seed, cfg, args.threads)
    _emit(args, est.to_json())


def cmd_volume(args):
    s = _load(args)
    cfg = _solver(args)
    grid = None
    if args.resolution is not None:
        w, h = parse_resolution(args.resolution)
        grid = (w, h) if s.nvars == 2 else w
    est = amoeba_volume_box(s, _box_arg(args, s), args.samples or 10_000, args.seed, cfg, args.threads, grid=grid)
    _emit(args, est.to_json())


def cmd_verify(args):
    s = _load(args)
    vcfg = VerifyConfig(seed=args.seed, threads=args.threads, solver=_solver(args))
    if args.samples is not None:
        vcfg = replace(vcfg, volume_samples=args.samples)
    if args.fiber_samples is not None:
        vcfg = replace(vcfg, fiber_samples=args.fiber_samples)
    if args.box is not None:
        vcfg = replace(vcfg, box=tuple(parse_box(args.box, s.nvars)))
    rep = verify_system(s, vcfg)
    _emit(args, rep.to_json())
    return 0 if rep.passed else 1


def cmd_render(args):
    s = _load(args)
    res = parse_resolution(args.resolution) if args.resolution else (200, 200)
    box = _box_arg(args, s)
    img = render_raster(s, args.space, box, res, _solver(args), args.threads)
    pgm = img.to_pgm()
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(pgm)
    else:
        sys.stdout.write(pgm)
    if args.sidecar:
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            json.dump(img.to_json(), fh)
    if args.out:
        nonzero = sum(v > 0 for v in img.values)
        print(json.dumps({"out": args.out, "width": img.width, "height": img.height, "nonzeroPixels": nonzero}))


COMMANDS = {
    "parse-check": cmd_parse_check,
    "newton": cmd_newton,
    "degrees": cmd_degrees,
    "fiber": cmd_fiber,
    "multivol": cmd_multivol,
    "volume": cmd_volume,
    "verify": cmd_verify,
    "render": cmd_render,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        code = COMMANDS[args.command](args)
        return int(code or 0)
    except (UsageError, LaurentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, UsageError):
            parser.print_usage(sys.stderr)
        return 2
    except (PolytopeError, MeasureError, NonGenericQueryError, SingularPointError, Unsupported,
            ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
