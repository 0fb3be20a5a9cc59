"""plots <kind> <input.csv> [rho.txt] -o <out>

Renders fidelity-curves, mermin-curves, or cityscape figures from simulator
exports.  Vector output (SVG) by default; pass --format png (or use a .png
suffix) for raster.
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, PlotJob, render
from .io import SchemaError


def build_parser():
    parser = argparse.ArgumentParser(prog="plots", description=__doc__)
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("inputs", nargs="+",
                        help="scan CSV (curves) or density-matrix text (cityscape)")
    parser.add_argument("--output", "-o", required=True)
    parser.add_argument("--format", choices=["svg", "png"], default="",
                        help="override the format inferred from the suffix")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(sys.argv[1:] if argv is None else argv)
    job = PlotJob(kind=args.kind, inputs=tuple(args.inputs),
                  output=args.output, image_format=args.format)
    try:
        render(job)
    except SchemaError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
