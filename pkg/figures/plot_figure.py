#!/usr/bin/env python3
"""Render one simulator output file into a figure.

Usage:
    python plot_figure.py --kind log_distribution --in out/distribution.csv \
        --out figs/total_count.png [--overlay other.csv] [--title ...]

Kinds: log_distribution | heatmap2d | zscore_bars | witness_curve.
"""

import argparse
import sys

sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parent))

from figscripts import FigureSpec, render  # noqa: E402
from figscripts.render import KINDS, SchemaError  # noqa: E402


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="input_path", required=True)
    parser.add_argument("--out", dest="output_path", required=True)
    parser.add_argument("--overlay", default=None)
    parser.add_argument("--title", default=None)
    parser.add_argument("--xlabel", default=None)
    parser.add_argument("--ylabel", default=None)
    args = parser.parse_args(argv)
    spec = FigureSpec(kind=args.kind, input_path=args.input_path,
                      output_path=args.output_path, overlay_path=args.overlay,
                      title=args.title, x_label=args.xlabel,
                      y_label=args.ylabel)
    try:
        out = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
