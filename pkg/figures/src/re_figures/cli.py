"""Command-line entry point: render a figure from a CSV table.

Usage:
    figures render --fig {1,2,3} --in table.csv --out figure.png
"""

from __future__ import annotations

import argparse
import sys

from .render import RENDERERS
from .validate import SchemaError, load_table


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="figures",
        description="Render publication figures from CSV tables "
        "produced by the record-election CLI.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="validate a CSV and render one figure")
    r.add_argument("--fig", type=int, choices=sorted(RENDERERS), required=True,
                   help="figure id")
    r.add_argument("--in", dest="infile", required=True, metavar="CSV",
                   help="input CSV table")
    r.add_argument("--out", required=True, metavar="PNG",
                   help="output image path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        table = load_table(args.infile, args.fig)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    RENDERERS[args.fig](table, args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
