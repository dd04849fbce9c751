"""Command-line figure renderer.

Usage:
    flocklab-plot <figure-id> --run DIR --out FILE.(png|svg)

Exit codes: 0 success, 2 usage error, 3 missing or unparseable input.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_IDS, FigureSpec, MissingInputError, ParseError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="flocklab-plot",
        description="Render figures from a flocklab run directory.")
    parser.add_argument("figure_id", help=f"one of: {', '.join(FIGURE_IDS)}")
    parser.add_argument("--run", required=True, help="run directory")
    parser.add_argument("--out", required=True, help="output image (.png or .svg)")
    args = parser.parse_args(argv)

    if args.figure_id not in FIGURE_IDS:
        print(f"unknown figure id {args.figure_id!r}; "
              f"known: {', '.join(FIGURE_IDS)}", file=sys.stderr)
        return 2
    if Path(args.out).suffix not in (".png", ".svg"):
        print("output must end in .png or .svg", file=sys.stderr)
        return 2
    try:
        written = render(FigureSpec(args.figure_id, Path(args.run), Path(args.out)))
    except (MissingInputError, ParseError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return 3
    print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
