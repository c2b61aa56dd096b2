"""`render <figure-id> <csv-dir> <out.png>` entry point."""

from __future__ import annotations

import argparse
import sys

from .recipes import MissingInputError, RECIPES, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="render",
        description="Render solver CSV outputs into figures")
    ap.add_argument("figure_id", help=", ".join(sorted(RECIPES)))
    ap.add_argument("csv_dir", help="directory holding the CSV inputs")
    ap.add_argument("out_file", help="output image path")
    args = ap.parse_args(argv)
    try:
        path = render(args.figure_id, args.csv_dir, args.out_file)
    except MissingInputError as exc:
        print(f"render error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
