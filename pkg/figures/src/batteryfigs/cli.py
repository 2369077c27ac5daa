"""batteryfigs --figure fig2 --in <sweep dir> --out <image>."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .io import InputError
from .render import FIGURE_IDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="batteryfigs",
                                     description="Render figure analogues from sweep CSV output")
    parser.add_argument("--figure", required=True, choices=FIGURE_IDS)
    parser.add_argument("--in", dest="input_dir", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--legend-prefix", default="")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec(figure_id=args.figure, input_dir=Path(args.input_dir),
                          output=Path(args.out), legend_prefix=args.legend_prefix)
        result = render(spec)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
