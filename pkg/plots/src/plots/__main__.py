"""Command line: python -m plots convergence|scaling --in <csv...> --out <img>."""

from __future__ import annotations

import argparse
import sys

from . import PlotSpec, SchemaError, plot_convergence, plot_scaling


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Figures from minimax-bench CSV output."
    )
    sub = parser.add_subparsers(dest="kind", required=True)
    for name in ("convergence", "scaling"):
        p = sub.add_parser(name)
        p.add_argument("--in", dest="inputs", nargs="+", required=True, help="input CSVs")
        p.add_argument("--out", required=True, help="output image (.svg or .png)")
        p.add_argument("--labels", nargs="*", default=None, help="one legend label per input")
    args = parser.parse_args(argv)

    spec = PlotSpec(
        inputs=tuple(args.inputs),
        kind=args.kind,
        out=args.out,
        labels=tuple(args.labels) if args.labels else (),
    )
    try:
        if args.kind == "convergence":
            plot_convergence(spec)
        else:
            plot_scaling(spec)
    except (SchemaError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
