"""Command-line figure rendering: plot spectrum | casimirs | field."""

from __future__ import annotations

import argparse
import sys

from .plots import plot_casimir_drift, plot_spectrum, plot_vorticity_map
from .readers import FormatError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeitlin-plot",
        description="render figures from simulator output files",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    spec = sub.add_parser("spectrum", help="log-log energy spectra with a guide line")
    spec.add_argument("--in", dest="inputs", nargs="+", required=True, metavar="CSV")
    spec.add_argument("--out", required=True, metavar="PNG")
    spec.add_argument("--fit-lo", type=int, help="lowest degree of the slope fit")
    spec.add_argument("--fit-hi", type=int, help="highest degree of the slope fit")

    cas = sub.add_parser("casimirs", help="Casimir drift series on a log axis")
    cas.add_argument("--in", dest="inputs", required=True, metavar="CSV")
    cas.add_argument("--out", required=True, metavar="PNG")

    fld = sub.add_parser("field", help="vorticity map from a grid snapshot")
    fld.add_argument("--in", dest="inputs", required=True, metavar="BIN")
    fld.add_argument("--out", required=True, metavar="PNG")
    fld.add_argument("--vmax", type=float, help="symmetric color range (default: data max)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "spectrum":
            fit = None
            if args.fit_lo is not None or args.fit_hi is not None:
                fit = (args.fit_lo or 1, args.fit_hi or 10**9)
            for label, slope in plot_spectrum(args.inputs, args.out, fit_range=fit):
                print(f"{label}: fitted slope {slope:.4f}")
        elif args.command == "casimirs":
            plot_casimir_drift(args.inputs, args.out)
        elif args.command == "field":
            plot_vorticity_map(args.inputs, args.out, vmax=args.vmax)
    except (FormatError, ValueError, OSError) as exc:
        print(f"[zeitlin-plot] error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
