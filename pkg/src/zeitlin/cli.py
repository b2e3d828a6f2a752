"""Command-line entry points: simulate, basis, spectrum."""

from __future__ import annotations

import argparse
import sys

from . import driver
from .driver import EXIT_CONFIG, EXIT_IO, EXIT_OK, ConfigError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zeitlin",
        description="Casimir-preserving solver for ideal 2-D hydrodynamics on the sphere",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation")
    sim.add_argument("--config", help="key=value configuration file")
    sim.add_argument("--n", type=int, help="matrix truncation size")
    sim.add_argument("--h", type=float, help="time-step (default: advective limit)")
    sim.add_argument("--steps", type=int, help="number of time-steps")
    sim.add_argument("--seed", type=int, help="random seed")
    sim.add_argument("--tol", type=float, help="fixed-point tolerance")
    sim.add_argument("--max-iter", type=int, dest="max_iter")
    sim.add_argument("--l-min", type=int, dest="l_min")
    sim.add_argument("--l-max", type=int, dest="l_max")
    sim.add_argument("--sample-every", type=int, dest="sample_every")
    sim.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")
    sim.add_argument("--output-dir", dest="output_dir")
    sim.add_argument("--threads", type=int)
    sim.add_argument("--comm-scale", type=float, dest="comm_scale")
    sim.add_argument(
        "--deterministic",
        action="store_true",
        default=None,
        help="pin the BLAS thread pool for bit-reproducible reductions",
    )
    sim.add_argument(
        "--no-grid",
        action="store_false",
        dest="write_grid",
        default=None,
        help="skip grid snapshots at sample times",
    )
    sim.add_argument("--basis-cache", dest="basis_cache", help="precomputed basis file")
    sim.add_argument("--resume", help="checkpoint file to continue from")

    bas = sub.add_parser("basis", help="precompute and cache the quantized basis")
    bas.add_argument("--n", type=int, required=True)
    bas.add_argument("--out", required=True)

    spec = sub.add_parser("spectrum", help="extract an energy spectrum from a checkpoint")
    spec.add_argument("--checkpoint", required=True)
    spec.add_argument("--basis", help="basis cache file (default: recompute)")
    spec.add_argument("--out", required=True)
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    overrides = {
        key: getattr(args, key)
        for key in (
            "n",
            "h",
            "steps",
            "seed",
            "tol",
            "max_iter",
            "l_min",
            "l_max",
            "sample_every",
            "checkpoint_every",
            "output_dir",
            "threads",
            "comm_scale",
            "deterministic",
            "write_grid",
            "basis_cache",
        )
    }
    try:
        file_values = driver.load_config_file(args.config) if args.config else None
        cfg = driver.make_config(file_values, **overrides)
    except ConfigError as exc:
        print(f"[zeitlin] configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"[zeitlin] cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    return driver.run(cfg, resume=args.resume)


def _cmd_basis(args: argparse.Namespace) -> int:
    from .basis import compute_basis, save_basis

    if args.n < 2:
        print(f"[zeitlin] configuration error: n must be >= 2, got {args.n}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        save_basis(args.out, compute_basis(args.n))
    except OSError as exc:
        print(f"[zeitlin] I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_spectrum(args: argparse.Namespace) -> int:
    from .basis import compute_basis, extract, load_basis
    from .diagnostics import energy_spectrum
    from .formats import FileFormatError, format_float, read_checkpoint

    try:
        cp = read_checkpoint(args.checkpoint)
        basis = load_basis(args.basis) if args.basis else compute_basis(cp.n)
    except (OSError, FileFormatError) as exc:
        print(f"[zeitlin] I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    if basis.n != cp.n:
        print(
            f"[zeitlin] configuration error: basis is for N={basis.n}, "
            f"checkpoint for N={cp.n}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    energy = energy_spectrum(extract(cp.w, basis))
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("l,E_l\n")
            for l in range(1, cp.n):
                fh.write(f"{l},{format_float(energy[l])}\n")
    except OSError as exc:
        print(f"[zeitlin] I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "simulate":
        return _cmd_simulate(args)
    if args.command == "basis":
        return _cmd_basis(args)
    if args.command == "spectrum":
        return _cmd_spectrum(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
