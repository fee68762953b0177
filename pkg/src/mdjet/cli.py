"""Command line entry point.

Exit codes: 0 pipeline completed (whatever the verdicts), 2 configuration
error, 3 background solve failed for every seed tried, 4 internal
inconsistency (nonzero residual, rank engines disagreeing, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .cauchy import InconsistentSystem, StuckSolve
from .jetpoly import format_poly
from .linalg_exact import RankMismatch, write_column_map, write_triplets
from .mdsystem import SystemSpec, build_gamma_oracle, build_system
from .pipeline import (
    COLUMN_POLICIES,
    RANK_MODES,
    ConfigError,
    RunConfig,
    default_columns,
    order_sweep,
    parse_columns,
    report_json,
    report_text,
    run_pipeline,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVE, EXIT_INTERNAL = 0, 2, 3, 4


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mdjet",
        description="Linearize the prolonged gauge-fixed Maxwell-Dirac system about a random "
        "truncated power-series solution and test which spinor jets are pinned.",
    )
    p.add_argument("--seed", type=int, default=0, help="SplitMix64 seed for initial data")
    p.add_argument("--max-order", type=int, default=5, help="maximal jet order (default 5)")
    p.add_argument("--e2", type=_fraction, default=Fraction(221, 2410), metavar="P/Q",
                   help="squared charge (default 221/2410)")
    p.add_argument("--columns", type=str, default=None,
                   help="jets to pin-test, e.g. psi1r@0,0,0,0,psi2i@0,0,0,1 "
                   "(default: the seven spinor components at the origin)")
    p.add_argument("--rank-mode", choices=RANK_MODES, default="both")
    p.add_argument("--column-policy", choices=COLUMN_POLICIES, default="occurring")
    p.add_argument("--retries", type=int, default=3, help="reseed attempts on a stuck solve")
    p.add_argument("--extra-orders", type=int, default=1,
                   help="auxiliary prolongation depth used only to complete the background")
    p.add_argument("--primes", type=int, default=3, help="number of primes for modular rank")
    p.add_argument("--flip-spatial-current", action="store_true",
                   help="negate the spatial current (sign-convention experiment)")
    p.add_argument("--dump-system", type=Path, metavar="PATH",
                   help="write equations, gamma matrices and currents")
    p.add_argument("--dump-point", type=Path, metavar="PATH", help="write the background jet point")
    p.add_argument("--dump-matrix", type=Path, metavar="PATH",
                   help="write the linearization as triplets (+ PATH.columns)")
    p.add_argument("--emit", choices=("json", "text"), default="text")
    p.add_argument("--out", type=Path, metavar="PATH", help="report destination (default stdout)")
    p.add_argument("--experiment", choices=("order-sweep",),
                   help="order-sweep: run max order 3, 4, 5 and report each")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def dump_system(spec: SystemSpec, path: Path) -> None:
    oracle = build_gamma_oracle()
    with path.open("w") as f:
        f.write(f"# e2 = {spec.e2}\n")
        for name, poly in spec:
            f.write(f"{name}: {format_poly(poly)}\n")
        for mu, g in enumerate(oracle.gammas):
            f.write(f"# gamma^{mu}\n")
            for row in g:
                cells = []
                for z in row:
                    re_ = z.re.coefficient() if z.re else 0
                    im = z.im.coefficient() if z.im else 0
                    cells.append(f"{re_}{'+' if im >= 0 else '-'}{abs(im)}i")
                f.write("  " + " ".join(cells) + "\n")
        for mu, j in enumerate(oracle.currents):
            f.write(f"J{mu}: {format_poly(j.re)}\n")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    cols = parse_columns(args.columns) if args.columns else default_columns()
    return RunConfig(
        seed=args.seed,
        max_order=args.max_order,
        e2=args.e2,
        test_columns=cols,
        rank_mode=args.rank_mode,
        column_policy=args.column_policy,
        retries=args.retries,
        extra_orders=args.extra_orders,
        prime_count=args.primes,
        flip_spatial_current=args.flip_spatial_current,
    )


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config_from_args(args)
        cfg.validate()
        if args.dump_system:
            dump_system(build_system(cfg.e2, cfg.flip_spatial_current), args.dump_system)
        if args.experiment == "order-sweep":
            reports = order_sweep(cfg)
            if args.emit == "json":
                text = json.dumps([r.to_json() for r in reports], indent=2, sort_keys=True) + "\n"
            else:
                text = "".join(report_text(r) + "\n" for r in reports)
            _write(text, args.out)
            return EXIT_OK
        keep = bool(args.dump_point or args.dump_matrix)
        report = run_pipeline(cfg, keep_artifacts=keep)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StuckSolve as exc:
        print(f"background solve failed: {exc}", file=sys.stderr)
        return EXIT_SOLVE
    except (InconsistentSystem, RankMismatch, AssertionError) as exc:
        print(f"internal inconsistency: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    art = report.artifacts
    if args.dump_point and art:
        with args.dump_point.open("w") as f:
            art.point.write(f)
    if args.dump_matrix and art:
        with args.dump_matrix.open("w") as f:
            write_triplets(art.matrix, f)
        with Path(str(args.dump_matrix) + ".columns").open("w") as f:
            write_column_map(art.matrix, f)
    _write(report_json(report) if args.emit == "json" else report_text(report), args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
