"""Command-line entry point.

Subcommands: run, sweep, validate, export-grid.  Experiments are fully
described by their JSON config; identical configs produce byte-identical
summaries.  The --threads flag caps the linear-algebra thread pools and
must not change any result beyond documented solver tolerances.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, str(n))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="cap BLAS/OpenMP thread pools")
    common.add_argument("--quiet", action="store_true",
                        help="suppress progress")

    p = argparse.ArgumentParser(
        prog="branchwave",
        description="numerical scattering experiments on branched coverings "
                    "of the plane")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="run one experiment")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--no-plot", action="store_true",
                     help="skip figure rendering on the report path")

    sw = sub.add_parser("sweep", parents=[common],
                        help="run one experiment over a parameter")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--parameter", required=True,
                    help="dotted config path, e.g. packet.s")
    sw.add_argument("--values", required=True,
                    help="JSON list of values, e.g. [4,8,16]")
    sw.add_argument("--plot", action="store_true",
                    help="render figures for every sweep member")

    va = sub.add_parser("validate", parents=[common],
                        help="validate a config and exit")
    va.add_argument("--config", required=True)

    eg = sub.add_parser("export-grid", parents=[common],
                        help="write the adjacency list as CSV")
    eg.add_argument("--config", required=True)
    eg.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _apply_threads(args.threads)

    # imports after the thread caps so the pools pick them up
    from .config import ExperimentConfig
    from .errors import ValidationError
    from .runner import run_experiment, run_sweep

    if args.command == "validate":
        try:
            cfg = ExperimentConfig.load(args.config)
            derived = cfg.validate()
        except ValidationError as exc:
            print(f"invalid: {type(exc).__name__}: {exc}")
            return 2
        print(json.dumps({"valid": True, "derived": derived}, indent=2,
                         sort_keys=True, default=float))
        return 0

    if args.command == "export-grid":
        try:
            cfg = ExperimentConfig.load(args.config)
            from .geometry import build_grid
            L, h = cfg.grid_params()
            grid = build_grid(cfg.covering(), L, h)
        except ValidationError as exc:
            print(f"invalid: {type(exc).__name__}: {exc}")
            return 2
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        grid.export_adjacency_csv(out)
        if not args.quiet:
            print(f"wrote {out}")
        return 0

    try:
        cfg = ExperimentConfig.load(args.config)
    except ValidationError as exc:
        print(f"invalid: {type(exc).__name__}: {exc}")
        return 2

    if args.command == "run":
        code, _ = run_experiment(cfg, args.out, plots=not args.no_plot,
                                 quiet=args.quiet)
        return code
    if args.command == "sweep":
        values = json.loads(args.values)
        code, _ = run_sweep(cfg, args.parameter, values, args.out,
                            plots=args.plot, quiet=args.quiet)
        return code
    return 2


if __name__ == "__main__":
    sys.exit(main())
