"""Command line entry point.

Subcommands: simulate, reconstruct, baseline, eval, equivalence.  Each
takes ``--config <file>`` plus ``--out``, ``--seed`` and ``--iters``
overrides.  Exit status: 0 success, 2 validation failure, 3 solver
abort.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .dataset import ContainerFormatError, Dataset, ReconstructionRecord
from .metrics import write_pgm, zero_fill_baseline
from .pipeline import (ConfigError, dataset_path, evaluate, load_config,
                       mri_problem, reconstruct, record_path, run_equivalence,
                       simulate, write_metrics, write_outputs)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="padmm",
        description="Joint MRI reconstruction experiments with "
                    "preconditioned ADMM / dual-first primal-dual solvers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("simulate", "generate a synthetic dataset"),
        ("reconstruct", "run the solver on a dataset"),
        ("baseline", "zero-filling baseline reconstruction"),
        ("eval", "metrics for a reconstruction record"),
        ("equivalence", "ADMM vs dual-first iterate comparison"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", help="output directory override")
        p.add_argument("--seed", type=int, help="noise seed override")
        p.add_argument("--iters", type=int, help="iteration count override")
        if name != "simulate":
            p.add_argument("--data", help="dataset file (default <out>/dataset.pad)")
        if name == "eval":
            p.add_argument("--recon", help="record file (default <out>/recon.pad)")
    return parser


def _apply_overrides(cfg, args):
    if args.out is not None:
        cfg = replace(cfg, output=args.out)
    if args.seed is not None:
        cfg = replace(cfg, sampling=replace(cfg.sampling, noise_seed=args.seed))
    if args.iters is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, max_iterations=args.iters))
    return cfg.validate()


def _load_dataset(cfg, args) -> Dataset:
    path = getattr(args, "data", None) or dataset_path(cfg.output)
    if not os.path.exists(path):
        raise ConfigError(f"dataset file not found: {path}")
    return Dataset.load(path)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
        os.makedirs(cfg.output, exist_ok=True)

        if args.command == "simulate":
            dataset = simulate(cfg)
            path = dataset_path(cfg.output)
            dataset.save(path)
            print(f"dataset written to {path} "
                  f"({dataset.n_coils} coils, fraction {dataset.fraction:.4f})")
            return EXIT_OK

        if args.command == "reconstruct":
            dataset = _load_dataset(cfg, args)
            mri_problem(dataset, cfg)  # validates data against weights early
            record, report = reconstruct(dataset, cfg)
            write_outputs(cfg.output, record, report)
            if report.aborted:
                print(f"solver aborted: {report.abort_message}", file=sys.stderr)
                return EXIT_SOLVER
            print(f"reconstruction written to {record_path(cfg.output)} "
                  f"({report.iterations} iterations)")
            return EXIT_OK

        if args.command == "baseline":
            dataset = _load_dataset(cfg, args)
            baseline = zero_fill_baseline(dataset.data)
            write_pgm(os.path.join(cfg.output, "zerofill.pgm"), baseline)
            print(f"zero-filling baseline written to {cfg.output}/zerofill.pgm")
            return EXIT_OK

        if args.command == "eval":
            dataset = _load_dataset(cfg, args)
            rec_path = args.recon or record_path(cfg.output)
            if not os.path.exists(rec_path):
                raise ConfigError(f"record file not found: {rec_path}")
            record = ReconstructionRecord.load(rec_path)
            values = evaluate(record, dataset)
            path = write_metrics(cfg.output, values)
            print(open(path).read(), end="")
            return EXIT_OK

        if args.command == "equivalence":
            dataset = _load_dataset(cfg, args)
            iters = args.iters if args.iters is not None else 50
            deviation = run_equivalence(dataset, cfg, iterations=iters)
            print(f"max iterate deviation over {iters} iterations: "
                  f"{deviation:.3e}")
            return EXIT_OK

        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, ContainerFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
