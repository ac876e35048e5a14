"""Experiment orchestration: configs, simulate / reconstruct / evaluate."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np
import yaml

from .admm import AdmmSolver, SolverConfig
from .dataset import Dataset, ReconstructionRecord
from .metrics import format_metrics, psnr, write_pgm, zero_fill_baseline
from .mri import MriProblem, separable_problem
from .pdhgm import PdhgmSolver, equivalence_check
from .phantom import (PhantomSpec, SamplingSpec, build_phantom,
                      make_coil_maps, simulate_kspace, spiral_mask)

ALGORITHMS = ("admm", "pdhgm")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit status 2)."""


@dataclass
class ExperimentConfig:
    phantom: PhantomSpec
    coils: int
    coil_seed: int
    sampling: SamplingSpec
    solver: SolverConfig
    algorithm: str
    lam: object
    alpha0: float
    alpha: object
    tv_shrink: str = "pixel"
    output: str = "out"

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.coils < 1:
            raise ConfigError("coil count must be at least 1")
        try:
            self.sampling.validate()
            self.solver.validate()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a validated config from nested key/value data."""
    try:
        ph = raw.get("phantom", {})
        co = raw.get("coils", {})
        sa = raw.get("sampling", {})
        so = raw.get("solver", {})
        we = raw.get("weights", {})
        cfg = ExperimentConfig(
            phantom=PhantomSpec(size=int(ph.get("size", 190))),
            coils=int(co.get("count", 8)),
            coil_seed=int(co.get("seed", 1)),
            sampling=SamplingSpec(
                fraction=float(sa.get("fraction", 0.25)),
                turns=float(sa.get("turns", 12.0)),
                sigma=float(sa.get("sigma", 0.05)),
                noise_seed=int(sa.get("seed", 0)),
            ),
            solver=SolverConfig(
                delta=float(so.get("delta", 1.0)),
                theta=float(so.get("theta", 0.99)),
                max_iterations=int(so.get("iterations", 1500)),
                power_iter_tol=float(so.get("power_iter_tol", 1e-7)),
                power_iter_max=int(so.get("power_iter_max", 100)),
                seed=int(so.get("seed", 0)),
            ),
            algorithm=str(so.get("algorithm", "admm")),
            lam=we.get("lam", 0.0621),
            alpha0=float(we.get("alpha0", 0.062)),
            alpha=we.get("alpha", 0.9317),
            tv_shrink=str(we.get("tv_shrink", "pixel")),
            output=str(raw.get("output", "out")),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(raw)


def simulate(cfg: ExperimentConfig) -> Dataset:
    """Generate phantom, coil maps, mask and noisy k-space data.

    The configured noise level ``sigma`` is expressed against
    unnormalized-DFT k-space amplitudes (the usual scanner convention,
    where the DC bin of a unit-magnitude image is of order H*W).  The
    internal representation uses the unitary DFT, so the per-bin noise
    standard deviation is sigma / sqrt(H*W).
    """
    phantom = build_phantom(cfg.phantom)
    coil_maps = make_coil_maps(cfg.coils, cfg.phantom.size, seed=cfg.coil_seed)
    mask = spiral_mask(cfg.sampling, cfg.phantom.size)
    npix = float(phantom.size)
    data = simulate_kspace(phantom, coil_maps, mask,
                           cfg.sampling.sigma / np.sqrt(npix),
                           cfg.sampling.noise_seed)
    return Dataset(
        mask=mask, data=data, sigma=cfg.sampling.sigma,
        noise_seed=cfg.sampling.noise_seed, coil_seed=cfg.coil_seed,
        fraction=float(mask.mean()),
        phantom=phantom, coil_maps=coil_maps,
    )


def mri_problem(dataset: Dataset, cfg: ExperimentConfig) -> MriProblem:
    """Assemble the reconstruction problem for a dataset.

    The configured fidelity weight ``lam`` follows the same
    unnormalized-DFT data scale as ``sigma`` (see :func:`simulate`);
    squared residuals pick up a factor H*W when re-expressed against
    the unitary transform, so the effective weight is lam * H * W.
    """
    npix = float(dataset.mask.size)
    lam = np.asarray(cfg.lam, dtype=float) * npix
    return MriProblem(
        mask=dataset.mask, data=dataset.data,
        lam=lam, alpha0=cfg.alpha0, alpha=cfg.alpha,
        tv_shrink=cfg.tv_shrink,
    )


def reconstruct(dataset: Dataset, cfg: ExperimentConfig):
    """Run the configured solver; returns (record, report)."""
    problem = separable_problem(mri_problem(dataset, cfg))
    if cfg.algorithm == "admm":
        # B = -I, so tau2 is eliminated in favor of 1/delta
        solver_cfg = replace(cfg.solver, tau2_override=1.0 / cfg.solver.delta)
        ap = problem.as_admm_problem()
        solver = AdmmSolver(ap.constraint, ap.prox_h, ap.prox_j, solver_cfg)
        state, report = solver.run(ap.u0, ap.v0, ap.mu0)
        final_u = state.u
    else:
        _ = problem.as_admm_problem()  # validates layouts
        u, _mu, report = PdhgmSolver(problem, cfg.solver).run()
        final_u = u
    record = ReconstructionRecord(
        u=final_u[0],
        coil_maps=[final_u[j] for j in range(1, dataset.n_coils + 1)],
        algorithm=cfg.algorithm,
        iterations=report.iterations,
        final_residual=report.final_residual if report.residuals else float("nan"),
        wall_ms=report.wall_ms,
    )
    return record, report


def evaluate(record: ReconstructionRecord, dataset: Dataset) -> dict:
    """PSNR of the reconstruction and the zero-filling baseline."""
    if dataset.phantom is None:
        raise ConfigError("dataset has no ground truth; cannot evaluate")
    baseline = zero_fill_baseline(dataset.data)
    return {
        "psnr_recon_db": psnr(record.u, dataset.phantom),
        "psnr_zerofill_db": psnr(baseline, dataset.phantom),
        "final_residual": float(record.final_residual),
        "iterations": int(record.iterations),
        "wall_ms": float(record.wall_ms),
    }


def run_equivalence(dataset: Dataset, cfg: ExperimentConfig,
                    iterations: int | None = None) -> float:
    """Max ADMM / dual-first deviation on this dataset's problem."""
    problem = separable_problem(mri_problem(dataset, cfg))
    iters = iterations if iterations is not None else cfg.solver.max_iterations
    return equivalence_check(problem, cfg.solver, iters)


# --- file layout helpers used by the CLI ---

def dataset_path(out_dir) -> str:
    return os.path.join(out_dir, "dataset.pad")


def record_path(out_dir) -> str:
    return os.path.join(out_dir, "recon.pad")


def write_outputs(out_dir, record: ReconstructionRecord, report):
    record.save(record_path(out_dir))
    with open(os.path.join(out_dir, "convergence.txt"), "w") as fh:
        fh.write(report.to_text())
    write_pgm(os.path.join(out_dir, "recon_u.pgm"), record.u)
    for j, c in enumerate(record.coil_maps):
        write_pgm(os.path.join(out_dir, f"recon_coil_{j}.pgm"), c)


def write_metrics(out_dir, values: dict) -> str:
    text = format_metrics(values)
    path = os.path.join(out_dir, "metrics.txt")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path
