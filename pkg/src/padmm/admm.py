"""Preconditioned ADMM with a linearized nonlinear operator constraint.

One iteration, in order:

1. freeze the u-Jacobian A at (u^k, v^k) and set tau1 = theta / (delta ||A||^2),
2. u^{k+1} = prox_H(u^k - tau1 A* mubar^k),
3. freeze the v-Jacobian B at (u^{k+1}, v^k) and set tau2 analogously
   (or take the configured override, e.g. 1/delta when B = -I),
4. v^{k+1} = prox_J(v^k - tau2 B* (mu^k + delta (F(u^{k+1}, v^k) - c))),
5. mu^{k+1} = mu^k + delta (F(u^{k+1}, v^{k+1}) - c),
6. mubar^{k+1} = 2 mu^{k+1} - mu^k.

The quadratic surrogates that make the subproblems explicit are never
materialized; their effect is exactly the proximal form above, with
positive definiteness guaranteed by tau * delta * ||op||^2 = theta < 1.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .blocks import BlockVector
from .constraint import NonlinearConstraint
from .opnorm import estimate_opnorm, fresh_start
from .prox import ProxOp


class SolverDivergence(RuntimeError):
    """Raised when an iterate stops being finite; carries the last good state."""

    def __init__(self, message, last_state):
        super().__init__(message)
        self.last_state = last_state


@dataclass
class SolverConfig:
    delta: float = 1.0
    theta: float = 0.99
    max_iterations: int = 100
    power_iter_tol: float = 1e-9
    power_iter_max: int = 500
    tau2_override: Optional[float] = None
    warm_start_opnorm: bool = True
    residual_tol: Optional[float] = None
    seed: int = 0

    def validate(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.power_iter_max < 1:
            raise ValueError("power_iter_max must be at least 1")
        return self


@dataclass
class SolverState:
    u: BlockVector
    v: BlockVector
    mu: BlockVector
    mu_bar: BlockVector
    k: int = 0
    tau1: Optional[float] = None
    tau2: Optional[float] = None
    residual_history: list = field(default_factory=list)
    tau1_history: list = field(default_factory=list)
    tau2_history: list = field(default_factory=list)
    step_norm_history: list = field(default_factory=list)


@dataclass
class ConvergenceReport:
    iterations: int
    residuals: list
    tau1s: list
    tau2s: list
    wall_ms: float
    aborted: bool = False
    abort_message: str = ""

    @property
    def final_residual(self) -> float:
        return self.residuals[-1] if self.residuals else float("nan")

    def to_text(self) -> str:
        lines = [
            f"iterations: {self.iterations}",
            f"final_residual: {self.final_residual!r}",
            f"aborted: {int(self.aborted)}",
            f"wall_ms: {self.wall_ms:.3f}",
            "residuals:",
        ]
        lines += [f"  {r!r}" for r in self.residuals]
        return "\n".join(lines) + "\n"


@dataclass
class Problem:
    """A complete solver input: constraint, resolvents and initial point."""

    constraint: NonlinearConstraint
    prox_h: ProxOp
    prox_j: ProxOp
    u0: BlockVector
    v0: BlockVector
    mu0: BlockVector


class AdmmSolver:
    """Stateful driver around :func:`admm_step` with warm-started norms."""

    def __init__(self, constraint: NonlinearConstraint, prox_h: ProxOp,
                 prox_j: ProxOp, cfg: SolverConfig):
        self.constraint = constraint
        self.prox_h = prox_h
        self.prox_j = prox_j
        self.cfg = cfg.validate()
        self._warm_a = None
        self._warm_b = None

    def _norm_of(self, linmap, warm_attr: str) -> float:
        start = getattr(self, warm_attr)
        if start is None or not self.cfg.warm_start_opnorm:
            start = fresh_start(BlockVector.zeros(linmap.domain_shapes), self.cfg.seed)
        est = estimate_opnorm(
            linmap.apply, linmap.adjoint, start,
            tol=self.cfg.power_iter_tol, max_iter=self.cfg.power_iter_max,
        )
        setattr(self, warm_attr, est.eigvec)
        return est.value

    def step(self, state: SolverState) -> SolverState:
        cfg = self.cfg
        F = self.constraint
        c = F.target

        a = F.jac_u(state.u, state.v)
        norm_a = self._norm_of(a, "_warm_a")
        tau1 = cfg.theta / (cfg.delta * max(norm_a ** 2, 1e-300))
        u_new = self.prox_h.apply(state.u - tau1 * a.adjoint(state.mu_bar), tau1)

        b = F.jac_v(u_new, state.v)
        if cfg.tau2_override is not None:
            tau2 = cfg.tau2_override
        elif getattr(F, "jac_v_is_neg_identity", False):
            tau2 = cfg.theta / cfg.delta
        else:
            norm_b = self._norm_of(b, "_warm_b")
            tau2 = cfg.theta / (cfg.delta * max(norm_b ** 2, 1e-300))

        half_res = F.evaluate(u_new, state.v) - c
        v_new = self.prox_j.apply(
            state.v - tau2 * b.adjoint(state.mu + cfg.delta * half_res), tau2
        )

        full_res = F.evaluate(u_new, v_new) - c
        mu_new = state.mu + cfg.delta * full_res
        mu_bar_new = 2.0 * mu_new - state.mu

        if not (u_new.isfinite() and v_new.isfinite() and mu_new.isfinite()):
            raise SolverDivergence(
                f"non-finite iterate at iteration {state.k + 1}", state
            )

        res_norm = full_res.norm()
        return SolverState(
            u=u_new, v=v_new, mu=mu_new, mu_bar=mu_bar_new,
            k=state.k + 1, tau1=tau1, tau2=tau2,
            residual_history=state.residual_history + [res_norm],
            tau1_history=state.tau1_history + [tau1],
            tau2_history=state.tau2_history + [tau2],
            step_norm_history=state.step_norm_history + [(u_new - state.u).norm()],
        )

    def run(self, u0: BlockVector, v0: BlockVector, mu0: BlockVector,
            callbacks: Optional[list] = None):
        cfg = self.cfg
        state = SolverState(u=u0.copy(), v=v0.copy(), mu=mu0.copy(),
                            mu_bar=mu0.copy())
        aborted = False
        abort_message = ""
        t0 = time.perf_counter()
        for _ in range(cfg.max_iterations):
            try:
                state = self.step(state)
            except SolverDivergence as exc:
                state = exc.last_state
                aborted = True
                abort_message = str(exc)
                break
            if callbacks:
                for cb in callbacks:
                    cb(state)
            if (cfg.residual_tol is not None
                    and state.residual_history[-1] <= cfg.residual_tol):
                break
        wall_ms = (time.perf_counter() - t0) * 1e3
        report = ConvergenceReport(
            iterations=state.k,
            residuals=list(state.residual_history),
            tau1s=list(state.tau1_history),
            tau2s=list(state.tau2_history),
            wall_ms=wall_ms,
            aborted=aborted,
            abort_message=abort_message,
        )
        return state, report


def run(problem: Problem, cfg: SolverConfig,
        callbacks: Optional[list] = None):
    """Run the preconditioned ADMM on a fully specified problem."""
    solver = AdmmSolver(problem.constraint, problem.prox_h, problem.prox_j, cfg)
    return solver.run(problem.u0, problem.v0, problem.mu0, callbacks=callbacks)
