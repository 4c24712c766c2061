"""Log-barrier interior-point solver for sum-of-logs concave programs.

Solves
    maximize   sum_k w_k * log2(a_k . p + c_k)  -  d . p
    subject to r_i . p + o_i >= 0   (linear inequality rows)
               0 <= p <= upper      (per-variable box)

by Newton ascent with backtracking line search on the barrier objective
``F(p) + mu * sum_i ln(s_i(p))`` while the barrier parameter ``mu`` is cut
by a factor 10 from 1 down to 1e-8.  The problem is concave, so the final
central-path point is within ``m * mu_final`` of the true optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "ConcaveLogProblem",
    "SolveResult",
    "InfeasibleStartError",
    "NewtonIterationError",
    "solve",
]

_LN2 = float(np.log(2.0))


class InfeasibleStartError(ValueError):
    """The starting point violates a constraint (or a log argument)."""


class NewtonIterationError(RuntimeError):
    """Newton step budget exhausted; ``best_point`` holds the best iterate."""

    def __init__(self, message: str, best_point: np.ndarray):
        super().__init__(message)
        self.best_point = best_point


@dataclass(frozen=True)
class ConcaveLogProblem:
    """One concave subproblem instance.

    Attributes:
        log_rows: (K, n) coefficient rows of the log terms.
        log_offsets: (K,) constant offsets; every log argument must be
            strictly positive on the feasible set (offsets are >= 1 in the
            power-allocation subproblems built by this package).
        linear_cost: (n,) cost row; the objective subtracts ``cost . p``.
        constraint_rows: (m, n) inequality rows, ``row . p + offset >= 0``.
        constraint_offsets: (m,) inequality offsets.
        upper: (n,) per-variable upper bounds; lower bounds are zero.
        log_weights: (K,) positive weights on the log terms (default 1).
    """

    log_rows: np.ndarray
    log_offsets: np.ndarray
    linear_cost: np.ndarray
    constraint_rows: np.ndarray
    constraint_offsets: np.ndarray
    upper: np.ndarray
    log_weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.linear_cost.shape[0]
        if self.log_rows.ndim != 2 or self.log_rows.shape[1] != n:
            raise ValueError("log_rows must be (K, n)")
        if self.constraint_rows.ndim != 2 or self.constraint_rows.shape[1] != n:
            raise ValueError("constraint_rows must be (m, n)")
        if self.log_offsets.shape != (self.log_rows.shape[0],):
            raise ValueError("log_offsets must match log_rows")
        if self.constraint_offsets.shape != (self.constraint_rows.shape[0],):
            raise ValueError("constraint_offsets must match constraint_rows")
        if self.upper.shape != (n,) or np.any(self.upper <= 0.0):
            raise ValueError("upper must be (n,) and positive")
        if self.log_weights is not None and (
            self.log_weights.shape != (self.log_rows.shape[0],)
            or np.any(self.log_weights <= 0.0)
        ):
            raise ValueError("log_weights must be positive and match log_rows")

    @property
    def dim(self) -> int:
        return self.linear_cost.shape[0]

    def weights(self) -> np.ndarray:
        if self.log_weights is None:
            return np.ones(self.log_rows.shape[0])
        return self.log_weights

    def objective(self, p: np.ndarray) -> float:
        """Objective value at ``p`` (-inf outside the log domain)."""
        args = self.log_rows @ p + self.log_offsets
        if np.any(args <= 0.0):
            return -np.inf
        return float(self.weights() @ np.log2(args) - self.linear_cost @ p)


class SolveResult(NamedTuple):
    """Solver outcome; unpacks as ``(point, value)`` like a plain pair."""

    point: np.ndarray
    value: float
    kkt_residual: float
    duality_gap: float
    newton_steps: int


def _stacked_constraints(problem: ConcaveLogProblem) -> tuple[np.ndarray, np.ndarray]:
    """All inequalities as G p + h >= 0, box rows included."""
    n = problem.dim
    eye = np.eye(n)
    rows = np.vstack([problem.constraint_rows, eye, -eye])
    offsets = np.concatenate([problem.constraint_offsets, np.zeros(n), problem.upper])
    return rows, offsets


def solve(
    problem: ConcaveLogProblem,
    start: np.ndarray,
    kkt_tol: float = 1e-8,
    mu_initial: float = 1.0,
    mu_final: float = 1e-8,
    mu_factor: float = 10.0,
    max_newton: int = 500,
) -> SolveResult:
    """Maximize a :class:`ConcaveLogProblem` from a strictly feasible start.

    The returned ``kkt_residual`` combines the stationarity norm at the
    final barrier point with any primal/dual feasibility violation;
    ``duality_gap`` is the central-path bound ``m * mu_final`` on the
    remaining distance to the true optimum.  The returned point is clamped
    into the box and never has a worse objective than ``start``.

    Raises:
        InfeasibleStartError: ``start`` is not strictly feasible.
        NewtonIterationError: more than ``max_newton`` total Newton steps.
    """
    p = np.array(start, dtype=float)
    n = problem.dim
    if p.shape != (n,):
        raise ValueError(f"start must have shape ({n},)")

    big_g, big_h = _stacked_constraints(problem)
    a_rows = problem.log_rows
    c_off = problem.log_offsets
    cost = problem.linear_cost
    w = problem.weights()
    w_ln = w / _LN2
    eye_n = np.eye(n)

    slack = big_g @ p + big_h
    args = a_rows @ p + c_off
    if np.any(slack <= 0.0) or np.any(args <= 0.0):
        raise InfeasibleStartError("start must satisfy every constraint strictly")

    def barrier_value(args_v: np.ndarray, slack_v: np.ndarray, cost_p: float, mu: float) -> float:
        return float(w @ np.log2(args_v) - cost_p + mu * np.sum(np.log(slack_v)))

    start_objective = problem.objective(start)
    cost_p = float(cost @ p)
    steps = 0
    mu = mu_initial
    grad = a_rows.T @ (w_ln / args) - cost + mu * (big_g.T @ (1.0 / slack))
    while True:
        final_stage = mu <= mu_final * (1.0 + 1e-12)
        for _ in range(120):  # per-stage cap; the global budget binds first
            inv_args = 1.0 / args
            inv_slack = 1.0 / slack
            grad = a_rows.T @ (w_ln * inv_args) - cost + mu * (big_g.T @ inv_slack)
            if final_stage and float(np.max(np.abs(grad))) <= 0.5 * kkt_tol:
                break
            neg_hess = (a_rows * (w_ln * inv_args**2)[:, None]).T @ a_rows
            neg_hess += mu * (big_g * (inv_slack**2)[:, None]).T @ big_g
            try:
                delta = np.linalg.solve(neg_hess, grad)
            except np.linalg.LinAlgError:
                jitter = 1e-12 * float(np.trace(neg_hess)) / n
                delta = np.linalg.solve(neg_hess + jitter * eye_n, grad)
            decrement = float(grad @ delta)
            phi = barrier_value(args, slack, cost_p, mu)
            if not final_stage and decrement <= 2e-13 * max(1.0, abs(phi)):
                break
            if final_stage and decrement <= 1e-18 * max(1.0, abs(phi)):
                break  # stationarity floor reached in double precision
            steps += 1
            if steps > max_newton:
                raise NewtonIterationError(
                    f"exceeded {max_newton} Newton steps", np.clip(p, 0.0, problem.upper)
                )

            # largest step keeping every slack and log argument positive
            g_delta = big_g @ delta
            a_delta = a_rows @ delta
            t = 1.0
            neg = g_delta < 0.0
            if np.any(neg):
                t = min(t, 0.99 * float(np.min(-slack[neg] / g_delta[neg])))
            neg = a_delta < 0.0
            if np.any(neg):
                t = min(t, 0.99 * float(np.min(-args[neg] / a_delta[neg])))

            cost_delta = float(cost @ delta)
            accepted = False
            for _ in range(60):
                new_args = args + t * a_delta
                new_slack = slack + t * g_delta
                if np.all(new_args > 0.0) and np.all(new_slack > 0.0):
                    new_cost_p = cost_p + t * cost_delta
                    if (
                        barrier_value(new_args, new_slack, new_cost_p, mu)
                        >= phi + 0.25 * t * decrement
                    ):
                        accepted = True
                        break
                t *= 0.5
            if not accepted:
                break  # no measurable ascent left at this stage
            p = p + t * delta
            args = new_args
            slack = new_slack
            cost_p = new_cost_p
        if final_stage:
            break
        mu = max(mu / mu_factor, mu_final)

    point = np.clip(p, 0.0, problem.upper)
    value = problem.objective(point)
    if value < start_objective:
        # never return worse than the caller's own point
        point = np.array(start, dtype=float)
        value = start_objective
        slack = big_g @ point + big_h

    duals = mu_final / np.maximum(slack, 1e-300)
    stationarity = float(np.max(np.abs(grad)))
    primal_violation = float(max(0.0, -np.min(big_g @ point + big_h)))
    dual_violation = float(max(0.0, -np.min(duals)))
    return SolveResult(
        point=point,
        value=value,
        kkt_residual=stationarity + primal_violation + dual_violation,
        duality_gap=float(big_h.shape[0]) * mu_final,
        newton_steps=steps,
    )
