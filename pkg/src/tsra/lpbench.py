"""The benchmark LP and its solution.

Variables are one ``x_e`` per Phase-I edge and one ``y_{e,t}`` per Phase-II
edge and round. When arrivals are identical across rounds the per-round
variables are aggregated into ``Y_e = Σ_t y_{e,t}`` and the arrival rows become
``Σ_{e∈E²_j} Y_e <= T·p_j``; the per-round plan is then ``y_{e,t} = Y_e / T``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Instance, unbounded_phase1_edges, validate
from .simplex import LpError, LpInfeasible, LpUnbounded, simplex_max

__all__ = [
    "LpBuildError",
    "LpError",
    "LpInfeasible",
    "LpProblem",
    "LpSolution",
    "LpUnbounded",
    "build_benchmark",
    "lp_upper_bound_check",
    "solve",
    "solve_instance",
]

FEAS_TOL = 1e-7


class LpBuildError(ValueError):
    pass


@dataclass(frozen=True)
class LpProblem:
    """``max c·v  s.t.  A v <= b,  lower <= v <= upper`` with lower = 0.

    ``catalog[i]`` is ``("x", e)``, ``("y", e, t)`` or ``("Y", e)`` where ``e``
    is a position in the instance's edge list for that phase.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    upper: np.ndarray
    catalog: tuple[tuple, ...]
    row_labels: tuple[tuple, ...]
    n_phase1: int
    n_phase2: int
    horizon: int
    aggregated: bool
    bounds_implied: bool = False

    @property
    def n_vars(self) -> int:
        return self.c.size

    def max_violation(self, v: np.ndarray) -> float:
        v = np.asarray(v, dtype=float)
        worst = 0.0
        if self.A.size:
            worst = max(worst, float(np.max(self.A @ v - self.b, initial=0.0)))
        worst = max(worst, float(np.max(-v, initial=0.0)))
        worst = max(worst, float(np.max(v - self.upper, initial=0.0)))
        return worst


@dataclass(frozen=True)
class LpSolution:
    """Optimal fractional plan.

    ``x[e]`` is x*_e; ``y[e, t]`` is y*_{e,t}. Aggregated solutions store a single
    column holding Y_e / T, which applies to every round.
    """

    x: np.ndarray
    y: np.ndarray
    objective_value: float
    horizon: int
    aggregated: bool
    values: np.ndarray

    def y_star(self, e: int, t: int) -> float:
        return float(self.y[e, 0] if self.aggregated else self.y[e, t])

    def y_round(self, t: int) -> np.ndarray:
        return self.y[:, 0] if self.aggregated else self.y[:, t]


def build_benchmark(instance: Instance, aggregate: bool | None = None) -> LpProblem:
    """Transcribe the benchmark LP for ``instance``.

    ``aggregate=None`` aggregates whenever arrivals do not depend on the round.
    """
    problems = validate(instance)
    if problems:
        raise LpBuildError("invalid instance: " + "; ".join(v.message for v in problems[:5]))
    free = unbounded_phase1_edges(instance)
    if free:
        raise LpBuildError(f"Phase-I edges {free} have no cost; the LP would be unbounded")

    arr = instance.arrivals
    T = arr.horizon
    if aggregate is None:
        aggregate = arr.is_time_invariant
    elif aggregate and not arr.is_time_invariant:
        raise LpBuildError("cannot aggregate rounds: arrival probabilities vary over time")

    n1 = len(instance.edges_phase1)
    n2 = len(instance.edges_phase2)
    n_rounds = 1 if aggregate else T
    nv = n1 + n2 * n_rounds

    def yvar(e: int, t: int) -> int:
        return n1 + e * n_rounds + t

    catalog: list[tuple] = [("x", e) for e in range(n1)]
    for e in range(n2):
        if aggregate:
            catalog.append(("Y", e))
        else:
            catalog.extend(("y", e, t) for t in range(T))

    c = np.zeros(nv)
    upper = np.full(nv, np.inf)
    for e, edge in enumerate(instance.edges_phase1):
        c[e] = edge.weight
    for e, edge in enumerate(instance.edges_phase2):
        for t in range(n_rounds):
            c[yvar(e, t)] = edge.weight
            upper[yvar(e, t)] = float(T) if aggregate else 1.0

    rows: list[np.ndarray] = []
    rhs: list[float] = []
    labels: list[tuple] = []
    for j, group in enumerate(instance.phase2_by_type):
        if not group:
            continue
        for t in range(n_rounds):
            row = np.zeros(nv)
            for e in group:
                row[yvar(e, t)] = 1.0
            rows.append(row)
            if aggregate:
                rhs.append(T * arr.prob(j, 0))
                labels.append(("arrival", j))
            else:
                rhs.append(arr.prob(j, t))
                labels.append(("arrival", j, t))
    for res in instance.resources:
        row = np.zeros(nv)
        for e, edge in enumerate(instance.edges_phase1):
            row[e] = edge.cost.get(res.id, 0.0)
        for e, edge in enumerate(instance.edges_phase2):
            a = edge.cost.get(res.id, 0.0)
            if a:
                for t in range(n_rounds):
                    row[yvar(e, t)] = a
        rows.append(row)
        rhs.append(res.budget)
        labels.append(("budget", res.id))

    A = np.array(rows) if rows else np.zeros((0, nv))
    return LpProblem(
        c=c,
        A=A,
        b=np.array(rhs, dtype=float),
        upper=upper,
        catalog=tuple(catalog),
        row_labels=tuple(labels),
        n_phase1=n1,
        n_phase2=n2,
        horizon=T,
        aggregated=aggregate,
        bounds_implied=True,
    )


def solve(problem: LpProblem) -> LpSolution:
    if problem.n_vars == 0:
        return LpSolution(
            x=np.zeros(0),
            y=np.zeros((0, 1 if problem.aggregated else problem.horizon)),
            objective_value=0.0,
            horizon=problem.horizon,
            aggregated=problem.aggregated,
            values=np.zeros(0),
        )
    # benchmark y bounds follow from the arrival rows (y <= p <= 1, Y <= T·p <= T)
    upper = None if problem.bounds_implied else problem.upper
    res = simplex_max(problem.c, problem.A, problem.b, upper)
    v = np.minimum(res.x, problem.upper)
    n1, n2, T = problem.n_phase1, problem.n_phase2, problem.horizon
    x = v[:n1].copy()
    if problem.aggregated:
        y = v[n1:].reshape(n2, 1) / T
    else:
        y = v[n1:].reshape(n2, T)
    return LpSolution(
        x=x,
        y=y,
        objective_value=float(problem.c @ v),
        horizon=T,
        aggregated=problem.aggregated,
        values=v,
    )


def solve_instance(instance: Instance, aggregate: bool | None = None) -> LpSolution:
    return solve(build_benchmark(instance, aggregate))


def lp_upper_bound_check(instance: Instance, solution: LpSolution, offline_opt: float) -> bool:
    return solution.objective_value >= offline_opt - 1e-6


def solution_objective(instance: Instance, solution: LpSolution) -> float:
    """Σ w_e x*_e + Σ_{e,t} w_e y*_{e,t}, recomputed from the plan."""
    total = math.fsum(e.weight * solution.x[i] for i, e in enumerate(instance.edges_phase1))
    for i, e in enumerate(instance.edges_phase2):
        for t in range(solution.horizon):
            total += e.weight * solution.y_star(i, t)
    return total
