"""Seeded episode simulation, Monte Carlo evaluation, and the exact offline optimum.

Random streams: episode ``i`` of an evaluation uses seed ``base_seed + i``. That
seed is split into an arrival stream and a policy stream, so every policy sees
the same arrival sequences for the same seed. The arrival stream yields T
uniforms, one per round. The policy stream is consumed in this order: one
uniform for Greedy-Uniform's δ, or one uniform per Phase-I edge for SAMP's
rounding; then one uniform per round for SAMP's Phase-II sampling.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import ArrivalModel, Instance
from .ledger import SAFETY_TOL, BudgetLedger, is_safe
from .lpbench import LpSolution, solve_instance
from .policy import (
    Greedy,
    GreedyUniform,
    PhaseOnePlan,
    PolicySpec,
    Samp,
    SampSampler,
    greedy_order,
    greedy_phase1,
    greedy_phase2_decide,
    greedy_uniform,
    samp_phase1,
    samp_phase2_decide,
)

__all__ = [
    "BudgetLedger",
    "EpisodeResult",
    "EpisodeRunner",
    "EvalReport",
    "brute_force_offline_opt",
    "evaluate",
    "is_safe",
    "offline_opt_for_sequence",
    "run_episode",
    "sample_arrivals",
]

CSV_COLUMNS = ("policy", "episodes", "mean_reward", "std_error", "lp_objective", "competitive_ratio")


def episode_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    arrival_ss, policy_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(arrival_ss), np.random.default_rng(policy_ss)


def sample_arrivals(arrivals: ArrivalModel, rng: np.random.Generator) -> list[int]:
    """One online type per round, drawn independently from that round's distribution."""
    u = rng.random(arrivals.horizon)
    table = np.asarray(arrivals.table, dtype=float)
    cum = np.cumsum(table, axis=1)
    if arrivals.iid:
        idx = np.searchsorted(cum[0], u, side="right")
        last = np.broadcast_to(np.flatnonzero(table[0] > 0)[-1], idx.shape)
    else:
        idx = (cum <= u[:, None]).sum(axis=1)
        last = np.array([np.flatnonzero(r > 0)[-1] for r in table])
    # float round-off can leave cum[-1] a hair below 1
    return np.minimum(idx, last).tolist()


@dataclass
class EpisodeResult:
    total_reward: float
    phase1_copies: list[int]
    phase2_selections: list[tuple[int, int, int | None]]
    final_ledger: BudgetLedger


class EpisodeRunner:
    """Per-(instance, policy) state reused across episodes."""

    def __init__(self, instance: Instance, policy: PolicySpec, solution: LpSolution | None):
        self.instance = instance
        self.policy = policy
        self.solution = solution
        self.w1 = [e.weight for e in instance.edges_phase1]
        self.w2 = [e.weight for e in instance.edges_phase2]
        if isinstance(policy, Samp):
            if solution is None:
                raise ValueError("SAMP needs an LP solution")
            self.sampler = SampSampler(instance, solution, policy.alpha)
        else:
            self.order = greedy_order(instance)
            self._greedy_plans: dict[float, PhaseOnePlan] = {}

    def _greedy_plan(self, delta: float) -> PhaseOnePlan:
        plan = self._greedy_plans.get(delta)
        if plan is None:
            plan = self._greedy_plans[delta] = greedy_phase1(self.instance, delta)
        return plan

    def run(self, seed: int) -> EpisodeResult:
        inst, policy = self.instance, self.policy
        arrival_rng, rng = episode_streams(seed)
        seq = sample_arrivals(inst.arrivals, arrival_rng)
        ledger = BudgetLedger(inst.budgets)

        if isinstance(policy, Samp):
            plan = samp_phase1(self.solution, policy.eta, policy.removal, inst, rng)
        else:
            delta = greedy_uniform(inst, rng).delta if isinstance(policy, GreedyUniform) else policy.delta
            plan = self._greedy_plan(delta)
        reward = 0.0
        for e, n in enumerate(plan.copies):
            if n:
                ledger.debit(inst.edges_phase1[e], n)
                reward += self.w1[e] * n

        selections = []
        if isinstance(policy, Samp):
            for t, j in enumerate(seq):
                e = samp_phase2_decide(self.solution, policy.alpha, (j, t), ledger, inst, rng, self.sampler)
                selections.append((t, j, e))
                if e is not None:
                    reward += self.w2[e]
        else:
            for t, j in enumerate(seq):
                e = greedy_phase2_decide((j, t), ledger, inst, self.order)
                selections.append((t, j, e))
                if e is not None:
                    reward += self.w2[e]
        return EpisodeResult(reward, list(plan.copies), selections, ledger)


def run_episode(
    instance: Instance, policy: PolicySpec, lp_solution: LpSolution | None, seed: int
) -> EpisodeResult:
    return EpisodeRunner(instance, policy, lp_solution).run(seed)


@dataclass(frozen=True)
class EvalReport:
    policy: str
    episodes: int
    mean_reward: float
    std_error: float
    lp_objective: float
    competitive_ratio: float
    degenerate: bool = False

    def row(self) -> list[str]:
        return [
            self.policy,
            str(self.episodes),
            repr(self.mean_reward),
            repr(self.std_error),
            repr(self.lp_objective),
            repr(self.competitive_ratio),
        ]


def episode_rewards(
    instance: Instance, policy: PolicySpec, episodes: int, base_seed: int, solution: LpSolution | None
) -> np.ndarray:
    runner = EpisodeRunner(instance, policy, solution)
    return np.array([runner.run(base_seed + i).total_reward for i in range(episodes)])


def summarize(label: str, rewards: np.ndarray, lp_objective: float) -> EvalReport:
    n = rewards.size
    mean = float(np.mean(rewards))
    se = float(np.std(rewards, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    degenerate = lp_objective <= 0
    ratio = 0.0 if degenerate else mean / lp_objective
    return EvalReport(label, n, mean, se, float(lp_objective), ratio, degenerate)


def evaluate(
    instance: Instance,
    policy: PolicySpec,
    episodes: int,
    base_seed: int,
    solution: LpSolution | None = None,
) -> EvalReport:
    """Mean reward over seeded episodes and its ratio to the LP optimum."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    if solution is None:
        solution = solve_instance(instance)
    rewards = episode_rewards(instance, policy, episodes, base_seed, solution)
    return summarize(policy.label, rewards, solution.objective_value)


def reports_to_csv(reports, prefix_columns: tuple[str, ...] = (), prefixes=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*prefix_columns, *CSV_COLUMNS])
    for n, r in enumerate(reports):
        writer.writerow([*(prefixes[n] if prefixes else ()), *r.row()])
    return buf.getvalue()


# -- exact offline optimum -----------------------------------------------------


class EnumerationTooLarge(ValueError):
    pass


def _phase1_table(instance: Instance):
    budgets = instance.budgets
    caps = []
    for e in instance.edges_phase1:
        if not e.cost_items:
            raise ValueError(f"Phase-I edge {e.id} has no cost; the offline optimum is unbounded")
        caps.append(min(math.floor(budgets[k] / a + SAFETY_TOL) for k, a in e.cost_items))
    return caps


def _cost_matrix(instance: Instance, edges) -> np.ndarray:
    M = np.zeros((len(edges), len(instance.resources)))
    for i, e in enumerate(edges):
        for k, a in e.cost_items:
            M[i, k] = a
    return M


class _Oracle:
    def __init__(self, instance: Instance, max_enumeration: int):
        self.instance = instance
        self.budgets = np.array(instance.budgets, dtype=float)
        caps = _phase1_table(instance)
        n1 = math.prod(c + 1 for c in caps)
        if n1 > max_enumeration:
            raise EnumerationTooLarge(f"{n1} Phase-I plans exceed the enumeration budget {max_enumeration}")
        if caps:
            grid = np.array(list(itertools.product(*(range(c + 1) for c in caps))), dtype=float)
        else:
            grid = np.zeros((1, 0))
        self.p1_cost = grid @ _cost_matrix(instance, instance.edges_phase1)
        self.p1_weight = grid @ np.array([e.weight for e in instance.edges_phase1], dtype=float)
        self.c2 = _cost_matrix(instance, instance.edges_phase2)
        self.w2 = np.array([e.weight for e in instance.edges_phase2], dtype=float)
        self.n1 = self.p1_weight.size
        self.max_enumeration = max_enumeration

    def best(self, seq) -> float:
        K = len(self.instance.resources)
        cost = np.zeros((1, K))
        weight = np.zeros(1)
        for j in seq:
            group = self.instance.phase2_by_type[j]
            if not group:
                continue
            cost = np.concatenate([cost] + [cost + self.c2[e] for e in group])
            weight = np.concatenate([weight] + [weight + self.w2[e] for e in group])
            if cost.shape[0] * self.n1 > self.max_enumeration:
                raise EnumerationTooLarge("joint plans exceed the enumeration budget")
        ok = np.all(cost[:, None, :] + self.p1_cost[None, :, :] <= self.budgets + 1e-9, axis=2)
        total = weight[:, None] + self.p1_weight[None, :]
        return float(np.max(np.where(ok, total, -np.inf)))


def offline_opt_for_sequence(instance: Instance, seq, max_enumeration: int = 10**6) -> float:
    """Best total weight of any feasible joint plan once the arrival sequence is known."""
    return _Oracle(instance, max_enumeration).best(seq)


def brute_force_offline_opt(instance: Instance, max_enumeration: int = 10**6) -> float:
    """E[OPT]: the hindsight optimum averaged over every arrival sequence."""
    arr = instance.arrivals
    T, J = arr.horizon, instance.n_online
    if J**T > max_enumeration:
        raise EnumerationTooLarge(f"{J}^{T} arrival sequences exceed the enumeration budget")
    oracle = _Oracle(instance, max_enumeration)
    work = 0
    total = 0.0
    for seq in itertools.product(range(J), repeat=T):
        prob = math.prod(arr.prob(j, t) for t, j in enumerate(seq))
        if prob == 0:
            continue
        work += oracle.n1 * math.prod(len(instance.phase2_by_type[j]) + 1 for j in seq)
        if work > max_enumeration:
            raise EnumerationTooLarge(f"more than {max_enumeration} joint plans to enumerate")
        total += prob * oracle.best(seq)
    return total
