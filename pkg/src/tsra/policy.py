"""Allocation policies: SAMP(η, α), Greedy(δ), Greedy-Uniform, and ratio guarantees."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .core import Instance
from .ledger import SAFETY_TOL, BudgetLedger
from .lpbench import LpSolution

SUM_TOL = 1e-9


class ContractViolation(RuntimeError):
    """A policy was called with inputs its guarantees rule out."""


class RemovalMode(str, enum.Enum):
    ALL_COPIES = "all"
    SEQUENTIAL = "seq"


@dataclass(frozen=True)
class Samp:
    eta: float = 1.0
    alpha: float = 1.0
    removal: RemovalMode = RemovalMode.ALL_COPIES

    def __post_init__(self):
        for name in ("eta", "alpha"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"SAMP {name} must lie in (0, 1], got {v}")

    @property
    def label(self) -> str:
        return f"samp:eta={self.eta:g},alpha={self.alpha:g},removal={self.removal.value}"


@dataclass(frozen=True)
class Greedy:
    delta: float

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError(f"Greedy delta must lie in [0, 1], got {self.delta}")

    @property
    def label(self) -> str:
        return f"greedy:delta={self.delta:g}"


@dataclass(frozen=True)
class GreedyUniform:
    @property
    def label(self) -> str:
        return "greedy-uniform"


PolicySpec = Union[Samp, Greedy, GreedyUniform]


def parse_policy(text: str) -> PolicySpec:
    """Parse ``samp:eta=0.8,alpha=1,removal=seq``, ``greedy:delta=0.4`` or ``greedy-uniform``."""
    name, _, rest = text.strip().partition(":")
    params: dict[str, str] = {}
    if rest:
        for part in rest.split(","):
            key, eq, value = part.partition("=")
            if not eq:
                raise ValueError(f"malformed policy parameter {part!r} in {text!r}")
            params[key.strip()] = value.strip()
    try:
        if name == "samp":
            unknown = set(params) - {"eta", "alpha", "removal"}
            if unknown:
                raise ValueError(f"unknown SAMP parameters {sorted(unknown)}")
            return Samp(
                eta=float(params.get("eta", 1.0)),
                alpha=float(params.get("alpha", 1.0)),
                removal=RemovalMode(params.get("removal", "all")),
            )
        if name == "greedy":
            if set(params) != {"delta"}:
                raise ValueError("greedy takes exactly one parameter, delta")
            return Greedy(float(params["delta"]))
        if name in ("greedy-uniform", "greedy_uniform") and not params:
            return GreedyUniform()
    except ValueError as exc:
        raise ValueError(f"bad policy {text!r}: {exc}") from None
    raise ValueError(f"unknown policy {text!r}")


# -- randomized rounding -------------------------------------------------------


def rd_distribution(x: float) -> tuple[tuple[int, float], tuple[int, float]]:
    """The two-point law of RD(x) as ((⌊x⌋, 1 - frac), (⌈x⌉, frac))."""
    lo = math.floor(x)
    frac = x - lo
    return (lo, 1.0 - frac), (lo + 1, frac)


def rd_round(x: float, rng: np.random.Generator) -> int:
    """⌈x⌉ with probability x - ⌊x⌋, else ⌊x⌋. Always consumes one uniform."""
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"rd_round needs a finite non-negative value, got {x}")
    lo = math.floor(x)
    return lo + 1 if rng.random() < x - lo else lo


# -- Phase I -------------------------------------------------------------------


@dataclass
class PhaseOnePlan:
    copies: list[int]
    total_cost: list[float]
    sampled: list[int] = field(default_factory=list)


def _consumption(instance: Instance, copies) -> list[float]:
    use = [0.0] * len(instance.resources)
    for e, n in zip(instance.edges_phase1, copies):
        if n:
            for k, a in e.cost_items:
                use[k] += a * n
    return use


def samp_phase1(
    solution: LpSolution,
    eta: float,
    removal: RemovalMode,
    instance: Instance,
    rng: np.random.Generator,
) -> PhaseOnePlan:
    """Round η·x*_e per edge, then repair budget overruns."""
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    sampled = [rd_round(eta * float(x), rng) for x in solution.x]
    copies = repair(instance, sampled, removal)
    return PhaseOnePlan(copies=copies, total_cost=_consumption(instance, copies), sampled=sampled)


def repair(instance: Instance, sampled, removal: RemovalMode) -> list[int]:
    budgets = instance.budgets
    edges = instance.edges_phase1
    copies = list(sampled)
    use = _consumption(instance, copies)
    over = {k for k, u in enumerate(use) if u > budgets[k] + SAFETY_TOL}
    if not over:
        return copies
    if removal is RemovalMode.ALL_COPIES:
        # one simultaneous pass over the initial overrun set
        for i, e in enumerate(edges):
            if copies[i] and any(k in over for k in e.cost):
                copies[i] = 0
        return copies
    while over:
        best, best_score = -1, -1.0
        for i, e in enumerate(edges):
            if not copies[i]:
                continue
            contrib = sum(a for k, a in e.cost_items if k in over)
            if contrib <= 0:
                continue
            score = contrib / e.weight
            if score > best_score:
                best, best_score = i, score
        copies[best] -= 1
        for k, a in edges[best].cost_items:
            use[k] -= a
        over = {k for k in over if use[k] > budgets[k] + SAFETY_TOL}
    return copies


def greedy_phase1(instance: Instance, delta: float) -> PhaseOnePlan:
    """Take copies in decreasing weight order while they fit within δ·B."""
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    cap = BudgetLedger([delta * b for b in instance.budgets])
    es = instance.edges_phase1
    copies = [0] * len(es)
    for i in sorted(range(len(es)), key=lambda i: (-es[i].weight, es[i].id)):
        e = es[i]
        if not e.cost_items:
            raise ValueError(f"Phase-I edge {e.id} has no cost; greedy would take it forever")
        n = min(math.floor((cap.remaining[k] + SAFETY_TOL) / a) for k, a in e.cost_items)
        if n > 0:
            cap.debit(e, n)
            copies[i] = n
    return PhaseOnePlan(copies=copies, total_cost=_consumption(instance, copies), sampled=list(copies))


# -- Phase II ------------------------------------------------------------------


class SampSampler:
    """Per-(type, round) candidate edges with cumulative α·y*/p probabilities."""

    def __init__(self, instance: Instance, solution: LpSolution, alpha: float):
        if not 0 < alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.instance = instance
        self.solution = solution
        self.alpha = alpha
        self._cache: dict[tuple[int, int], tuple[tuple[int, ...], tuple[float, ...]]] = {}

    def candidates(self, j: int, t: int):
        key = (j, 0 if self.solution.aggregated else t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p = self.instance.arrivals.prob(j, t)
        if p <= 0:
            raise ContractViolation(f"type {j} cannot arrive at round {t} (p = 0)")
        edges = self.instance.phase2_by_type[j]
        cum, total = [], 0.0
        for e in edges:
            total += self.alpha * max(self.solution.y_star(e, t), 0.0) / p
            cum.append(total)
        if total > 1 + SUM_TOL:
            raise ContractViolation(f"sampling probabilities for type {j} at round {t} sum to {total}")
        hit = self._cache[key] = (edges, tuple(cum))
        return hit

    def draw(self, j: int, t: int, u: float) -> int | None:
        edges, cum = self.candidates(j, t)
        for e, c in zip(edges, cum):
            if u < c:
                return e
        return None


def samp_phase2_decide(
    solution: LpSolution,
    alpha: float,
    arrival: tuple[int, int],
    ledger: BudgetLedger,
    instance: Instance,
    rng: np.random.Generator,
    sampler: SampSampler | None = None,
) -> int | None:
    """Sample at most one edge of E²_j and keep it iff safe. Returns its position or None."""
    j, t = arrival
    if sampler is None:
        sampler = SampSampler(instance, solution, alpha)
    e = sampler.draw(j, t, rng.random())
    if e is None:
        return None
    edge = instance.edges_phase2[e]
    if not ledger.is_safe(edge):
        return None
    ledger.debit(edge)
    return e


def greedy_order(instance: Instance) -> tuple[tuple[int, ...], ...]:
    """E²_j sorted by decreasing weight, ties by ascending edge id."""
    es = instance.edges_phase2
    return tuple(
        tuple(sorted(group, key=lambda i: (-es[i].weight, es[i].id))) for group in instance.phase2_by_type
    )


def greedy_phase2_decide(
    arrival: tuple[int, int],
    ledger: BudgetLedger,
    instance: Instance,
    order: tuple[tuple[int, ...], ...] | None = None,
) -> int | None:
    j, _ = arrival
    if order is None:
        order = greedy_order(instance)
    for e in order[j]:
        edge = instance.edges_phase2[e]
        if ledger.is_safe(edge):
            ledger.debit(edge)
            return e
    return None


def greedy_uniform(instance: Instance, rng) -> Greedy:
    return Greedy(float(rng.random()))


# -- guarantees ----------------------------------------------------------------


class VacuousBound(ValueError):
    pass


@dataclass(frozen=True)
class GuaranteeReport:
    ell1: int
    ell2: int
    B: float | None
    epsilon: float
    ratio_lower_bound: float

    @property
    def eta(self) -> float:
        return 1.0 / (2 * (self.ell1 + self.ell2))


def guarantee(ell1: int, ell2: int, B: float | None = None) -> GuaranteeReport:
    """Competitive-ratio floor of SAMP with η = α = 1/(2ℓ)."""
    if ell1 < 0 or ell2 < 0 or ell1 + ell2 == 0:
        raise ValueError("sparsities must be non-negative and not both zero")
    ell = ell1 + ell2
    if ell2 == 0:
        return GuaranteeReport(ell1, ell2, B, 0.0, 1.0 / (4 * ell))
    if B is None:
        raise ValueError("a non-integral budget B is required when ell2 > 0")
    if B <= 2:
        raise VacuousBound(f"bound vacuous for B = {B} <= 2")
    eps = 2 * max(1 / (B - 2), ell2 * math.exp(-B / 12 + 1 / 6))
    ratio = min(max((1 - eps) / (4 * ell), 0.0), 1.0)
    return GuaranteeReport(ell1, ell2, B, eps, ratio)


def phase1_copy_factor(eta: float, ell: int) -> float:
    """Per-edge Phase-I factor: E[X_e] >= η(1-η)^ℓ x*_e."""
    return eta * (1 - eta) ** ell


def phase2_selection_factor(eta: float, alpha: float, ell: int) -> float:
    """Per-edge Phase-II factor: E[Y_{e,t}] >= α(1 - ℓ·max(η, α)) y*_{e,t}."""
    return alpha * (1 - ell * max(eta, alpha))
