"""Two-stage resource allocation instances.

An instance couples an offline bipartite graph (I, H) whose edges are chosen in
Phase I with an online graph (I, J) whose vertices arrive one per round during
Phase II. Both phases draw on the same resource budgets.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

PROB_TOL = 1e-9


class ResourceKind(str, enum.Enum):
    INTEGRAL = "integral"
    NON_INTEGRAL = "non_integral"


class Side(str, enum.Enum):
    PHASE_ONE = "phase1"
    PHASE_TWO = "phase2"


@dataclass(frozen=True)
class Resource:
    id: int
    kind: ResourceKind
    budget: float


@dataclass(frozen=True)
class EdgeSpec:
    """One assignment type.

    ``offline`` indexes I; ``other`` indexes H for Phase-I edges and J for
    Phase-II edges. ``cost`` maps resource id to consumption in (0, 1].
    """

    id: int
    side: Side
    offline: int
    other: int
    weight: float
    cost: Mapping[int, float] = field(default_factory=dict)

    @cached_property
    def cost_items(self) -> tuple[tuple[int, float], ...]:
        return tuple(sorted(self.cost.items()))


@dataclass(frozen=True)
class ArrivalModel:
    """Per-round arrival distributions over online types.

    ``table`` has one row per round, or a single shared row when ``iid`` is set.
    """

    horizon: int
    table: tuple[tuple[float, ...], ...]
    iid: bool = False

    @classmethod
    def from_iid(cls, probs: Sequence[float], horizon: int) -> "ArrivalModel":
        return cls(horizon=horizon, table=(tuple(float(p) for p in probs),), iid=True)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "ArrivalModel":
        return cls(horizon=len(rows), table=tuple(tuple(float(p) for p in r) for r in rows))

    @property
    def n_types(self) -> int:
        return len(self.table[0]) if self.table else 0

    def row(self, t: int) -> tuple[float, ...]:
        return self.table[0] if self.iid else self.table[t]

    def prob(self, j: int, t: int) -> float:
        return self.row(t)[j]

    @property
    def is_time_invariant(self) -> bool:
        return self.iid or all(r == self.table[0] for r in self.table)


@dataclass(frozen=True)
class Instance:
    n_offline: int
    n_phase1: int
    n_online: int
    resources: tuple[Resource, ...]
    edges_phase1: tuple[EdgeSpec, ...]
    edges_phase2: tuple[EdgeSpec, ...]
    arrivals: ArrivalModel

    @property
    def horizon(self) -> int:
        return self.arrivals.horizon

    @property
    def budgets(self) -> tuple[float, ...]:
        return tuple(r.budget for r in self.resources)

    @cached_property
    def phase2_by_type(self) -> tuple[tuple[int, ...], ...]:
        """Positions in ``edges_phase2`` grouped by online type (E²_j)."""
        groups: list[list[int]] = [[] for _ in range(self.n_online)]
        for pos, e in enumerate(self.edges_phase2):
            if 0 <= e.other < self.n_online:
                groups[e.other].append(pos)
        return tuple(tuple(g) for g in groups)

    def integral_ids(self) -> set[int]:
        return {r.id for r in self.resources if r.kind is ResourceKind.INTEGRAL}


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


def validate(instance: Instance) -> list[Violation]:
    """Return every violated invariant; an empty list means the instance is valid."""
    out: list[Violation] = []

    def bad(code: str, msg: str) -> None:
        out.append(Violation(code, msg))

    kinds: dict[int, ResourceKind] = {}
    for pos, r in enumerate(instance.resources):
        if r.id != pos:
            bad("resource_id", f"resource at position {pos} has id {r.id}")
        kinds[r.id] = r.kind
        if not math.isfinite(r.budget) or r.budget < 0:
            bad("budget_negative", f"resource {r.id} has budget {r.budget}")
        elif r.kind is ResourceKind.INTEGRAL and r.budget != int(r.budget):
            bad("budget_integrality", f"integral resource {r.id} has budget {r.budget}")

    seen: set[int] = set()
    for side, edges, n_other in (
        (Side.PHASE_ONE, instance.edges_phase1, instance.n_phase1),
        (Side.PHASE_TWO, instance.edges_phase2, instance.n_online),
    ):
        for e in edges:
            if e.id in seen:
                bad("edge_id", f"duplicate edge id {e.id}")
            seen.add(e.id)
            if e.side is not side:
                bad("edge_side", f"edge {e.id} has side {e.side.value}, expected {side.value}")
            if not 0 <= e.offline < instance.n_offline:
                bad("endpoint", f"edge {e.id} offline endpoint {e.offline} out of range")
            if not 0 <= e.other < n_other:
                bad("endpoint", f"edge {e.id} endpoint {e.other} out of range")
            if not (math.isfinite(e.weight) and e.weight > 0):
                bad("weight", f"edge {e.id} has non-positive weight {e.weight}")
            for k, a in e.cost.items():
                if k not in kinds:
                    bad("cost_resource", f"edge {e.id} references unknown resource {k}")
                    continue
                if not (0 < a <= 1):
                    bad("cost_range", f"edge {e.id} cost {a} on resource {k} outside (0, 1]")
                elif kinds[k] is ResourceKind.INTEGRAL and a != 1:
                    bad("cost_integrality", f"edge {e.id} cost {a} on integral resource {k}")

    arr = instance.arrivals
    if arr.horizon < 1:
        bad("horizon", f"horizon {arr.horizon} < 1")
    expected_rows = 1 if arr.iid else arr.horizon
    if len(arr.table) != expected_rows:
        bad("arrival_shape", f"arrival table has {len(arr.table)} rows, expected {expected_rows}")
    for t, row in enumerate(arr.table):
        if len(row) != instance.n_online:
            bad("arrival_shape", f"round {t} lists {len(row)} types, expected {instance.n_online}")
        if any(not (0 <= p <= 1) for p in row):
            bad("arrival_range", f"round {t} has a probability outside [0, 1]")
        s = math.fsum(row)
        if abs(s - 1) > PROB_TOL:
            label = "all rounds" if arr.iid else f"round {t}"
            bad("arrival_normalization", f"probabilities at {label} sum to {s!r}")
    return out


def sparsities(instance: Instance) -> tuple[int, int]:
    """(ℓ₁, ℓ₂): max integral and non-integral cost-support sizes over all edges."""
    integral = instance.integral_ids()
    l1 = l2 = 0
    for e in (*instance.edges_phase1, *instance.edges_phase2):
        n1 = sum(1 for k, a in e.cost.items() if a > 0 and k in integral)
        n2 = sum(1 for k, a in e.cost.items() if a > 0 and k not in integral)
        l1, l2 = max(l1, n1), max(l2, n2)
    return l1, l2


def min_nonintegral_budget(instance: Instance) -> float | None:
    budgets = [r.budget for r in instance.resources if r.kind is ResourceKind.NON_INTEGRAL]
    return min(budgets) if budgets else None


def unbounded_phase1_edges(instance: Instance) -> list[int]:
    """Ids of Phase-I edges with no cost; nothing limits how often they are taken."""
    return [e.id for e in instance.edges_phase1 if not e.cost]


# -- serialization -----------------------------------------------------------


def _edge_to_dict(e: EdgeSpec) -> dict:
    return {
        "id": e.id,
        "offline": e.offline,
        "other": e.other,
        "weight": e.weight,
        "cost": {str(k): a for k, a in e.cost_items},
    }


def _edge_from_dict(d: Mapping, side: Side) -> EdgeSpec:
    return EdgeSpec(
        id=int(d["id"]),
        side=side,
        offline=int(d["offline"]),
        other=int(d["other"]),
        weight=float(d["weight"]),
        cost={int(k): float(a) for k, a in d.get("cost", {}).items()},
    )


def instance_to_dict(instance: Instance) -> dict:
    arr = instance.arrivals
    if arr.iid:
        arrivals = {"iid": {str(j): p for j, p in enumerate(arr.table[0])}, "horizon": arr.horizon}
    else:
        arrivals = {
            "general": [[t, j, p] for t, row in enumerate(arr.table) for j, p in enumerate(row) if p != 0],
            "horizon": arr.horizon,
        }
    return {
        "n_offline": instance.n_offline,
        "n_phase1": instance.n_phase1,
        "n_online": instance.n_online,
        "resources": [{"id": r.id, "kind": r.kind.value, "budget": r.budget} for r in instance.resources],
        "edges_phase1": [_edge_to_dict(e) for e in instance.edges_phase1],
        "edges_phase2": [_edge_to_dict(e) for e in instance.edges_phase2],
        "arrivals": arrivals,
    }


def instance_from_dict(d: Mapping) -> Instance:
    resources = tuple(
        Resource(int(r["id"]), ResourceKind(r["kind"]), float(r["budget"])) for r in d["resources"]
    )
    e1 = tuple(_edge_from_dict(e, Side.PHASE_ONE) for e in d["edges_phase1"])
    e2 = tuple(_edge_from_dict(e, Side.PHASE_TWO) for e in d["edges_phase2"])
    a = d["arrivals"]
    horizon = int(a["horizon"])
    if "iid" in a:
        n_online = int(d.get("n_online", 1 + max((int(j) for j in a["iid"]), default=-1)))
        probs = [0.0] * n_online
        for j, p in a["iid"].items():
            probs[int(j)] = float(p)
        arrivals = ArrivalModel.from_iid(probs, horizon)
    else:
        triples = [(int(t), int(j), float(p)) for t, j, p in a["general"]]
        n_online = int(d.get("n_online", 1 + max((j for _, j, _ in triples), default=-1)))
        rows = [[0.0] * n_online for _ in range(horizon)]
        for t, j, p in triples:
            rows[t][j] = p
        arrivals = ArrivalModel.from_rows(rows)
    n_offline = d.get("n_offline")
    if n_offline is None:
        n_offline = 1 + max((e.offline for e in (*e1, *e2)), default=-1)
    n_phase1 = d.get("n_phase1")
    if n_phase1 is None:
        n_phase1 = 1 + max((e.other for e in e1), default=-1)
    return Instance(
        n_offline=int(n_offline),
        n_phase1=int(n_phase1),
        n_online=n_online,
        resources=resources,
        edges_phase1=e1,
        edges_phase2=e2,
        arrivals=arrivals,
    )


def dumps(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=1) + "\n"


def loads(text: str) -> Instance:
    return instance_from_dict(json.loads(text))


def make_edges(
    specs: Iterable[tuple[int, int, float, Mapping[int, float]]], side: Side, start_id: int = 0
) -> tuple[EdgeSpec, ...]:
    """Build edges from (offline, other, weight, cost) tuples with consecutive ids."""
    return tuple(
        EdgeSpec(id=start_id + n, side=side, offline=i, other=o, weight=float(w), cost=dict(c))
        for n, (i, o, w, c) in enumerate(specs)
    )
