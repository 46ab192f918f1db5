"""Seeded random instances for experiments and verification."""

from __future__ import annotations

import numpy as np

from .core import ArrivalModel, EdgeSpec, Instance, Resource, ResourceKind, Side


def _arrivals(rng: np.random.Generator, n_types: int, horizon: int, iid: bool) -> ArrivalModel:
    def dist():
        p = rng.dirichlet(np.ones(n_types))
        if n_types > 1 and rng.random() < 0.25:
            p[rng.integers(n_types)] = 0.0
            p /= p.sum()
        return p.tolist()

    if iid:
        return ArrivalModel.from_iid(dist(), horizon)
    return ArrivalModel.from_rows([dist() for _ in range(horizon)])


def _support(rng, pool: list[int], size: int) -> list[int]:
    return sorted(int(k) for k in rng.choice(pool, size=size, replace=False))


def random_tiny_instance(seed: int) -> Instance:
    """|E¹|, |E²| <= 3, |J| <= 2, T <= 3, K <= 3, budgets <= 3; small enough for exact E[OPT]."""
    rng = np.random.default_rng(seed)
    K = int(rng.integers(1, 4))
    resources = []
    for k in range(K):
        if rng.random() < 0.5:
            resources.append(Resource(k, ResourceKind.INTEGRAL, float(rng.integers(0, 4))))
        else:
            resources.append(Resource(k, ResourceKind.NON_INTEGRAL, float(rng.choice([0.5, 1.0, 1.5, 2.0, 2.5, 3.0]))))
    n_i = int(rng.integers(1, 3))
    n_j = int(rng.integers(1, 3))
    T = int(rng.integers(1, 4))

    def cost(min_size: int) -> dict[int, float]:
        size = int(rng.integers(min_size, K + 1))
        out = {}
        for k in _support(rng, list(range(K)), size):
            out[k] = 1.0 if resources[k].kind is ResourceKind.INTEGRAL else float(rng.choice([0.5, 1.0]))
        return out

    e1 = [
        EdgeSpec(n, Side.PHASE_ONE, int(rng.integers(n_i)), 0, float(rng.uniform(0.1, 1.0)), cost(1))
        for n in range(int(rng.integers(0, 4)))
    ]
    e2 = [
        EdgeSpec(len(e1) + n, Side.PHASE_TWO, int(rng.integers(n_i)), int(rng.integers(n_j)),
                 float(rng.uniform(0.1, 1.0)), cost(0))
        for n in range(int(rng.integers(0, 4)))
    ]
    return Instance(n_i, 1, n_j, tuple(resources), tuple(e1), tuple(e2), _arrivals(rng, n_j, T, rng.random() < 0.5))


def random_integral_instance(seed: int, ell: int) -> Instance:
    """All-integral instance whose sparsity is exactly ``ell``."""
    rng = np.random.default_rng(seed)
    K = ell + int(rng.integers(1, 3))
    resources = tuple(Resource(k, ResourceKind.INTEGRAL, float(rng.integers(1, 5))) for k in range(K))
    n_i = int(rng.integers(2, 5))
    n_h = int(rng.integers(1, 3))
    n_j = int(rng.integers(2, 4))
    T = int(rng.integers(3, 7))

    def cost(force_full: bool) -> dict[int, float]:
        size = ell if force_full else int(rng.integers(1, ell + 1))
        return {k: 1.0 for k in _support(rng, list(range(K)), size)}

    n1 = int(rng.integers(2, 5))
    n2 = int(rng.integers(3, 7))
    e1 = [
        EdgeSpec(n, Side.PHASE_ONE, int(rng.integers(n_i)), int(rng.integers(n_h)),
                 float(rng.uniform(0.2, 1.0)), cost(n == 0))
        for n in range(n1)
    ]
    e2 = [
        EdgeSpec(n1 + n, Side.PHASE_TWO, int(rng.integers(n_i)), n % n_j,
                 float(rng.uniform(0.2, 1.0)), cost(n == 0))
        for n in range(n2)
    ]
    return Instance(n_i, n_h, n_j, resources, tuple(e1), tuple(e2), _arrivals(rng, n_j, T, rng.random() < 0.5))


def random_mixed_instance(seed: int, min_budget: float = 60.0) -> Instance:
    """Sparsity (2, 1): each edge uses two integral resources and one shared real budget >= ``min_budget``."""
    rng = np.random.default_rng(seed)
    n_int = int(rng.integers(4, 7))
    resources = [Resource(k, ResourceKind.INTEGRAL, float(rng.integers(15, 40))) for k in range(n_int)]
    g = n_int
    resources.append(Resource(g, ResourceKind.NON_INTEGRAL, float(rng.uniform(min_budget, 1.5 * min_budget))))
    n_i = int(rng.integers(4, 8))
    n_j = int(rng.integers(3, 6))
    T = int(rng.integers(150, 250))
    task_res = [_support(rng, list(range(n_int)), 2) for _ in range(n_i)]
    weights = rng.uniform(0.1, 1.0, size=n_i)

    def edge(eid: int, side: Side, i: int, other: int, price: float) -> EdgeSpec:
        a, b = task_res[i]
        return EdgeSpec(eid, side, i, other, float(weights[i]), {a: 1.0, b: 1.0, g: price})

    e1 = [edge(i, Side.PHASE_ONE, i, 0, 1.0) for i in range(n_i)]
    e2 = []
    for j in range(n_j):
        for i in _support(rng, list(range(n_i)), int(rng.integers(1, n_i + 1))):
            e2.append(edge(n_i + len(e2), Side.PHASE_TWO, i, j, float(rng.uniform(0.2, 0.8))))
    return Instance(n_i, 1, n_j, tuple(resources), tuple(e1), tuple(e2), _arrivals(rng, n_j, T, True))
