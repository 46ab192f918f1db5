from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tsra.core import ArrivalModel, Instance, Resource, ResourceKind, Side, make_edges  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def make_instance(resources, e1=(), e2=(), probs=(1.0,), horizon=1, rows=None, n_offline=None, n_phase1=1):
    """Small instance from terse specs.

    ``resources``: [(kind, budget)] with kind "int" or "real".
    ``e1``/``e2``: [(offline, other, weight, {resource: cost})].
    """
    res = tuple(
        Resource(k, ResourceKind.INTEGRAL if kind == "int" else ResourceKind.NON_INTEGRAL, float(b))
        for k, (kind, b) in enumerate(resources)
    )
    edges1 = make_edges(e1, Side.PHASE_ONE)
    edges2 = make_edges(e2, Side.PHASE_TWO, start_id=len(edges1))
    arrivals = ArrivalModel.from_rows(rows) if rows is not None else ArrivalModel.from_iid(probs, horizon)
    if n_offline is None:
        n_offline = 1 + max((e[0] for e in (*e1, *e2)), default=0)
    return Instance(n_offline, n_phase1, arrivals.n_types, res, edges1, edges2, arrivals)


@pytest.fixture
def example1():
    """One truck edge (w=2) and one online edge (w=1) sharing a unit resource, T=1, p=1."""
    return make_instance([("int", 1)], e1=[(0, 0, 2.0, {0: 1.0})], e2=[(0, 0, 1.0, {0: 1.0})])


@pytest.fixture
def single_online():
    """One online edge w=1, p=1, T=1, ample budget."""
    return make_instance([("int", 5)], e2=[(0, 0, 1.0, {0: 1.0})])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
