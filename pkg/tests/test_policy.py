import math

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import make_instance
from tsra.generators import random_integral_instance
from tsra.ledger import BudgetLedger
from tsra.lpbench import LpSolution, solve_instance
from tsra.policy import (
    ContractViolation,
    Greedy,
    GreedyUniform,
    RemovalMode,
    Samp,
    SampSampler,
    VacuousBound,
    greedy_phase1,
    greedy_phase2_decide,
    greedy_uniform,
    guarantee,
    phase1_copy_factor,
    phase2_selection_factor,
    parse_policy,
    rd_distribution,
    rd_round,
    repair,
    samp_phase1,
    samp_phase2_decide,
)
from tsra.sim import EpisodeRunner


def fixed_solution(x=(), y=(), horizon=1):
    """LP solution with hand-set values, one aggregated column per Phase-II edge."""
    y = np.asarray(y, float).reshape(-1, 1)
    x = np.asarray(x, float)
    return LpSolution(x, y, 0.0, horizon, True, np.concatenate([x, y[:, 0] * horizon]))


class StubRng:
    def __init__(self, value):
        self.value = value

    def random(self):
        return self.value


# -- rounding ------------------------------------------------------------------


def test_rd_round_integer_is_exact():
    rng = np.random.default_rng(0)
    assert {rd_round(4.0, rng) for _ in range(100)} == {4}


def test_rd_round_two_point_law():
    assert rd_distribution(2.3)[0] == (2, pytest.approx(0.7))
    assert rd_distribution(2.3)[1] == (3, pytest.approx(0.3))
    rng = np.random.default_rng(1)
    draws = [rd_round(2.3, rng) for _ in range(20_000)]
    assert set(draws) == {2, 3}
    assert np.mean(np.array(draws) == 3) == pytest.approx(0.3, abs=0.015)


def test_rd_round_mean_half():
    rng = np.random.default_rng(2)
    draws = [rd_round(0.5, rng) for _ in range(10**6)]
    assert abs(np.mean(draws) - 0.5) <= 0.002


@pytest.mark.parametrize("bad", [-0.1, math.inf, math.nan])
def test_rd_round_rejects(bad):
    with pytest.raises(ValueError):
        rd_round(bad, np.random.default_rng(0))


@given(st.floats(0, 1e6, allow_nan=False))
def test_rd_distribution_is_unbiased(x):
    (lo, p_lo), (hi, p_hi) = rd_distribution(x)
    assert hi == lo + 1 and p_lo + p_hi == pytest.approx(1.0)
    assert lo * p_lo + hi * p_hi == pytest.approx(x, rel=1e-12, abs=1e-9)


# -- Phase I -------------------------------------------------------------------


def test_samp_phase1_integral_x_no_removal():
    inst = make_instance([("int", 5)], e1=[(0, 0, 1.0, {0: 1.0})])
    plan = samp_phase1(fixed_solution(x=[2.0]), 1.0, RemovalMode.ALL_COPIES, inst, np.random.default_rng(0))
    assert plan.copies == [2] and plan.total_cost == [2.0]


def test_removal_modes_on_shared_unit_budget():
    inst = make_instance([("int", 1)], e1=[(0, 0, 1.0, {0: 1.0}), (0, 0, 2.0, {0: 1.0})])
    assert repair(inst, [1, 1], RemovalMode.ALL_COPIES) == [0, 0]
    seq = repair(inst, [1, 1], RemovalMode.SEQUENTIAL)
    assert sum(seq) == 1
    # the lighter edge has the larger cost-to-weight ratio
    assert seq == [0, 1]


def test_sequential_tie_goes_to_lowest_position():
    inst = make_instance([("int", 1)], e1=[(0, 0, 1.0, {0: 1.0}), (0, 0, 1.0, {0: 1.0})])
    assert repair(inst, [1, 1], RemovalMode.SEQUENTIAL) == [0, 1]


def test_all_copies_leaves_untouched_resources():
    inst = make_instance(
        [("int", 1), ("int", 3)],
        e1=[(0, 0, 1.0, {0: 1.0}), (0, 0, 1.0, {0: 1.0, 1: 1.0}), (0, 0, 1.0, {1: 1.0})],
    )
    assert repair(inst, [1, 1, 2], RemovalMode.ALL_COPIES) == [0, 0, 2]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000), st.data())
def test_sequential_dominates_all_copies(seed, data):
    inst = random_integral_instance(seed, 1 + seed % 3)
    sampled = data.draw(st.lists(st.integers(0, 4), min_size=len(inst.edges_phase1), max_size=len(inst.edges_phase1)))
    a = repair(inst, sampled, RemovalMode.ALL_COPIES)
    s = repair(inst, sampled, RemovalMode.SEQUENTIAL)
    assert all(si >= ai for si, ai in zip(s, a))
    for copies in (a, s):
        assert all(0 <= c <= n for c, n in zip(copies, sampled))
        use = np.zeros(len(inst.resources))
        for e, n in zip(inst.edges_phase1, copies):
            for k, c in e.cost_items:
                use[k] += c * n
        assert np.all(use <= np.array(inst.budgets) + 1e-9)


def test_phase1_copy_floor_monte_carlo():
    # three edges on one unit resource, so sparsity 1
    inst = make_instance(
        [("int", 1)], e1=[(0, 0, 1.0, {0: 1.0}), (0, 0, 0.8, {0: 1.0}), (0, 0, 0.5, {0: 1.0})]
    )
    sol = fixed_solution(x=[0.5, 0.3, 0.2])
    eta, runs = 0.5, 100_000
    rng = np.random.default_rng(3)
    counts = np.array([samp_phase1(sol, eta, RemovalMode.ALL_COPIES, inst, rng).copies for _ in range(runs)])
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(runs)
    floor = phase1_copy_factor(eta, 1) * sol.x
    assert np.all(mean >= floor - 3 * se)


# -- Phase II ------------------------------------------------------------------


def test_phase2_sampling_probability():
    inst = make_instance([("int", 5)], e2=[(0, 0, 1.0, {0: 1.0})], probs=(0.5, 0.5), horizon=1)
    sol = fixed_solution(y=[0.3])
    sampler = SampSampler(inst, sol, 1.0)
    assert sampler.draw(0, 0, 0.599) == 0
    assert sampler.draw(0, 0, 0.601) is None
    rng = np.random.default_rng(4)
    n = 20_000
    hits = sum(
        samp_phase2_decide(sol, 1.0, (0, 0), BudgetLedger([5.0]), inst, rng, sampler) == 0 for _ in range(n)
    )
    assert hits / n == pytest.approx(0.6, abs=0.015)


def test_phase2_unsafe_candidate_is_rejected():
    inst = make_instance([("real", 1.0)], e2=[(0, 0, 1.0, {0: 0.8})])
    ledger = BudgetLedger([0.5])
    e = samp_phase2_decide(fixed_solution(y=[1.0]), 1.0, (0, 0), ledger, inst, StubRng(0.0))
    assert e is None and ledger.remaining == [0.5]


def test_phase2_debits_on_selection():
    inst = make_instance([("real", 1.0)], e2=[(0, 0, 1.0, {0: 0.8})])
    ledger = BudgetLedger([1.0])
    assert samp_phase2_decide(fixed_solution(y=[1.0]), 1.0, (0, 0), ledger, inst, StubRng(0.0)) == 0
    assert ledger.remaining[0] == pytest.approx(0.2)


def test_phase2_contract_violations():
    inst = make_instance([("int", 5)], e2=[(0, 0, 1.0, {0: 1.0}), (0, 0, 1.0, {0: 1.0})], probs=(0.5, 0.5))
    with pytest.raises(ContractViolation):
        SampSampler(inst, fixed_solution(y=[0.4, 0.3]), 1.0).candidates(0, 0)
    zero = make_instance([("int", 5)], e2=[(0, 1, 1.0, {0: 1.0})], probs=(1.0, 0.0))
    with pytest.raises(ContractViolation):
        SampSampler(zero, fixed_solution(y=[0.0]), 1.0).candidates(1, 0)


def test_phase2_selection_floor_monte_carlo():
    inst = make_instance(
        [("int", 2)],
        e1=[(0, 0, 1.0, {0: 1.0})],
        e2=[(0, 0, 0.9, {0: 1.0}), (0, 1, 0.6, {0: 1.0})],
        probs=(0.6, 0.4),
        horizon=3,
    )
    sol = solve_instance(inst)
    eta = alpha = 0.5
    runner = EpisodeRunner(inst, Samp(eta, alpha), sol)
    runs = 100_000
    picks = np.zeros((runs, 2, 3))
    for i in range(runs):
        for t, _, e in runner.run(i).phase2_selections:
            if e is not None:
                picks[i, e, t] = 1
    mean = picks.mean(axis=0)
    se = picks.std(axis=0, ddof=1) / math.sqrt(runs)
    floor = phase2_selection_factor(eta, alpha, 1) * np.repeat(sol.y, 3, axis=1)
    assert np.all(mean >= floor - 3 * se)


# -- Greedy --------------------------------------------------------------------


def test_greedy_phase1_prefers_heavier_edge():
    inst = make_instance([("int", 1)], e1=[(0, 0, 2.0, {0: 1.0}), (0, 0, 3.0, {0: 1.0})])
    assert greedy_phase1(inst, 1.0).copies == [0, 1]


def test_greedy_phase1_zero_delta():
    inst = make_instance([("int", 4)], e1=[(0, 0, 2.0, {0: 1.0})])
    assert greedy_phase1(inst, 0.0).copies == [0]


def test_greedy_phase1_skips_blocked_edge():
    inst = make_instance([("int", 0), ("int", 2)], e1=[(0, 0, 3.0, {0: 1.0}), (0, 0, 2.0, {1: 1.0})])
    assert greedy_phase1(inst, 1.0).copies == [0, 2]


def test_greedy_phase1_rejects_free_edge():
    with pytest.raises(ValueError):
        greedy_phase1(make_instance([("int", 1)], e1=[(0, 0, 1.0, {})]), 0.5)


def test_greedy_phase2_examples():
    inst = make_instance([("int", 1), ("int", 1)], e2=[(0, 0, 4.0, {1: 1.0}), (0, 0, 5.0, {0: 1.0})])
    ledger = BudgetLedger([1.0, 1.0])
    assert greedy_phase2_decide((0, 0), ledger, inst) == 1
    assert greedy_phase2_decide((0, 1), ledger, inst) == 0
    assert greedy_phase2_decide((0, 2), ledger, inst) is None
    assert ledger.remaining == [0.0, 0.0]


def test_greedy_uniform_boundaries():
    inst = make_instance([("int", 1)])
    assert greedy_uniform(inst, StubRng(0.0)) == Greedy(0.0)
    assert greedy_uniform(inst, StubRng(1.0)) == Greedy(1.0)
    rng = np.random.default_rng(5)
    qs = [greedy_uniform(inst, rng).delta for _ in range(100_000)]
    assert abs(np.mean(qs) - 0.5) <= 0.005


# -- guarantees ----------------------------------------------------------------


def test_guarantee_examples():
    assert guarantee(2, 0).ratio_lower_bound == 0.125
    assert guarantee(1, 0).ratio_lower_bound == 0.25
    g = guarantee(2, 1, 100.0)
    assert g.epsilon == pytest.approx(2 / 98)
    assert g.ratio_lower_bound == pytest.approx((1 - 2 / 98) / 12)
    assert g.ratio_lower_bound == pytest.approx(0.081633, abs=1e-6)


def test_guarantee_small_budget():
    with pytest.raises(VacuousBound):
        guarantee(1, 1, 2.0)
    with pytest.raises(ValueError):
        guarantee(1, 1)
    with pytest.raises(ValueError):
        guarantee(0, 0)
    assert guarantee(1, 1, 3.0).ratio_lower_bound == 0.0


@given(st.integers(0, 5), st.integers(0, 5), st.floats(2.001, 1e4))
def test_guarantee_in_unit_interval(l1, l2, B):
    if l1 + l2 == 0:
        return
    r = guarantee(l1, l2, B).ratio_lower_bound
    assert 0.0 <= r <= 1.0


def test_per_edge_factors():
    assert phase1_copy_factor(0.25, 2) == pytest.approx(0.25 * 0.75**2)
    assert phase2_selection_factor(0.5, 0.5, 1) == pytest.approx(0.25)


# -- parsing -------------------------------------------------------------------


def test_parse_policy():
    assert parse_policy("samp:eta=0.8,alpha=1.0,removal=seq") == Samp(0.8, 1.0, RemovalMode.SEQUENTIAL)
    assert parse_policy("samp:eta=1,alpha=1") == Samp()
    assert parse_policy("greedy:delta=0.4") == Greedy(0.4)
    assert parse_policy("greedy-uniform") == GreedyUniform()
    for bad in ("samp:eta=0", "greedy:delta=1.5", "greedy", "foo", "samp:eta", "samp:gamma=1"):
        with pytest.raises(ValueError):
            parse_policy(bad)


@given(
    st.sampled_from([0.1, 0.25, 0.5, 0.8, 1.0]),
    st.sampled_from([0.1, 0.5, 1.0]),
    st.sampled_from(list(RemovalMode)),
)
def test_labels_round_trip(eta, alpha, removal):
    spec = Samp(eta, alpha, removal)
    assert parse_policy(spec.label) == spec
    assert parse_policy(Greedy(eta).label) == Greedy(eta)
