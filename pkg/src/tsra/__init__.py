"""Two-stage resource allocation: benchmark LP, SAMP and greedy policies, simulation."""

from .core import (
    ArrivalModel,
    EdgeSpec,
    Instance,
    Resource,
    ResourceKind,
    Side,
    min_nonintegral_budget,
    sparsities,
    validate,
)
from .ledger import BudgetLedger
from .lpbench import LpProblem, LpSolution, build_benchmark, solve, solve_instance
from .policy import Greedy, GreedyUniform, RemovalMode, Samp, guarantee, parse_policy, rd_round
from .sim import EvalReport, brute_force_offline_opt, evaluate, run_episode

__version__ = "0.1.0"
