"""Command-line front end: ``tsra {gen,lp,simulate,sweep,oracle}``.

Exit codes: 0 ok, 1 internal error, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import bikeshare, core
from .lpbench import LpError, build_benchmark, lp_upper_bound_check, solve
from .policy import PolicySpec, parse_policy
from .sim import CSV_COLUMNS, EnumerationTooLarge, brute_force_offline_opt, evaluate, reports_to_csv

log = logging.getLogger("tsra")

SWEEP_PARAMETERS = ("lambda", "gamma", "beta", "kappa")
DEFAULT_POLICIES = (
    "samp:eta=1,alpha=1",
    "samp:eta=0.8,alpha=1",
    "greedy:delta=0.2",
    "greedy:delta=0.4",
    "greedy:delta=0.6",
    "greedy:delta=0.8",
    "greedy:delta=1",
    "greedy-uniform",
)


class BadInput(Exception):
    pass


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple[float, ...]
    policies: tuple[PolicySpec, ...]
    episodes: int
    base_seed: int

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"cannot sweep {self.parameter!r}; choose from {SWEEP_PARAMETERS}")
        if not self.values:
            raise ValueError("sweep needs at least one value")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("sweep values must be strictly increasing")
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")


# -- helpers ------------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _shape(text: str) -> tuple[int, int, int, int]:
    parts = tuple(int(v) for v in text.split(","))
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("shape is supplying,demanding,worker_types,horizon")
    return parts


def _load_instance(path: str) -> core.Instance:
    try:
        inst = core.loads(Path(path).read_text())
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise BadInput(f"cannot read instance {path}: {exc}") from None
    problems = core.validate(inst)
    if problems:
        raise BadInput(f"{path} is not a valid instance: " + "; ".join(v.message for v in problems[:5]))
    return inst


def _config(args) -> bikeshare.BikeShareConfig:
    return bikeshare.BikeShareConfig(
        num_sites=args.num_sites,
        top_k=args.top_k,
        lam=args.lam,
        gamma=args.gamma,
        beta=args.beta,
        rho=args.rho,
        tau=args.tau,
        kappa=args.kappa,
        weight_seed=args.weight_seed,
    )


def _source(args):
    """A function config -> Instance for the chosen instance source."""
    if args.trips:
        trips, summary = bikeshare.read_trips(args.trips)
        log.info("%s: %s", args.trips, summary)
        return lambda cfg: bikeshare.build_instance(trips, cfg, seed=args.seed)
    if args.synthetic:
        return lambda cfg: bikeshare.synthetic_instance(args.shape, cfg, seed=args.seed)
    raise BadInput("choose an instance source: --trips CSV or --synthetic --shape a,b,c,T")


def _table(reports, fmt: str, prefix_columns=(), prefixes=None) -> str:
    if fmt == "json":
        rows = []
        for n, r in enumerate(reports):
            row = dict(zip(prefix_columns, prefixes[n])) if prefixes else {}
            row.update(zip(CSV_COLUMNS, (r.policy, r.episodes, r.mean_reward, r.std_error, r.lp_objective, r.competitive_ratio)))
            rows.append(row)
        return json.dumps(rows, indent=1) + "\n"
    return reports_to_csv(reports, tuple(prefix_columns), prefixes)


def _summary(inst: core.Instance) -> str:
    l1, l2 = core.sparsities(inst)
    return (
        f"sparsities=({l1},{l2}) |E1|={len(inst.edges_phase1)} |E2|={len(inst.edges_phase2)} "
        f"T={inst.horizon} budgets={[round(b, 6) for b in inst.budgets]}"
    )


# -- commands -----------------------------------------------------------------


def cmd_gen(args) -> None:
    inst = _source(args)(_config(args))
    problems = core.validate(inst)
    if problems:
        raise RuntimeError("generator produced an invalid instance: " + problems[0].message)
    _emit(core.dumps(inst), args.out)
    print(_summary(inst), file=sys.stderr)


def lp_json(inst: core.Instance, sol) -> dict:
    y = {}
    for e, edge in enumerate(inst.edges_phase2):
        y[str(edge.id)] = float(sol.y[e, 0]) if sol.aggregated else [float(v) for v in sol.y[e]]
    return {
        "objective": sol.objective_value,
        "aggregated": sol.aggregated,
        "x": {str(edge.id): float(sol.x[e]) for e, edge in enumerate(inst.edges_phase1)},
        "y": y,
    }


def cmd_lp(args) -> None:
    inst = _load_instance(args.instance)
    sol = solve(build_benchmark(inst))
    _emit(json.dumps(lp_json(inst, sol), indent=1) + "\n", args.out)


def cmd_simulate(args) -> None:
    inst = _load_instance(args.instance)
    policies = [parse_policy(p) for p in args.policies]
    sol = solve(build_benchmark(inst))
    reports = [evaluate(inst, p, args.episodes, args.seed, sol) for p in policies]
    _emit(_table(reports, args.format), args.out)


def run_sweep(spec: SweepSpec, make_instance, base: bikeshare.BikeShareConfig):
    """Evaluate every policy at every parameter value. Returns (reports, prefixes, failures)."""
    reports, prefixes, failures = [], [], []
    for value in spec.values:
        try:
            inst = make_instance(base.with_param(spec.parameter, value))
            sol = solve(build_benchmark(inst))
            for p in spec.policies:
                reports.append(evaluate(inst, p, spec.episodes, spec.base_seed, sol))
                prefixes.append((repr(float(value)),))
        except (ValueError, LpError) as exc:
            failures.append((value, str(exc)))
            log.warning("%s=%r failed: %s", spec.parameter, value, exc)
    return reports, prefixes, failures


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        parameter=args.parameter,
        values=_floats(args.values),
        policies=tuple(parse_policy(p) for p in args.policies),
        episodes=args.episodes,
        base_seed=args.seed,
    )
    reports, prefixes, failures = run_sweep(spec, _source(args), _config(args))
    _emit(_table(reports, args.format, ("parameter_value",), prefixes), args.out)
    for value, msg in failures:
        print(f"sweep point {spec.parameter}={value} failed: {msg}", file=sys.stderr)
    return 2 if failures else 0


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    sol = solve(build_benchmark(inst))
    opt = brute_force_offline_opt(inst, args.max_enumeration)
    ok = lp_upper_bound_check(inst, sol, opt)
    result = {"lp_objective": sol.objective_value, "offline_opt": opt, "lp_upper_bound_holds": ok}
    if args.format == "json":
        text = json.dumps(result, indent=1) + "\n"
    else:
        text = "lp_objective,offline_opt,lp_upper_bound_holds\n" + f"{sol.objective_value!r},{opt!r},{ok}\n"
    _emit(text, args.out)
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("-v", "--verbose", action="store_true")

    source = argparse.ArgumentParser(add_help=False)
    g = source.add_argument_group("instance source")
    g.add_argument("--trips", help="Citibike-style trip CSV")
    g.add_argument("--synthetic", action="store_true", help="random instance of a given shape")
    g.add_argument("--shape", type=_shape, default=(4, 4, 16, 200), help="supplying,demanding,types,T")
    c = source.add_argument_group("instance parameters")
    c.add_argument("--lambda", dest="lam", type=float, default=1.5, help="truck cost per task")
    c.add_argument("--gamma", type=float, default=2.0, help="supply/demand scale")
    c.add_argument("--beta", type=float, default=1.0, help="arrival-rate scale")
    c.add_argument("--kappa", type=float, default=0.5, help="budget fraction")
    c.add_argument("--rho", type=float, default=0.2, help="basic payment rate")
    c.add_argument("--tau", type=float, default=None, help="walking threshold (default: median site distance)")
    c.add_argument("--num-sites", type=int, default=50)
    c.add_argument("--top-k", type=int, default=10)
    c.add_argument("--weight-seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="tsra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common, source], help="write an instance JSON")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("lp", parents=[common], help="solve the benchmark LP")
    s.add_argument("--instance", required=True)
    s.set_defaults(func=cmd_lp)

    s = sub.add_parser("simulate", parents=[common], help="evaluate policies on an instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--policies", nargs="+", default=list(DEFAULT_POLICIES))
    s.add_argument("--episodes", type=int, default=1000)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", parents=[common, source], help="vary one instance parameter")
    s.add_argument("--parameter", choices=SWEEP_PARAMETERS, required=True)
    s.add_argument("--values", required=True, help="comma-separated, strictly increasing")
    s.add_argument("--policies", nargs="+", default=list(DEFAULT_POLICIES))
    s.add_argument("--episodes", type=int, default=1000)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("oracle", parents=[common], help="exact E[OPT] and the LP upper-bound check")
    s.add_argument("--instance", required=True)
    s.add_argument("--max-enumeration", type=int, default=10**6)
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        code = args.func(args)
    except (BadInput, bikeshare.TripParseError, bikeshare.InstanceBuildError, EnumerationTooLarge, LpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        log.exception("internal error")
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
