"""Competitive ratio of every policy while varying λ, γ and β.

Writes one long-format CSV per swept parameter. By default the instance is a
synthetic bike-share-shaped one; pass --trips to build it from a trip log.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from tsra.bikeshare import BikeShareConfig, build_instance, read_trips, synthetic_instance
from tsra.cli import DEFAULT_POLICIES, SweepSpec, run_sweep
from tsra.policy import parse_policy
from tsra.sim import reports_to_csv

SWEEPS = {
    "lambda": (1.5, 2.0, 2.5, 3.0),
    "gamma": (1.0, 2.0, 3.0, 4.0),
    "beta": (0.5, 1.0, 1.5, 2.0),
}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out-dir", default="artifacts")
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shape", default="4,4,16,200", help="supplying,demanding,types,T for synthetic instances")
    p.add_argument("--trips", help="Citibike-style trip CSV instead of a synthetic instance")
    p.add_argument("--num-sites", type=int, default=50)
    p.add_argument("--top-k", type=int, default=10)
    args = p.parse_args(argv)

    base = BikeShareConfig(num_sites=args.num_sites, top_k=args.top_k)
    if args.trips:
        trips, _ = read_trips(args.trips)
        make = lambda cfg: build_instance(trips, cfg, seed=args.seed)  # noqa: E731
    else:
        shape = tuple(int(v) for v in args.shape.split(","))
        make = lambda cfg: synthetic_instance(shape, cfg, seed=args.seed)  # noqa: E731

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    policies = tuple(parse_policy(s) for s in DEFAULT_POLICIES)
    failed = 0
    for name, values in SWEEPS.items():
        spec = SweepSpec(name, values, policies, args.episodes, args.seed)
        reports, prefixes, failures = run_sweep(spec, make, base)
        path = out / f"sweep_{name}.csv"
        path.write_text(reports_to_csv(reports, ("parameter_value",), prefixes))
        print(f"{path}: {len(reports)} rows, {len(failures)} failed points")
        for value, msg in failures:
            print(f"  {name}={value}: {msg}", file=sys.stderr)
        failed += len(failures)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
