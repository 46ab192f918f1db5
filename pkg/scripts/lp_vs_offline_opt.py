"""Compare the benchmark LP value with the exact expected offline optimum on tiny random instances."""

from __future__ import annotations

import argparse
import sys

from tsra.generators import random_tiny_instance
from tsra.lpbench import solve_instance
from tsra.sim import brute_force_offline_opt


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=0, help="first instance seed")
    args = p.parse_args(argv)

    print("seed,lp_objective,offline_opt,gap")
    worst = float("inf")
    for seed in range(args.seed, args.seed + args.instances):
        inst = random_tiny_instance(seed)
        lp = solve_instance(inst).objective_value
        opt = brute_force_offline_opt(inst)
        worst = min(worst, lp - opt)
        print(f"{seed},{lp!r},{opt!r},{lp - opt!r}")
    print(f"# smallest gap {worst:.3g}", file=sys.stderr)
    return 0 if worst >= -1e-6 else 1


if __name__ == "__main__":
    sys.exit(main())
