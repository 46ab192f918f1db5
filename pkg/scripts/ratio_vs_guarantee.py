"""Empirical ratio of SAMP(1/(2ℓ), 1/(2ℓ)) next to its proven floor.

Integral instances use the 1/(4ℓ) floor; mixed instances with a large
non-integral budget use the (1-ε)/(4ℓ) floor.
"""

from __future__ import annotations

import argparse

from tsra.core import min_nonintegral_budget, sparsities
from tsra.generators import random_integral_instance, random_mixed_instance
from tsra.policy import Samp, guarantee
from tsra.sim import evaluate


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--instances", type=int, default=9)
    p.add_argument("--episodes", type=int, default=5000)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    print("family,seed,ell1,ell2,B,ratio,std_error,floor")
    for n in range(args.instances):
        seed = args.seed + n
        for family, inst in (
            ("integral", random_integral_instance(seed, 1 + n % 3)),
            ("mixed", random_mixed_instance(seed)),
        ):
            l1, l2 = sparsities(inst)
            B = min_nonintegral_budget(inst)
            eta = 1 / (2 * (l1 + l2))
            rep = evaluate(inst, Samp(eta, eta), args.episodes, base_seed=seed * args.episodes)
            floor = guarantee(l1, l2, B).ratio_lower_bound
            se = rep.std_error / rep.lp_objective if rep.lp_objective > 0 else 0.0
            print(f"{family},{seed},{l1},{l2},{B if B is not None else ''},{rep.competitive_ratio:.4f},{se:.4f},{floor:.4f}")


if __name__ == "__main__":
    main()
