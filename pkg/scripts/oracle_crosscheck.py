"""Cross-check the Horn-based deciders against the brute-force oracles on a seeded corpus.

Families: reach (fixed-target reachability inside a zone), gz (G Z),
lasso (G Z & GF X & GF Y), and the three polynomial-time formula fragments.
"""
import argparse
import random
import sys
import time

from mmsltl import corpus, oracles, reach
from mmsltl.checker import Holds, P_ROUTES, check, route
from mmsltl.ltl import operators


def run_reach(rng):
    M, x, Z, y = corpus.reach_instance(rng)
    r = reach.decide_reach(M, x, Z, target=y)
    ok = (r is not None) == oracles.support_reach(M, x, Z, target=y) == oracles.order_reach(M, x, Z, y)
    return ok, r is not None, r is None or r.witness.validate(M)


def run_gz(rng):
    M, x, Z = corpus.gz_instance(rng)
    w = reach.decide_gz(M, x, Z)
    ok = (w is not None) == oracles.support_gz(M, x, Z) == oracles.order_gz(M, x, Z)
    return ok, w is not None, w is None or w.validate(M)


def run_lasso(rng):
    while True:
        M, x, Z, X, Y = corpus.lasso_instance(rng)
        try:
            w = reach.decide_gz_gfx_gfy(M, x, Z, X, Y)
        except reach.Unsupported:
            continue
        return (w is not None) == oracles.support_lasso(M, x, Z, X, Y), w is not None, w is None or w.validate(M)


def run_fragment(ops):
    def one(rng):
        while True:
            M, x, zones = corpus.zones_instance(rng)
            phi = corpus.random_formula(rng, ops, 6)
            if route(operators(phi)) in P_ROUTES:
                break
        v = check(x, M, phi, zones)
        truth = oracles.p_fragment_oracle(M, x, phi, zones)
        return isinstance(v, Holds) == truth, truth, True

    return one


FAMILIES = {"reach": run_reach, "gz": run_gz, "lasso": run_lasso, "g-and": run_fragment("G&"),
            "f-or": run_fragment("F|"), "fg-neg": run_fragment("FG!")}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--family", choices=sorted(FAMILIES) + ["all"], default="all")
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()
    names = sorted(FAMILIES) if args.family == "all" else [args.family]
    failed = False
    for name in names:
        rng = random.Random(f"{args.seed}:{name}")
        start = time.monotonic()
        agree = positive = valid = 0
        for _ in range(args.count):
            ok, pos, wit = FAMILIES[name](rng)
            agree += ok
            positive += pos
            valid += wit
        failed |= agree != args.count or valid != args.count
        print(f"{name:<7} {agree}/{args.count} agree, {positive} positive, {valid} witnesses valid, "
              f"{time.monotonic() - start:.1f} s", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
