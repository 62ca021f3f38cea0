"""Time the path-scheme pipeline on subset-sum instances of growing size.

Prints one row per instance: |S|, the item list, target, ground truth,
verdict, number of path schemes visited and wall time.
"""
import argparse
import random
import time

from mmsltl import gen
from mmsltl.automaton import build, enumerate_lps
from mmsltl.checker import check_np
from mmsltl.ltl import parse


def scheme_count(formula: str, cap: int) -> str:
    n = 0
    for _ in enumerate_lps(build(parse(formula))):
        n += 1
        if n >= cap:
            return f">={cap}"
    return str(n)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=6)
    ap.add_argument("--sizes", default="1,2,3,4", help="comma-separated set sizes")
    ap.add_argument("--per-size", type=int, default=2)
    ap.add_argument("--budget", type=float, default=60.0, help="seconds per instance")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    print(f"{'|S|':>3}  {'S':<22} {'t':>6}  {'truth':<5}  {'verdict':<11} {'schemes':>9} {'seconds':>8}")
    for size in (int(s) for s in args.sizes.split(",")):
        for _ in range(args.per_size):
            S, t = gen.random_subset_sum(rng, size)
            inst = gen.gen_subset_sum(S, t)
            start = time.monotonic()
            v = check_np(inst.point, inst.mms, parse(inst.formula), inst.zones, deadline=start + args.budget)
            took = time.monotonic() - start
            shown = ",".join(str(s) for s in S)
            print(f"{size:>3}  {shown:<22} {str(t):>6}  {str(inst.expected):<5}  {v.name:<11} "
                  f"{scheme_count(inst.formula, 10 ** 6):>9} {took:8.1f}", flush=True)


if __name__ == "__main__":
    main()
