import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from mmsltl.arith import Infeasible, LinSystem, Optimal, Unbounded, feasible_point, lp, strict_feasible


def fm_feasible(n: int, rows) -> bool:
    """Fourier-Motzkin oracle; rows are (coeff list, strict, rhs) meaning a.x < b or a.x <= b."""
    rows = [(list(a), s, Q(b)) for a, s, b in rows]
    for k in range(n):
        pos = [r for r in rows if r[0][k] > 0]
        neg = [r for r in rows if r[0][k] < 0]
        out = [r for r in rows if r[0][k] == 0]
        for ap, sp, bp in pos:
            for an, sn, bn in neg:
                cp, cn = ap[k], -an[k]
                a = [cn * x + cp * y for x, y in zip(ap, an)]
                out.append((a, sp or sn, cn * bp + cp * bn))
        rows = out
    return all((0 < b) if s else (0 <= b) for _, s, b in rows)


def to_fm(sys: LinSystem, extra=()) -> list:
    n = sys.nvars
    out = []
    for row, rel, rhs in list(sys.rows) + list(extra):
        a = [row.get(j, Q(0)) for j in range(n)]
        neg = [-c for c in a]
        if rel in ("<=", "<"):
            out.append((a, rel == "<", rhs))
        elif rel in (">=", ">"):
            out.append((neg, rel == ">", -rhs))
        else:
            out.append((a, False, rhs))
            out.append((neg, False, -rhs))
    for j in range(n):
        if not sys.free[j]:
            e = [Q(0)] * n
            e[j] = Q(-1)
            out.append((e, False, Q(0)))
    return out


def random_system(rng: random.Random, strict: bool) -> LinSystem:
    sys = LinSystem()
    n = rng.randint(1, 3)
    for _ in range(n):
        sys.add_var(free=rng.random() < 0.3)
    rels = ["<=", ">=", "="] + (["<", ">"] if strict else [])
    for _ in range(rng.randint(1, 4)):
        sys.add_row([rng.randint(-3, 3) for _ in range(n)], rng.choice(rels), rng.randint(-4, 4))
    return sys


seeds = st.integers(0, 2 ** 32)


@given(seeds)
def test_feasibility_matches_fourier_motzkin(seed):
    sys = random_system(random.Random(seed), strict=False)
    p = feasible_point(sys)
    assert (p is not None) == fm_feasible(sys.nvars, to_fm(sys))
    if p is not None:
        assert sys.satisfied_by(p)


@given(seeds)
def test_strict_feasibility_matches_fourier_motzkin(seed):
    sys = random_system(random.Random(seed), strict=True)
    p = strict_feasible(sys)
    assert (p is not None) == fm_feasible(sys.nvars, to_fm(sys))
    if p is not None:
        assert sys.satisfied_by(p)


@given(seeds)
def test_optimum_matches_fourier_motzkin(seed):
    rng = random.Random(seed)
    sys = random_system(rng, strict=False)
    obj = {j: rng.randint(-2, 2) for j in range(sys.nvars)}
    res = lp(obj, sys)
    n = sys.nvars
    if isinstance(res, Infeasible):
        assert not fm_feasible(n, to_fm(sys))
    elif isinstance(res, Optimal):
        at = to_fm(sys, [(obj, ">=", res.value)])
        above = to_fm(sys, [(obj, ">", res.value)])
        assert fm_feasible(n, at) and not fm_feasible(n, above)
    else:
        assert isinstance(res, Unbounded)
        # a recession direction improving the objective exists
        cone = LinSystem(list(sys.names), list(sys.free), [(r, rel, Q(0)) for r, rel, _ in sys.rows])
        assert fm_feasible(n, to_fm(cone, [(obj, ">", 0)]))


def test_degenerate_cycling_example_terminates():
    # Beale's classic cycling example under the largest-coefficient rule
    sys = LinSystem()
    x = [sys.add_var() for _ in range(4)]
    sys.add_row({x[0]: Q(1, 4), x[1]: -8, x[2]: -1, x[3]: 9}, "<=", 0)
    sys.add_row({x[0]: Q(1, 2), x[1]: -12, x[2]: Q(-1, 2), x[3]: 3}, "<=", 0)
    sys.add_row({x[2]: 1}, "<=", 1)
    res = lp({x[0]: Q(3, 4), x[1]: -20, x[2]: Q(1, 2), x[3]: -6}, sys)
    assert isinstance(res, Optimal) and res.value == Q(5, 4)


def test_strict_rows():
    sys = LinSystem()
    a = sys.add_var()
    sys.add_row({a: 1}, "<", 1)
    sys.add_row({a: 1}, ">", 0)
    p = strict_feasible(sys)
    assert p is not None and 0 < p[0] < 1
    sys.add_row({a: 1}, "<=", 0)
    assert strict_feasible(sys) is None


def test_free_variables_take_negative_values():
    sys = LinSystem()
    a = sys.add_var(free=True)
    sys.add_row({a: 1}, "=", -7)
    assert feasible_point(sys) == (Q(-7),)


def test_bad_relation_rejected():
    sys = LinSystem()
    sys.add_var()
    with pytest.raises(ValueError):
        sys.add_row([1], "!=", 0)
