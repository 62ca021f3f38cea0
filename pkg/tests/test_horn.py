import itertools
import random

import pytest
from hypothesis import given, strategies as st

from mmsltl.horn import HornError, HornSystem, solve_ref, solve_sat, verify
from mmsltl.oracles import solve_fixed_signs
from strategies import random_horn


def brute_force(h: HornSystem) -> bool:
    """Enumerate the sign of every variable that appears in a positivity conjunction."""
    guarded = sorted({j for cl in h.clauses for J in cl.family for j in J})
    for bits in itertools.product((0, 1), repeat=len(guarded)):
        pos = [v for v, b in zip(guarded, bits) if b]
        zero = [v for v, b in zip(guarded, bits) if not b]
        if solve_fixed_signs(h, pos, zero) is not None:
            return True
    return False


@given(st.integers(0, 2 ** 32))
def test_three_routes_agree(seed):
    h = random_horn(random.Random(seed))
    a, b = solve_sat(h), solve_ref(h)
    assert (a is None) == (b is None) == (not brute_force(h))
    for m in (a, b):
        if m is not None:
            assert verify(h, m)


def test_positivity_propagation():
    h = HornSystem()
    x, y, z = h.var("x"), h.var("y"), h.var("z")
    h.imply_pos(x, y)
    h.iff_pos(y, z)
    h.add({x: 1}, ">=", 1)
    h.add({z: 1}, "<=", 0)
    assert solve_sat(h) is None and solve_ref(h) is None
    h2 = HornSystem()
    x, y = h2.var(), h2.var()
    h2.imply_pos(x, y)
    h2.add({x: 1}, ">=", 1)
    m = solve_sat(h2)
    assert m is not None and m[y] > 0


def test_free_pair_takes_negative_values():
    h = HornSystem()
    f = h.free("f")
    x = h.var()
    h.add({f: 1, x: 1}, "=", -3)
    m = solve_sat(h)
    assert m is not None and m[f] <= -3 and verify(h, m)


def test_free_pair_rejected_in_positivity():
    h = HornSystem()
    f = h.free("f")
    with pytest.raises(HornError):
        h.add_clause(None, [[f.y]])


def test_pos_any():
    h = HornSystem()
    xs = [h.var() for _ in range(3)]
    h.pos_any(xs)
    for v in xs[:2]:
        h.add({v: 1}, "=", 0)
    m = solve_sat(h)
    assert m is not None and m[xs[2]] > 0


def test_smtlib_export_lists_every_clause():
    h = random_horn(random.Random(4))
    text = h.to_smtlib()
    assert text.startswith("(set-logic QF_LRA)") and text.endswith("(check-sat)")
    assert text.count("(assert (or") == len(h.clauses)
