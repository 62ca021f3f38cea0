import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, settings, strategies as st

from mmsltl import corpus, oracles, reach
from mmsltl.core import Mms, Zone, member, run_endpoint, validate_run, zone_from_vertices_2d

M1 = Mms(2, ((0, 1), (1, 0), (1, 1), (-1, 1)))
Y = zone_from_vertices_2d([(2, Q(5, 2)), (Q(9, 4), Q(11, 4)), (Q(7, 2), 3), (3, Q(3, 2))], "Y")


def _stage_ok(M, st_):
    return validate_run(st_.start, M, st_.blocks, st_.zone, st_.end)


def test_reach_into_zone_with_box_constraint():
    box = Zone.box([0, 0], [4, 4])
    r = reach.decide_reach(M1, (1, 1), box, target_zone=Y)
    assert r is not None and member(Y, r.target)
    assert r.witness.validate(M1)
    assert all(_stage_ok(M1, s) for s in r.witness.stages)


def test_reach_blocked_by_zone():
    strip = Zone.box([0, 0], [4, Q(5, 4)])
    assert reach.decide_reach(M1, (1, 1), strip, target_zone=Y) is None


def test_effect_only_reach_without_zone():
    r = reach.decide_reach(M1, (0, 0), None, target=(-1, 3))
    assert r is not None and run_endpoint((0, 0), M1, r.witness.stages[0].blocks[0][0]) == (-1, 3)
    assert reach.decide_reach(M1, (0, 0), None, target=(0, -1)) is None


def test_always_in_a_box_needs_a_balanced_cycle():
    M = Mms(1, ((1,), (-1,)))
    w = reach.decide_gz(M, (0,), Zone.box([0], [1]))
    assert w is not None and w.validate(M)
    assert reach.decide_gz(Mms(1, ((1,),)), (0,), Zone.box([0], [1])) is None


def test_always_half_line():
    w = reach.decide_gz(Mms(1, ((1,),)), (0,), Zone.box([0], [None]))
    assert w is not None and w.validate(Mms(1, ((1,),)))


def test_lasso_between_two_boxes():
    M = Mms(1, ((1,), (-1,)))
    Z, X, Y1 = Zone.box([0], [3]), Zone.box([0], [1], "X"), Zone.box([2], [3], "Y")
    w = reach.decide_gz_gfx_gfy(M, (0,), Z, X, Y1)
    assert w is not None and w.validate(M) and w.check_algebra(M)
    assert reach.decide_gz_gfx_gfy(M, (0,), Z, X, Zone.box([4], [5], "Y")) is None


def test_lasso_iterates_converge_to_the_free_cycle():
    M = Mms(1, ((1,), (-1,)))
    w = reach.decide_gz_gfx_gfy(M, (0,), Zone.box([0], [3]), Zone.box([0], [1]), Zone.box([2], [3]))
    seq = w.iterates(M, 4)
    for n, (x, y) in enumerate(seq):
        p = w.lam ** n
        assert x == tuple(p * a + (1 - p) * b for a, b in zip(w.x0, w.xf))
    assert 0 < w.lam < 1 and w.lam == 1 - 1 / (1 + w.eps)


def test_lasso_refuses_unbounded_zones():
    M = Mms(1, ((1,),))
    U = Zone.box([0], [None])
    with pytest.raises(reach.Unsupported):
        reach.decide_gz_gfx_gfy(M, (0,), U, U, U)


def test_tampered_lasso_witness_rejected():
    M = Mms(1, ((1,), (-1,)))
    w = reach.decide_gz_gfx_gfy(M, (0,), Zone.box([0], [3]), Zone.box([0], [1]), Zone.box([2], [3]))
    w.eps = w.eps * 2
    assert not w.validate(M)


def test_product_encoding_shapes():
    Z0, A, B, C = Zone.box([0], [5]), Zone.box([0], [1]), Zone.box([2], [3]), Zone.box([4], [5])
    p = reach.product_reduce(Mms(1, ((1,), (-1,))), (0,), [Z0, A, B, C])
    assert p.blocks == 3 and p.mms.dim == 3 and p.mms.n == 6
    assert member(p.X, (0, 2, 4)) and not member(p.X, (0, 0, 4))
    assert member(p.Y, (Q(1, 2), Q(1, 2), Q(1, 2))) and not member(p.Y, (0, 1, 0))
    single = reach.product_reduce(Mms(1, ((1,),)), (0,), [Z0, A])
    assert single.blocks == 2


def test_reach_agrees_with_both_oracles():
    rng = random.Random(101)
    for _ in range(60):
        M, x, Z, y = corpus.reach_instance(rng)
        r = reach.decide_reach(M, x, Z, target=y)
        assert (r is not None) == oracles.support_reach(M, x, Z, target=y) == oracles.order_reach(M, x, Z, y)
        if r is not None:
            assert r.witness.validate(M) and r.target == y


def test_always_agrees_with_both_oracles():
    rng = random.Random(202)
    for _ in range(60):
        M, x, Z = corpus.gz_instance(rng)
        w = reach.decide_gz(M, x, Z)
        assert (w is not None) == oracles.support_gz(M, x, Z) == oracles.order_gz(M, x, Z)
        if w is not None:
            assert w.validate(M)


def test_lasso_agrees_with_support_oracle():
    rng = random.Random(303)
    for _ in range(12):
        M, x, Z, X, Y1 = corpus.lasso_instance(rng)
        try:
            w = reach.decide_gz_gfx_gfy(M, x, Z, X, Y1)
        except reach.Unsupported:
            continue
        assert (w is not None) == oracles.support_lasso(M, x, Z, X, Y1)
        if w is not None:
            assert w.validate(M)


def _scaled(Z: Zone, c: int) -> Zone:
    return Zone(Z.A, tuple(c * b for b in Z.b), Z.dim, Z.name)


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32), st.integers(2, 3))
def test_reachability_is_invariant_under_scaling(seed, c):
    M, x, Z, y = corpus.reach_instance(random.Random(seed))
    a = reach.decide_reach(M, x, Z, target=y) is not None
    b = reach.decide_reach(M, tuple(c * v for v in x), _scaled(Z, c), target=tuple(c * v for v in y)) is not None
    assert a == b


def test_recorder_collects_systems():
    assert isinstance(reach.RECORDER, list) and reach.RECORDER
