import random
from fractions import Fraction as Q

import pytest
from hypothesis import given, strategies as st

from mmsltl import gen
from mmsltl.checker import Fails, Holds, UndecidableFragment, check, check_np
from mmsltl.core import Zone, member, run_endpoint, schedule, validate_run
from mmsltl.ltl import format_formula, operators, parse
from harness import explore_returns, merged


def _check(inst, **kw):
    return check(inst.point, inst.mms, parse(inst.formula, zones=set(inst.zones)), inst.zones, **kw)


# ---------------------------------------------------------------- subset sum


def test_subset_sum_unreachable_target():
    inst = gen.gen_subset_sum([8, 9], 4)
    assert inst.mms.dim == 9 and inst.expected is False
    assert inst.meta["gamma"] == "18"
    v = check_np(inst.point, inst.mms, parse(inst.formula), inst.zones)
    assert isinstance(v, Fails)


def test_subset_sum_reachable_target_has_a_valid_witness():
    inst = gen.gen_subset_sum([8, 9], 17)
    assert inst.expected is True
    v = check_np(inst.point, inst.mms, parse(inst.formula), inst.zones)
    assert isinstance(v, Holds) and v.witness.validate(inst.mms, inst.zones)


def test_subset_sum_singletons_match_the_oracle():
    for S, t in [([3], 3), ([3], 0), ([3], 2), ([Q(1, 2)], Q(1, 2)), ([2, 5], 7), ([2, 5], 6)]:
        inst = gen.gen_subset_sum(S, t)
        assert inst.expected == gen.subset_sum_oracle(S, t)
        assert isinstance(_check(inst), Holds) == inst.expected, (S, t)


def test_subset_sum_rejects_empty_set():
    with pytest.raises(ValueError):
        gen.gen_subset_sum([], 0)


def test_subset_sum_formula_stays_in_the_np_fragment():
    assert operators(parse(gen.gen_subset_sum([1, 2, 3], 4).formula)) == {"F", "&"}


# ---------------------------------------------------------------- LP feasibility and circuit value


def test_lp_feasibility_goldens():
    assert gen.gen_lp_feasibility(Zone.box([0, 0], [1, 1])).expected is True
    empty = Zone.from_rows([([1, 0], 0), ([-1, 0], -1)], 2)
    assert gen.gen_lp_feasibility(empty).expected is False


def test_lp_feasibility_checker_matches_the_lp_oracle():
    rng = random.Random(12)
    seen = set()
    for _ in range(40):
        inst = gen.gen_lp_feasibility(gen.random_bounded_zone(rng, rng.randint(1, 3)))
        assert isinstance(_check(inst), Holds) == inst.expected
        seen.add(inst.expected)
    assert seen == {True, False}


def test_cvp_goldens():
    c = gen.Circuit(2, (("g1", "and", "x1", "x2"),))
    assert gen.gen_cvp(c, [1, 1]).expected is True
    assert gen.gen_cvp(c, [0, 0]).expected is False
    inst = gen.gen_cvp(c, [1, 1])
    assert inst.meta["dims"] == ["x1", "x2", "g1", "heart", "coheart"]
    assert isinstance(_check(inst), Holds)
    assert isinstance(_check(gen.gen_cvp(c, [1, 0])), Fails)


def test_cvp_checker_matches_circuit_evaluation():
    rng = random.Random(13)
    seen = set()
    for _ in range(12):
        c = gen.random_circuit(rng, rng.randint(1, 3), rng.randint(1, 6))
        w = [rng.randint(0, 1) for _ in range(c.inputs)]
        inst = gen.gen_cvp(c, w)
        assert inst.expected == c.evaluate(w)
        assert isinstance(_check(inst), Holds) == inst.expected
        seen.add(inst.expected)
    assert seen == {True, False}


def test_circuit_validation():
    with pytest.raises(ValueError):
        gen.Circuit(1, (("g1", "xor", "x1", "x1"),))
    with pytest.raises(ValueError):
        gen.Circuit(1, (("g1", "and", "x1", "g2"),))


# ---------------------------------------------------------------- Petri nets


def _net(rng):
    return gen.random_petri_net(rng, rng.randint(1, 2), rng.randint(1, 2))


def test_dimension_counts():
    rng = random.Random(5)
    for _ in range(20):
        net = _net(rng)
        P, T = len(net.places), len(net.transitions)
        enc = gen.gen_petri(net, [0] * P, [1] * P)
        assert enc.inner.dim == P + 3 * T and enc.inner.n == 3 * T
        assert enc.wrapped.dim == P + 3 * T + 4
        assert enc.wrapped.n == enc.inner.n + 4


def test_single_place_single_transition_dims():
    net = gen.PetriNet(("p",), ("t",), {"t": (">=",)}, {"t": (1,)}, {"t": (0,)})
    enc = gen.gen_petri(net, (1,), (0,))
    assert (enc.inner.dim, enc.wrapped.dim) == (4, 8)


def test_mode_table_spot_values():
    net = gen.PetriNet(("p", "q"), ("t", "s"), {"t": (">=", ">="), "s": ("=", ">=")},
                       {"t": (1, 0), "s": (0, 0)}, {"t": (0, 1), "s": (1, 0)})
    enc = gen.gen_petri(net, (1, 0), (0, 1))
    dims = enc.dims[4:]
    a_t, b_t, c_t = enc.inner.modes[:3]
    assert a_t[dims.index("t_A")] == -1 and a_t[dims.index("t_B")] == 1
    assert b_t[dims.index("t_B")] == -1 and b_t[dims.index("t_C")] == 1
    assert c_t[dims.index("t_C")] == -1 and c_t[dims.index("t_A")] == 1
    assert b_t[:2] == (-1, 1) and a_t[:2] == (0, 0) == c_t[:2]
    assert all(m[dims.index("s_A")] == 0 for m in (a_t, b_t, c_t))


def test_unnormalized_net_rejected_and_normalization_splits_it():
    net = gen.PetriNet(("p",), ("t",), {"t": (">=",)}, {"t": (1,)}, {"t": (2,)})
    assert not net.is_normalized()
    with pytest.raises(ValueError, match="normalize"):
        gen.gen_petri(net, (1,), (2,))
    norm, embed = gen.normalize(net)
    assert norm.is_normalized() and norm.transitions == ("t_pre", "t_post")
    x = embed((1,))
    assert x == (1, 0)
    y = norm.fire(x, "t_pre")
    assert not norm.enabled(y, "t_pre") and norm.fire(y, "t_post") == (2, 0)


def _sample_point(rng, d):
    return tuple(Q(rng.choice((0, 0, 0, 1, 2, 3)), rng.choice((1, 2))) for _ in range(d))


@given(st.integers(0, 2 ** 32))
def test_inner_zones_are_closed_under_scaling(seed):
    rng = random.Random(seed)
    net = _net(rng)
    enc = gen.gen_petri(net, [0] * len(net.places), [0] * len(net.places))
    assert all(b == 0 for z in enc.inner_zones.values() for b in z.b)
    for _ in range(30):
        p = _sample_point(rng, enc.inner.dim)
        c = Q(rng.randint(1, 20), rng.randint(1, 20))
        for z in enc.inner_zones.values():
            if member(z, p):
                assert member(z, tuple(c * v for v in p))


def test_macro_step_structure_between_visits_of_a():
    rng = random.Random(8)
    grid = (Q(1, 2), Q(1), Q(3, 2))
    returns = explored = 0
    for _ in range(8):
        net = _net(rng)
        enc = gen.gen_petri(net, [0] * len(net.places), [0] * len(net.places))
        M, zones, A = enc.inner, list(enc.inner_zones.values()), enc.inner_zones["A"]
        marking = [rng.randint(0, 2) for _ in net.places]
        x = tuple(Q(v) for v in marking) + enc.x[len(marking):]
        assert member(A, x)
        for steps, returned in explore_returns(M, zones, A, x, grid, 3):
            explored += 1
            if not returned:
                continue
            returns += 1
            runs = merged(steps)
            t = runs[0][1] // 3
            assert [m for _, m in runs] == [3 * t, 3 * t + 1, 3 * t + 2], steps
            assert [d for d, _ in runs] == [1, 1, 1]
    assert returns > 0 and explored > returns


def test_zero_free_nets_pass_through_b_t():
    net = gen.PetriNet(("p",), ("t",), {"t": (">=",)}, {"t": (1,)}, {"t": (0,)})
    enc = gen.gen_petri(net, (1,), (0,))
    mid = run_endpoint(enc.x, enc.inner, schedule((1, 0)))
    assert member(enc.inner_zones["B_t"], mid)


def test_zero_test_is_not_enforced_by_the_zone_union():
    # the point after a_t lies in the intersection of A'_t and B'_t, so b_t can
    # start without visiting B_t; the inhibitor arc on p is then skipped
    net = gen.PetriNet(("p",), ("t",), {"t": ("=",)}, {"t": (0,)}, {"t": (1,)})
    enc = gen.gen_petri(net, (1,), (2,))
    zones = list(enc.inner_zones.values())
    assert validate_run(enc.x, enc.inner, schedule((1, 0), (1, 1), (1, 2)), zones, enc.x_target)
    assert not member(enc.inner_zones["B_t"], run_endpoint(enc.x, enc.inner, schedule((1, 0))))


def test_wrapper_weight_caps_on_random_schedules():
    rng = random.Random(21)
    longest = 0
    for _ in range(4):
        net = _net(rng)
        P = len(net.places)
        enc = gen.gen_petri(net, [rng.randint(0, 1) for _ in range(P)], [rng.randint(0, 1) for _ in range(P)])
        W, zones = enc.wrapped, list(enc.wrapped_zones.values())
        top, turn = {0, 1}, set(range(2, W.n - 2))
        for _ in range(15):
            x, used = enc.start, {"top": Q(0), "turn": Q(0), "bot": Q(0)}
            taken = 0
            for _ in range(12):
                mode = rng.randrange(W.n)
                dur = Q(rng.randint(1, 8), 8)
                if not validate_run(x, W, schedule((dur, mode)), zones):
                    continue
                x = run_endpoint(x, W, schedule((dur, mode)))
                key = "top" if mode in top else "turn" if mode in turn else "bot"
                used[key] += dur
                taken += 1
            assert used["top"] <= 1 and used["turn"] <= 1 and used["bot"] <= 1
            longest = max(longest, taken)
    assert longest >= 2


def test_wrapped_instance_reaches_the_target_for_a_firing_net():
    net = gen.PetriNet(("p", "q"), ("t",), {"t": (">=", ">="), }, {"t": (1, 0)}, {"t": (0, 1)})
    enc = gen.gen_petri(net, (1, 0), (0, 1))
    W, zones = enc.wrapped, list(enc.wrapped_zones.values())
    assert gen.petri_reachable(net, (1, 0), (0, 1)) is True
    # a_t b_t c_t has weight 3, so it runs at scale 1/3 between the top and bottom phases
    third = Q(1, 3)
    steps = [(third, 0), (1 - third, 1), (third, 2), (third, 3), (third, 4), (third, 5), (1 - third, 6)]
    assert validate_run(enc.start, W, schedule(*steps), zones, enc.target)
    # without the inner firing the bottom phase cannot subtract the target marking
    assert not validate_run(enc.start, W, schedule((third, 0), (1 - third, 1), (third, 5)), zones)


def test_gor_and_until_variants_are_refused():
    net = gen.PetriNet(("p",), ("t",), {"t": (">=",)}, {"t": (1,)}, {"t": (0,)})
    gor = gen.gen_petri_gor(net, (1,), (0,))
    until = gen.gen_petri_until(net, (1,), (0,))
    assert operators(parse(gor.formula)) == {"G", "|"}
    assert format_formula(parse(gor.formula)).count("Aheart") == 1
    assert "|" not in operators(parse(until.formula)) and "U" in operators(parse(until.formula))
    for inst in (gor, until):
        v = _check(inst)
        assert isinstance(v, UndecidableFragment) and v.code == 2


def test_petri_reachable_bounded_search():
    net = gen.PetriNet(("p", "q"), ("t", "s"), {"t": (">=", ">="), "s": (">=", "=")},
                       {"t": (1, 0), "s": (0, 0)}, {"t": (0, 1), "s": (1, 0)})
    assert gen.petri_reachable(net, (1, 0), (0, 1)) is True
    # s needs q empty, so after t fires nothing can refill p
    assert gen.petri_reachable(net, (0, 1), (1, 1)) is False


def test_net_json_round_trip():
    rng = random.Random(2)
    net = _net(rng)
    src, tgt = (0,) * len(net.places), (1,) * len(net.places)
    assert gen.net_from_json(gen.net_to_json(net, src, tgt)) == (net, src, tgt)
