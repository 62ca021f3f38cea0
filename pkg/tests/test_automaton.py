import random

from hypothesis import given

from mmsltl.automaton import accepts, accepts_masks, build, enumerate_lps, lps_to_linear, restrict
from mmsltl.core import TraceWord
from mmsltl.ltl import LassoMasks, eval_lasso, eval_masks, parse, size
from strategies import formula_strategy, random_formula, word_strategy

EXAMPLE = "GF(a & G c) & F b"


def _linear(phi):
    aut = build(phi)
    return [lps_to_linear(aut, s) for s in enumerate_lps(aut)]


def test_example_path_schemes_golden():
    got = [lin.format() for lin in _linear(parse(EXAMPLE))]
    assert got == [
        "true U (b ∧ (true U (c ∧ (G c ∧ GF a))))",
        "true U ((b ∧ c) ∧ (G c ∧ GF a))",
        "true U (c ∧ (c U ((b ∧ c) ∧ (G c ∧ GF a))))",
    ]


def test_a_and_eventually_b_has_two_schemes():
    aut = build(parse("a & F b"))
    schemes = list(enumerate_lps(aut))
    assert len(schemes) == 2
    assert sorted(len(s.states) for s in schemes) == [2, 3]


def test_initial_state_is_the_flat_formula():
    aut = build(parse(EXAMPLE))
    assert aut.states[0].format() == "GF a & FG c & F b"


def _sccs_are_singletons(aut) -> bool:
    n = len(aut.states)
    reach = [{i} for i in range(n)]
    changed = True
    while changed:
        changed = False
        for (i, j) in aut.labels:
            new = reach[i] | reach[j]
            if new != reach[i]:
                reach[i] = new
                changed = True
    return all(not (j in reach[i] and i in reach[j]) for i in range(n) for j in range(n) if i != j)


def _longest_simple_path(aut) -> int:
    def go(i, seen):
        return max((1 + go(j, seen | {j}) for j in aut.successors(i) if j not in seen), default=0)

    return go(0, {0})


@given(formula_strategy(("F", "G", "&")))
def test_structure(phi):
    aut = build(phi)
    assert _sccs_are_singletons(aut)
    assert aut.width == _longest_simple_path(aut) <= size(phi) + 1


@given(formula_strategy(("F", "G", "&")))
def test_eventualities_strictly_decrease_along_schemes(phi):
    aut = build(phi)
    for s in enumerate_lps(aut):
        counts = [aut.states[q].fcount() for q in s.states[1:]]
        assert all(a > b for a, b in zip(counts, counts[1:]))


@given(formula_strategy(("F", "G", "&"), 7), word_strategy)
def test_acceptance_matches_semantics(phi, word):
    assert accepts(build(phi), word) == eval_lasso(word, phi)


@given(formula_strategy(("F", "G", "&"), 7), word_strategy)
def test_formula_is_the_disjunction_of_its_schemes(phi, word):
    assert eval_lasso(word, phi) == any(eval_lasso(word, lin.to_formula()) for lin in _linear(phi))


@given(formula_strategy(("F", "G", "&"), 7), word_strategy)
def test_restricted_automaton_accepts_its_linear_formula(phi, word):
    aut = build(phi)
    for s in enumerate_lps(aut):
        lin = lps_to_linear(aut, s)
        assert accepts(restrict(aut, s), word) == eval_lasso(word, lin.to_formula())


def test_bit_parallel_acceptance_on_all_short_words():
    rng = random.Random(11)
    atoms = ("a", "b", "c")
    for _ in range(20):
        phi = random_formula(rng, ("F", "G", "&"), 8, atoms)
        aut = build(phi)
        for length in (1, 2):
            for loop in range(length):
                masks = LassoMasks.enumerate_all(atoms, length, loop)
                assert accepts_masks(aut, masks) == eval_masks(masks, phi)[0]


def test_dot_export_shows_minimal_labels():
    dot = build(parse("a & F b")).to_dot()
    assert dot.startswith("digraph")
    assert 'label="{a}"' in dot or 'label="{a,b}"' in dot
    assert "doublecircle" in dot


def test_scheme_may_read_a_held_letter_twice():
    phi = parse("F F c")
    aut = build(phi)
    word = TraceWord((frozenset("abc"),), (frozenset(),))
    for s in enumerate_lps(aut):
        assert accepts(restrict(aut, s), word) == eval_lasso(word, lps_to_linear(aut, s).to_formula()) is True
