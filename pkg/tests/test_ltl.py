import random

import pytest
from hypothesis import given, strategies as st

from mmsltl.core import TraceWord
from mmsltl.ltl import (And, Atom, F, FormulaSyntaxError, G, Not, Or, TrueF, U, LassoMasks, atoms_of,
                        distribute, eval_lasso, eval_masks, eval_unrolled, fcount, flatten, format_formula,
                        operators, parse, rewrite_neg_fg, rewrite_or_until, size)
from strategies import formula_strategy, random_formula, word_strategy

ALL_OPS = ("F", "G", "!", "&", "|", "U")


def test_parse_precedence():
    assert parse("a & b | c") == Or(And(Atom("a"), Atom("b")), Atom("c"))
    assert parse("a U b U c") == U(Atom("a"), U(Atom("b"), Atom("c")))
    assert parse("GF a") == G(F(Atom("a")))
    assert parse("!F a & b") == And(Not(F(Atom("a"))), Atom("b"))
    assert parse("true U a") == U(TrueF(), Atom("a"))


def test_parse_unicode_operators():
    assert parse("¬a ∧ (b ∨ c)") == And(Not(Atom("a")), Or(Atom("b"), Atom("c")))


def test_parse_errors_carry_positions():
    with pytest.raises(FormulaSyntaxError, match="position 4"):
        parse("a & ")
    with pytest.raises(FormulaSyntaxError):
        parse("(a & b")
    with pytest.raises(FormulaSyntaxError):
        parse("a $ b")


def test_undeclared_zone_rejected():
    with pytest.raises(FormulaSyntaxError, match="unknown zone 'q' at position 2"):
        parse("F q", zones={"a"})


def test_zone_names_made_of_temporal_letters_rejected():
    with pytest.raises(FormulaSyntaxError):
        parse("F FG", zones={"FG"})


def test_flatten_golden():
    assert flatten(parse("GF(a & G c) & F b")).format() == "GF a & FG c & F b"


def test_operators_and_size():
    phi = parse("X & F((Y & !Z) & F Z)")
    assert operators(phi) == {"&", "F", "!"}
    assert atoms_of(phi) == {"X", "Y", "Z"}
    assert size(phi) == 10
    assert fcount(parse("F(a & F b) & G c")) == 2


@given(formula_strategy(ALL_OPS))
def test_format_parse_round_trip(phi):
    assert parse(format_formula(phi)) == phi
    assert parse(format_formula(phi, unicode=True)) == phi


@given(formula_strategy(ALL_OPS, 7), word_strategy)
def test_lasso_evaluation_matches_unrolled_reference(phi, word):
    assert eval_lasso(word, phi) == eval_unrolled(word, phi, size(phi) + 2)


def test_bit_parallel_family_matches_single_words():
    rng = random.Random(3)
    atoms = ("a", "b")
    for _ in range(30):
        phi = random_formula(rng, ALL_OPS, 7, atoms)
        for length in (1, 3):
            for loop in range(length):
                masks = LassoMasks.enumerate_all(atoms, length, loop)
                top = eval_masks(masks, phi)[0]
                letters = [frozenset(), frozenset({"a"}), frozenset({"b"}), frozenset({"a", "b"})]
                for w in range(4 ** length):
                    word = [letters[(w >> (2 * i)) & 3] for i in range(length)]
                    tw = TraceWord(tuple(word[:loop]), tuple(word[loop:]))
                    assert bool(top >> w & 1) == eval_lasso(tw, phi)


@given(st.lists(st.sampled_from(["F", "G", "!"]), max_size=6), st.booleans(), word_strategy)
def test_negation_chain_rewrite_is_equivalent(chain, use_true, word):
    phi = TrueF() if use_true else Atom("a")
    for op in reversed(chain):
        phi = {"F": F, "G": G, "!": Not}[op](phi)
    canon = rewrite_neg_fg(phi)
    assert eval_lasso(word, canon) == eval_lasso(word, phi)
    # canonical: at most two temporal operators and a negation only on the atom
    ops, p = 0, canon
    while isinstance(p, (F, G)):
        ops, p = ops + 1, p.arg
    assert ops <= 2 and (isinstance(p, (Atom, TrueF)) or isinstance(p.arg, (Atom, TrueF)))


@given(formula_strategy(("F", "|")), word_strategy)
def test_distribute_f_or(phi, word):
    assert eval_lasso(word, distribute(phi)) == eval_lasso(word, phi)


@given(formula_strategy(("G", "&")), word_strategy)
def test_distribute_g_and(phi, word):
    assert eval_lasso(word, distribute(phi)) == eval_lasso(word, phi)


@given(st.integers(1, 3), word_strategy)
def test_or_until_rewrite(k, word):
    disjuncts = [Atom(n) for n in ("a", "b", "c")[:k]]
    goal = Atom("c") if k < 3 else Not(Atom("a"))
    direct = U(disjuncts[0] if k == 1 else _or(disjuncts), goal)
    rewritten = rewrite_or_until(disjuncts, goal)
    assert "|" not in operators(rewritten)
    assert eval_lasso(word, rewritten) == eval_lasso(word, direct)


def _or(parts):
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


@given(formula_strategy(("F", "G", "&")), word_strategy)
def test_flatten_is_equivalent(phi, word):
    assert eval_lasso(word, flatten(phi).to_formula()) == eval_lasso(word, phi)


@given(formula_strategy(("F", "G", "&")))
def test_flat_eventualities_bounded_by_size(phi):
    assert flatten(phi).fcount() <= size(phi)


def test_fcount_of_flat_golden():
    assert flatten(parse("GF a & FG c & F b")).fcount() == 2
