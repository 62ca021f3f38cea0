"""Random formulas and lasso words shared by the test modules."""
import random

from hypothesis import strategies as st

from mmsltl.core import TraceWord
from mmsltl.corpus import random_formula

ATOMS = ("a", "b", "c")


def lasso_words(max_len: int = 6, atoms=ATOMS):
    """Every lasso word with |prefix| + |period| <= max_len, as a generator."""
    import itertools

    letters = [frozenset(c) for k in range(len(atoms) + 1) for c in itertools.combinations(atoms, k)]
    for n in range(1, max_len + 1):
        for loop in range(n):
            for word in itertools.product(letters, repeat=n):
                yield TraceWord(word[:loop], word[loop:])


def formula_strategy(ops, max_size=8):
    return st.integers(0, 2 ** 32).map(lambda s: random_formula(random.Random(s), ops, max_size))


letter = st.frozensets(st.sampled_from(ATOMS))
word_strategy = st.builds(lambda p, q: TraceWord(tuple(p), tuple(q)),
                          st.lists(letter, max_size=4), st.lists(letter, min_size=1, max_size=4))


def random_horn(rng: random.Random, max_vars: int = 6, max_clauses: int = 5):
    """A random Horn system; about a third of the systems carry one free-sign pair."""
    from mmsltl.horn import HornSystem

    h = HornSystem()
    k = rng.randint(1, max_vars)
    pair = None
    if k >= 3 and rng.random() < 0.35:
        pair = h.free("f")
        k -= 2
    xs = [h.var() for _ in range(k)]
    for _ in range(rng.randint(1, max_clauses)):
        coeffs = {v: rng.randint(-2, 2) for v in rng.sample(xs, rng.randint(1, len(xs)))}
        if pair is not None and rng.random() < 0.5:
            coeffs[pair] = rng.randint(-2, 2)
        atom = h.atom(coeffs, rng.choice(("<=", ">=", "=", "<", ">")), rng.randint(-2, 3))
        family = [rng.sample(xs, rng.randint(1, min(2, len(xs)))) for _ in range(rng.randint(0, 2))]
        h.add_clause(atom, family)
    return h
