"""Seeded random instances for cross-checking the deciders against the oracles.

Purely random instances are almost always negative, so the generators bias
toward positives: start points inside the zone, targets reached by short
in-zone walks, and mode sets that contain opposite pairs.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .core import Mms, Zone, member, vadd, vscale
from .ltl import And, Atom, F, G, Not, Or, TrueF, U, size


def random_zone(rng, d: int, name: str = "Z", bounded: bool = True) -> Zone:
    lo = [rng.randint(-2, 1) for _ in range(d)]
    hi = [v + rng.randint(1, 3) for v in lo]
    rows = []
    for i in range(d):
        e = [0] * d
        e[i] = 1
        rows.append((tuple(e), hi[i]))
        rows.append((tuple(-c for c in e), -lo[i]))
    if not bounded:
        rng.shuffle(rows)
        rows = rows[: rng.randint(0, len(rows) - 1)]
    for _ in range(rng.randint(0, 2)):
        rows.append((tuple(rng.randint(-2, 2) for _ in range(d)), rng.randint(-1, 3)))
    return Zone(tuple(r for r, _ in rows), tuple(b for _, b in rows), d, name)


def random_mms(rng, d: int, max_modes: int = 3, opposite: float = 0.3) -> Mms:
    n = rng.randint(1, max_modes)
    modes = []
    while len(modes) < n:
        m = tuple(rng.randint(-2, 2) for _ in range(d))
        if m not in modes:
            modes.append(m)
        if len(modes) < n and rng.random() < opposite:
            neg = tuple(-c for c in m)
            if neg not in modes:
                modes.append(neg)
    return Mms(d, tuple(modes))


def random_point(rng, d: int) -> tuple:
    return tuple(Fraction(rng.randint(-4, 6), 2) for _ in range(d))


def point_in(rng, Z: Zone, tries: int = 40) -> Optional[tuple]:
    """A random half-integer point of Z near the origin, if one is found."""
    for _ in range(tries):
        p = random_point(rng, Z.dim)
        if member(Z, p):
            return p
    return None


def walk(rng, M: Mms, Z: Zone, x, steps: int) -> tuple:
    """End of a short random schedule from x that stays in the convex zone Z."""
    p = tuple(x)
    for _ in range(steps):
        m = M.modes[rng.randrange(M.n)]
        q = vadd(p, vscale(Fraction(rng.choice((1, 2, 3)), 4), m))
        if member(Z, q):
            p = q
    return p


def reach_instance(rng) -> tuple:
    """(M, x, Z, y) for a fixed-target reachability query."""
    d = rng.randint(1, 3)
    M = random_mms(rng, d)
    Z = random_zone(rng, d, bounded=rng.random() < 0.7)
    x = point_in(rng, Z) if rng.random() < 0.8 else None
    x = x if x is not None else random_point(rng, d)
    y = walk(rng, M, Z, x, rng.randint(1, 4)) if rng.random() < 0.6 else random_point(rng, d)
    return M, x, Z, y


def gz_instance(rng) -> tuple:
    """(M, x, Z) for G Z."""
    d = rng.randint(1, 3)
    M = random_mms(rng, d, opposite=0.5)
    Z = random_zone(rng, d, bounded=rng.random() < 0.6)
    x = point_in(rng, Z) if rng.random() < 0.8 else None
    return M, x if x is not None else random_point(rng, d), Z


def lasso_instance(rng) -> tuple:
    """(M, x, Z, X, Y) for G Z & GF X & GF Y."""
    d = rng.randint(1, 2)
    M = random_mms(rng, d, opposite=0.6)
    Z = random_zone(rng, d, bounded=rng.random() < 0.5)
    X = random_zone(rng, d, "X")
    Y = random_zone(rng, d, "Y")
    x = point_in(rng, Z) if rng.random() < 0.8 else None
    return M, x if x is not None else random_point(rng, d), Z, X, Y


def zones_instance(rng, names=("a", "b", "c")) -> tuple:
    """(M, x, zones) with bounded zones under the given names; x lies in one of them when possible."""
    d = rng.randint(1, 2)
    M = random_mms(rng, d, opposite=0.5)
    zones = {n: random_zone(rng, d, n) for n in names}
    x = point_in(rng, zones[rng.choice(names)]) if rng.random() < 0.7 else None
    return M, x if x is not None else random_point(rng, d), zones


def random_formula(rng, ops, max_size: int = 8, atoms=("a", "b", "c")):
    """A formula over the given operator names with size at most max_size."""
    unary = [o for o in ops if o in ("F", "G", "!")]
    binary = [o for o in ops if o in ("&", "|", "U")]

    def go(budget):
        if budget <= 1 or rng.random() < 0.25:
            return Atom(rng.choice(atoms)) if rng.random() < 0.92 else TrueF()
        choices = (unary if budget >= 2 else []) + (binary if budget >= 3 else [])
        if not choices:
            return Atom(rng.choice(atoms))
        op = rng.choice(choices)
        if op in ("F", "G", "!"):
            sub = go(budget - 1)
            return {"F": F, "G": G, "!": Not}[op](sub)
        k = rng.randint(1, budget - 2)
        left, right = go(k), go(budget - 1 - k)
        return {"&": And, "|": Or, "U": U}[op](left, right)

    while True:
        phi = go(max_size)
        if size(phi) <= max_size:
            return phi
