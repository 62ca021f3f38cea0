"""Brute-force deciders used to cross-check the Horn-based procedures.

Two independent routes are provided.  The support oracles take the same
compiled formula, fix the sign of every positivity variable by enumerating
supports, and solve the remaining strict linear system directly.  The
ordering oracles never build a step-order guess: for each support they try
every ordering of its modes with one step per mode, which suffices for the
in-zone fireability conditions.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Optional, Sequence

from .arith import LinSystem, strict_feasible
from .core import Mms, Zone, intersect_all, member, vec
from .horn import HornSystem
from . import reach


def subsets(n: int) -> Iterable[frozenset]:
    for k in range(n + 1):
        for c in itertools.combinations(range(n), k):
            yield frozenset(c)


def solve_fixed_signs(h: HornSystem, positive: Iterable[int], zero: Iterable[int]) -> Optional[tuple]:
    """Strict feasibility of h once the listed variables have a fixed sign."""
    positive, zero = set(positive), set(zero)
    atoms = []
    for cl in h.clauses:
        for J in cl.family:
            if not J <= positive | zero:
                raise ValueError("positivity variable with undetermined sign")
        if any(J <= positive for J in cl.family):
            continue
        atoms.append(cl.atom)
    sys, _ = h.lin_system(atoms, sorted(zero), sorted(positive))
    return strict_feasible(sys)


def _theta_alphas(leg: reach.LegBlock) -> list:
    return [b.alphas for b in (leg.fwd, leg.bwd) if b is not None]


def _signs(groups: Sequence[Sequence[list]], supports: Sequence[frozenset]):
    pos, zer = set(), set()
    for vecs, S in zip(groups, supports):
        for vs in vecs:
            for j, v in enumerate(vs):
                (pos if j in S else zer).add(v)
    return pos, zer


# ---------------------------------------------------------------- support oracles


def support_reach(M: Mms, x, Z: Optional[Zone], target=None, target_zone: Optional[Zone] = None) -> bool:
    h = HornSystem()
    lam = [h.var(f"lam{j}") for j in range(M.n)]
    y = reach.const_point(target) if target is not None else reach.free_point(h, M.dim, "y")
    if target_zone is not None:
        reach.in_zone(h, y, target_zone)
    leg = reach.build_leg(h, Z, M, reach.const_point(x), lam, y)
    group = [lam] + _theta_alphas(leg)
    for S in subsets(M.n):
        if solve_fixed_signs(h, *_signs([group], [S])) is not None:
            return True
    return False


def support_gz(M: Mms, x, Z: Zone) -> bool:
    h = HornSystem()
    block = reach.build_gz(h, Z, M, reach.const_point(x))
    group = [block.pi] + ([block.fwd.alphas] if block.fwd else [])
    for S in subsets(M.n):
        pos, zer = _signs([group], [S])
        if solve_fixed_signs(h, pos, zer) is not None:
            return True
    return False


def support_lasso(M: Mms, z, Z: Zone, X: Zone, Y: Zone) -> bool:
    h = HornSystem()
    block = reach.build_lasso(h, Z, X, Y, M, reach.const_point(z))
    par = block.points["par"]
    first = [par["s"]] + _theta_alphas(block.legs[0])
    rest = [par[k] for k in ("pi''", "pi", "pi'", "rho")]
    for leg in block.legs[1:]:
        rest += _theta_alphas(leg)
    for T in subsets(M.n):
        for S in subsets(M.n):
            if solve_fixed_signs(h, *_signs([first, rest], [T, S])) is not None:
                return True
    return False


# ---------------------------------------------------------------- ordering oracles


def _walk_rows(sys: LinSystem, Z: Zone, start: list, steps: list, sign: int) -> None:
    """Constrain start + sign * (prefix sums of steps) to Z, start included.

    ``start`` holds (constant, {column: coeff}) per coordinate; each step is
    a (column, mode vector) pair.
    """
    pts = [start]
    cur = start
    for col, m in steps:
        nxt = []
        for i, (c0, terms) in enumerate(cur):
            t = dict(terms)
            if m[i]:
                t[col] = t.get(col, 0) + sign * m[i]
            nxt.append((c0, t))
        pts.append(nxt)
        cur = nxt
    for p in pts:
        for row, b in zip(Z.A, Z.b):
            coeffs = {}
            const = 0
            for a, (c0, terms) in zip(row, p):
                if a:
                    const += a * c0
                    for k, v in terms.items():
                        coeffs[k] = coeffs.get(k, 0) + a * v
            sys.add_row(coeffs, "<=", b - const)


def fireable(M: Mms, x, Z: Zone, S: frozenset, backward: bool = False) -> bool:
    """Some schedule with support exactly S runs inside Z from x (or into x when backward)."""
    x = vec(x)
    for order in itertools.permutations(sorted(S)):
        sys = LinSystem()
        cols = [sys.add_var(f"mu{j}") for j in order]
        for c in cols:
            sys.add_row({c: 1}, ">", 0)
        _walk_rows(sys, Z, [(xi, {}) for xi in x], [(c, M.modes[j]) for c, j in zip(cols, order)],
                   -1 if backward else 1)
        if strict_feasible(sys) is not None:
            return True
    return False


def order_reach(M: Mms, x, Z: Optional[Zone], y) -> bool:
    """x reaches the fixed point y inside Z, via the support characterisation."""
    x, y = vec(x), vec(y)
    for S in subsets(M.n):
        sys = LinSystem()
        lam = [sys.add_var(f"lam{j}") for j in range(M.n)]
        for j in range(M.n):
            sys.add_row({lam[j]: 1}, ">" if j in S else "=", 0)
        for i in range(M.dim):
            sys.add_row({lam[j]: M.modes[j][i] for j in range(M.n) if M.modes[j][i]}, "=", y[i] - x[i])
        if strict_feasible(sys) is None:
            continue
        if Z is None:
            return True
        if fireable(M, x, Z, S) and fireable(M, y, Z, S, backward=True):
            return True
    return False


def order_gz(M: Mms, x, Z: Zone) -> bool:
    """x satisfies G Z, via fireability plus a non-increasing recurrent direction."""
    x = vec(x)
    for S in subsets(M.n):
        if not S or not fireable(M, x, Z, S):
            continue
        sys = LinSystem()
        pi = [sys.add_var(f"pi{j}") for j in range(M.n)]
        for j in range(M.n):
            if j not in S:
                sys.add_row({pi[j]: 1}, "=", 0)
        sys.add_row({v: 1 for v in pi}, ">=", 1)
        for row, b in zip(Z.A, Z.b):
            drift = {pi[j]: sum(a * m for a, m in zip(row, M.modes[j])) for j in range(M.n)}
            drift = {k: v for k, v in drift.items() if v}
            sys.add_row(drift, "<=", 0)
            sys.add_row(drift, "<=", b - sum(a * c for a, c in zip(row, x)))
        if strict_feasible(sys) is not None:
            return True
    return False


# ---------------------------------------------------------------- closed forms for the P fragments


def cone_reaches(M: Mms, x, Z: Zone) -> bool:
    """Some x + M lam with lam >= 0 lies in Z (no zone constraint on the way)."""
    x = vec(x)
    sys = LinSystem()
    lam = [sys.add_var(f"lam{j}") for j in range(M.n)]
    for row, b in zip(Z.A, Z.b):
        coeffs = {lam[j]: sum(a * m for a, m in zip(row, M.modes[j])) for j in range(M.n)}
        sys.add_row({k: v for k, v in coeffs.items() if v}, "<=", b - sum(a * c for a, c in zip(row, x)))
    return strict_feasible(sys) is not None


def has_balanced_cycle(M: Mms) -> bool:
    """Some mu >= 0 of total weight 1 has M mu = 0."""
    sys = LinSystem()
    mu = [sys.add_var(f"mu{j}") for j in range(M.n)]
    sys.add_row({v: 1 for v in mu}, "=", 1)
    for i in range(M.dim):
        sys.add_row({mu[j]: M.modes[j][i] for j in range(M.n) if M.modes[j][i]}, "=", 0)
    return strict_feasible(sys) is not None


def ray_hits(m, x, Z: Zone) -> bool:
    """x + t m lies in Z for some t >= 0."""
    return cone_reaches(Mms(len(m), (tuple(m),)), x, Z)


def support_fg(M: Mms, x, Z: Zone) -> bool:
    """F G Z by support enumeration: a free leg to some y in Z, then G Z from y."""
    h = HornSystem()
    lam = [h.var(f"lam{j}") for j in range(M.n)]
    y = reach.free_point(h, M.dim, "y")
    reach.build_leg(h, None, M, reach.const_point(x), lam, y)
    block = reach.build_gz(h, Z, M, y)
    tail = [block.pi] + ([block.fwd.alphas] if block.fwd else [])
    for T in subsets(M.n):
        for S in subsets(M.n):
            if solve_fixed_signs(h, *_signs([[lam], tail], [T, S])) is not None:
                return True
    return False


def _chain(phi) -> tuple:
    """Reduce an F/G/! chain to (temporal prefix, negated, atom or None for true)."""
    from .ltl import Atom, F, G, Not, TrueF

    letters, neg = [], False
    p = phi
    while not isinstance(p, (Atom, TrueF)):
        if isinstance(p, Not):
            neg = not neg
        elif isinstance(p, F):
            letters.append("G" if neg else "F")
        elif isinstance(p, G):
            letters.append("F" if neg else "G")
        else:
            raise ValueError("not an F/G/! chain")
        p = p.arg
    squeezed = [c for i, c in enumerate(letters) if i == 0 or letters[i - 1] != c]
    return "".join(squeezed[-2:]), neg, (p.name if isinstance(p, Atom) else None)


def fg_neg_oracle(M: Mms, x, phi, zones: dict) -> bool:
    ops, neg, name = _chain(phi)
    if name is None:
        return not neg
    Z = zones[name]
    x = vec(x)
    inside = member(Z, x)
    moving = any(any(c for c in m) for m in M.modes)
    if neg:
        if ops == "":
            return not inside
        if ops == "G":
            return any(not ray_hits(m, x, Z) for m in M.modes)
        return not inside or moving
    return {"": lambda: inside,
            "F": lambda: cone_reaches(M, x, Z),
            "G": lambda: order_gz(M, x, Z),
            "GF": lambda: cone_reaches(M, x, Z) and has_balanced_cycle(M),
            "FG": lambda: support_fg(M, x, Z)}[ops]()


def g_and_oracle(M: Mms, x, phi, zones: dict) -> bool:
    from .ltl import And, Atom, G

    now, always = [], []

    def walk(p, under_g):
        if isinstance(p, And):
            walk(p.left, under_g)
            walk(p.right, under_g)
        elif isinstance(p, G):
            walk(p.arg, True)
        elif isinstance(p, Atom):
            (always if under_g else now).append(zones[p.name])

    walk(phi, False)
    x = vec(x)
    if not all(member(Z, x) for Z in now):
        return False
    if not always:
        return True
    return order_gz(M, x, intersect_all(always, M.dim))


def f_or_oracle(M: Mms, x, phi, zones: dict) -> bool:
    from .ltl import F, Or, TrueF

    def sat(p, eventually):
        if isinstance(p, Or):
            return sat(p.left, eventually) or sat(p.right, eventually)
        if isinstance(p, F):
            return sat(p.arg, True)
        if isinstance(p, TrueF):
            return True
        Z = zones[p.name]
        return cone_reaches(M, x, Z) if eventually else member(Z, vec(x))

    return sat(phi, False)


def p_fragment_oracle(M: Mms, x, phi, zones: dict) -> bool:
    """Truth of phi at x for formulas over {F,G,!}, {G,&} or {F,|} with bounded zones."""
    from .ltl import operators

    if M.n == 0:
        return False
    ops = operators(phi)
    if ops <= {"F", "G", "!"}:
        return fg_neg_oracle(M, x, phi, zones)
    if ops <= {"G", "&"}:
        return g_and_oracle(M, x, phi, zones)
    if ops <= {"F", "|"}:
        return f_or_oracle(M, x, phi, zones)
    raise ValueError(f"operators {sorted(ops)} are outside the P fragments")
