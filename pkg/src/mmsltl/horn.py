"""Conjunctions of convex semi-linear Horn clauses over the nonnegative reals.

A clause is ``a . x ~ c  or  OR_i AND_{j in J_i} x_j > 0``.  Free-sign
quantities are registered as pairs ``(y, z)`` of nonnegative variables whose
occurrences are rewritten to ``y - z``; such pairs never occur in a
positivity conjunction.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .arith import RELATIONS, LinSystem, Optimal, lp, strict_feasible


class HornError(ValueError):
    pass


class LimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class LinAtom:
    coeffs: tuple  # sorted (var, int coefficient) pairs
    rel: str
    rhs: int

    def value(self, point) -> Fraction:
        return sum((c * point[v] for v, c in self.coeffs), Fraction(0))

    def holds(self, point) -> bool:
        lhs = self.value(point)
        return {"<": lhs < self.rhs, "<=": lhs <= self.rhs, "=": lhs == self.rhs,
                ">=": lhs >= self.rhs, ">": lhs > self.rhs}[self.rel]


FALSE_ATOM = LinAtom((), ">=", 1)


@dataclass(frozen=True)
class Clause:
    atom: LinAtom
    family: tuple  # tuple of frozensets of variable indices


@dataclass(frozen=True)
class FreeVar:
    """A free-sign quantity encoded as ``y - z``."""

    y: int
    z: int
    name: str


def _clear(coeffs: Mapping, rhs) -> tuple:
    m = 1
    for v in itertools.chain(coeffs.values(), (rhs,)):
        den = v.denominator
        if den != 1:
            m = m * den // math.gcd(m, den)
    if m == 1:
        return {k: int(c) for k, c in coeffs.items()}, int(rhs)
    return {k: int(c * m) for k, c in coeffs.items()}, int(rhs * m)


class HornSystem:
    def __init__(self):
        self.names: list = []
        self.pair_of: dict = {}  # var index -> FreeVar for pair members
        self.frees: list = []
        self.clauses: list = []

    # -- variables

    def var(self, name: Optional[str] = None) -> int:
        self.names.append(name or f"v{len(self.names)}")
        return len(self.names) - 1

    def free(self, name: Optional[str] = None) -> FreeVar:
        base = name or f"f{len(self.frees)}"
        fv = FreeVar(self.var(base + "+"), self.var(base + "-"), base)
        self.pair_of[fv.y] = fv
        self.pair_of[fv.z] = fv
        self.frees.append(fv)
        return fv

    def free_vec(self, d: int, name: str) -> list:
        return [self.free(f"{name}[{i}]") for i in range(d)]

    def var_vec(self, d: int, name: str) -> list:
        return [self.var(f"{name}[{i}]") for i in range(d)]

    @property
    def nvars(self) -> int:
        return len(self.names)

    # -- clauses

    def _expand(self, coeffs) -> dict:
        """Rewrite free quantities to y - z and merge coefficients."""
        out = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for v, c in items:
            if not isinstance(c, (int, Fraction)):
                c = Fraction(c)
            if c == 0:
                continue
            if isinstance(v, FreeVar):
                out[v.y] = out.get(v.y, 0) + c
                out[v.z] = out.get(v.z, 0) - c
            else:
                out[v] = out.get(v, 0) + c
        return {k: c for k, c in out.items() if c != 0}

    def atom(self, coeffs, rel: str, rhs) -> LinAtom:
        if rel not in RELATIONS:
            raise HornError(f"unknown relation {rel!r}")
        expanded = self._expand(coeffs)
        if not isinstance(rhs, (int, Fraction)):
            rhs = Fraction(rhs)
        ints, c = _clear(expanded, rhs)
        return LinAtom(tuple(sorted(ints.items())), rel, c)

    def add_clause(self, atom: Optional[LinAtom], family: Iterable[Iterable[int]] = ()) -> None:
        fam = tuple(frozenset(j) for j in family)
        if atom is None and not fam:
            raise HornError("a clause needs a linear atom or a positivity family")
        for J in fam:
            for j in J:
                if j in self.pair_of:
                    raise HornError(f"free-sign variable {self.names[j]} in a positivity conjunction")
                if not 0 <= j < self.nvars:
                    raise HornError(f"unknown variable {j}")
        self.clauses.append(Clause(atom if atom is not None else FALSE_ATOM, fam))

    def add(self, coeffs, rel: str, rhs) -> None:
        """A plain linear constraint (clause with empty family)."""
        self.add_clause(self.atom(coeffs, rel, rhs))

    def eq_vec(self, terms: list, rhs_vec) -> None:
        """Componentwise sum of (coefficient, vector-of-vars-or-FreeVars) terms equals rhs_vec."""
        d = len(rhs_vec)
        for i in range(d):
            coeffs = []
            for c, vecvars in terms:
                coeffs.append((vecvars[i], c))
            self.add(coeffs, "=", rhs_vec[i])

    def imply_pos(self, i: int, j: int) -> None:
        """x_i > 0 -> x_j > 0."""
        for v in (i, j):
            if v in self.pair_of:
                raise HornError("imply_pos needs nonnegative variables")
        self.add_clause(self.atom({i: 1}, "=", 0), [[j]])

    def iff_pos(self, i: int, j: int) -> None:
        self.imply_pos(i, j)
        self.imply_pos(j, i)

    def pos_any(self, vars_: Iterable[int]) -> None:
        """Some listed variable is positive."""
        self.add_clause(None, [[v] for v in vars_])

    # -- LP plumbing

    def _columns(self):
        """Column index per variable: pair members share one free column."""
        col = {}
        sys = LinSystem()
        for v in range(self.nvars):
            fv = self.pair_of.get(v)
            if fv is None:
                col[v] = (sys.add_var(self.names[v]), 1)
            elif v == fv.y:
                c = sys.add_var(fv.name, free=True)
                col[fv.y] = (c, 1)
                col[fv.z] = (c, -1)
        return sys, col

    def lin_system(self, atoms: Iterable[LinAtom], zero: Iterable[int] = (), positive: Iterable[int] = ()):
        sys, col = self._columns()
        for a in atoms:
            row = {}
            coeffs = dict(a.coeffs)
            for v, c in a.coeffs:
                k, s = col[v]
                if s == -1:
                    # the pair only ever occurs as y - z, which is the shared column
                    if coeffs.get(self.pair_of[v].y, 0) != -c:
                        raise HornError("free-sign pair used outside its difference")
                    continue
                row[k] = row.get(k, 0) + c
            sys.add_row(row, a.rel, a.rhs)
        for v in zero:
            sys.add_row({col[v][0]: 1}, "=", 0)
        for v in positive:
            sys.add_row({col[v][0]: 1}, ">", 0)
        return sys, col

    def _to_model(self, point, col) -> "HornModel":
        values = []
        for v in range(self.nvars):
            k, s = col[v]
            x = point[k]
            if v in self.pair_of:
                x = max(s * x, Fraction(0))
            values.append(Fraction(x))
        return HornModel(tuple(values), self)

    @property
    def family_vars(self) -> list:
        return [v for v in range(self.nvars) if v not in self.pair_of]

    def to_smtlib(self) -> str:
        lines = ["(set-logic QF_LRA)"]
        for n in self.names:
            lines.append(f"(declare-const |{n}| Real)")
            lines.append(f"(assert (>= |{n}| 0))")
        for cl in self.clauses:
            terms = " ".join(f"(* {c} |{self.names[v]}|)" for v, c in cl.atom.coeffs) or "0"
            rel = {"=": "="}.get(cl.atom.rel, cl.atom.rel)
            lit = f"({rel} (+ 0 {terms}) {cl.atom.rhs})"
            fams = [f"(and {' '.join(f'(> |{self.names[j]}| 0)' for j in sorted(J))})" for J in cl.family]
            lines.append(f"(assert (or {lit} {' '.join(fams)}))")
        lines.append("(check-sat)")
        return "\n".join(lines)


@dataclass(frozen=True)
class HornModel:
    values: tuple
    system: HornSystem = field(repr=False, compare=False)

    def __getitem__(self, v):
        if isinstance(v, FreeVar):
            return self.values[v.y] - self.values[v.z]
        return self.values[v]

    def vec(self, vars_) -> tuple:
        return tuple(self[v] for v in vars_)

    def support(self) -> frozenset:
        return frozenset(v for v in self.system.family_vars if self.values[v] > 0)


def clause_holds(cl: Clause, values) -> bool:
    if cl.atom.holds(values):
        return True
    return any(all(values[j] > 0 for j in J) for J in cl.family)


def verify(sys: HornSystem, model: HornModel) -> bool:
    if len(model.values) != sys.nvars or any(v < 0 for v in model.values):
        return False
    return all(clause_holds(cl, model.values) for cl in sys.clauses)


# ---------------------------------------------------------------- support saturation


def solve_sat(sys: HornSystem) -> Optional[HornModel]:
    """Decide by shrinking the candidate support until it is realised by one model."""
    # only variables inside some positivity conjunction affect which clauses are active
    R = {j for cl in sys.clauses for J in cl.family for j in J}
    guarded = sorted(R)
    while True:
        active = [cl.atom for cl in sys.clauses if not any(J <= R for J in cl.family)]
        zero = [v for v in guarded if v not in R]
        strict_sys, col = sys.lin_system(active, zero)
        witness = strict_feasible(strict_sys)
        if witness is None:
            return None
        S, points = _max_support(sys, active, zero, R, witness, col)
        if S == R:
            k = len(points)
            avg = [sum((p[i] for p in points), Fraction(0)) / k for i in range(len(witness))]
            point = [(a + w) / 2 for a, w in zip(avg, witness)]
            model = sys._to_model(point, col)
            if not verify(sys, model):
                raise AssertionError("saturation model failed verification")
            return model
        R = S


def _max_support(sys, active, zero, R, witness, col):
    """Variables of R positive in some model of the closed relaxation, plus witnesses.

    Given a strict witness, a variable is positive in some strict model iff
    it is positive somewhere on the closure, by convexity.
    """
    relaxed = [LinAtom(a.coeffs, {"<": "<=", ">": ">="}.get(a.rel, a.rel), a.rhs) for a in active]
    points = [witness]
    found = {v for v in R if witness[col[v][0]] > 0}
    while True:
        todo = sorted(v for v in R if v not in found)
        if not todo:
            break
        base, _ = sys.lin_system(relaxed, zero)
        t = {}
        for v in todo:
            t[v] = base.add_var(f"t{v}")
            base.add_row({t[v]: 1, col[v][0]: -1}, "<=", 0)
            base.add_row({t[v]: 1}, "<=", 1)
        res = lp({t[v]: 1 for v in todo}, base)
        if not isinstance(res, Optimal) or res.value <= 0:
            break
        point = res.point[:len(witness)]
        points.append(point)
        found |= {v for v in todo if point[col[v][0]] > 0}
    return frozenset(found), points


# ---------------------------------------------------------------- reference engine


def solve_ref(sys: HornSystem, node_limit: int = 200_000) -> Optional[HornModel]:
    """Branch on the sign of every family variable, pruning with exact LPs.

    Each leaf fixes which positivity conjunctions hold, which is the same as
    choosing one disjunct per clause; the leaf system is then solved with
    strict rows.  ``node_limit`` bounds the number of LP calls.
    """
    fam_vars = sorted({j for cl in sys.clauses for J in cl.family for j in J})
    guard_of = {}
    for idx, cl in enumerate(sys.clauses):
        # a clause whose atom is x_i = 0 (or x_i <= 0) is falsified by x_i > 0
        if len(cl.atom.coeffs) == 1 and cl.atom.rhs == 0 and cl.atom.rel in ("=", "<=") \
                and cl.atom.coeffs[0][1] > 0 and cl.atom.coeffs[0][0] not in sys.pair_of:
            guard_of[idx] = cl.atom.coeffs[0][0]
    counter = [0]

    def system_for(pos, zer):
        atoms = []
        for cl in sys.clauses:
            if any(J <= pos for J in cl.family):
                continue
            if all(J & zer for J in cl.family):
                atoms.append(cl.atom)
        return sys.lin_system(atoms, zer, pos)

    def propagate(pos, zer):
        pos, zer = set(pos), set(zer)
        changed = True
        while changed:
            changed = False
            for idx, cl in enumerate(sys.clauses):
                g = guard_of.get(idx)
                if g is None or g not in pos or any(J <= pos for J in cl.family):
                    continue
                live = [J for J in cl.family if not J & zer]
                if not live:
                    return None
                if len(live) == 1 and not live[0] <= pos:
                    if live[0] & zer:
                        return None
                    pos |= live[0]
                    changed = True
            if pos & zer:
                return None
        return pos, zer

    def search(pos, zer, k):
        counter[0] += 1
        if counter[0] > node_limit:
            raise LimitExceeded(f"reference engine exceeded {node_limit} nodes")
        st = propagate(pos, zer)
        if st is None:
            return None
        pos, zer = st
        lin, col = system_for(pos, zer)
        point = strict_feasible(lin)
        if point is None:
            return None
        while k < len(fam_vars) and (fam_vars[k] in pos or fam_vars[k] in zer):
            k += 1
        if k == len(fam_vars):
            model = sys._to_model(point, col)
            if verify(sys, model):
                return model
            raise AssertionError("reference leaf model failed verification")
        v = fam_vars[k]
        return search(pos | {v}, zer, k + 1) or search(pos, zer | {v}, k + 1)

    return search(frozenset(), frozenset(), 0)
