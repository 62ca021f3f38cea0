"""Exact rational linear programming.

The solver is a two-phase primal simplex on a sparse dictionary tableau.
Entries are ``gmpy2.mpq`` internally and ``fractions.Fraction`` at the API
boundary, so every verdict is exact.  Free variables are eliminated by
substitution before the simplex runs and recovered afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from gmpy2 import mpq

RELATIONS = ("<", "<=", "=", ">=", ">")

# Consecutive degenerate pivots tolerated under the largest-coefficient rule
# before switching to Bland's rule.
DEGENERATE_SWITCH = 30


def _q(v) -> mpq:
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def _frac(v: mpq) -> Fraction:
    return Fraction(int(v.numerator), int(v.denominator))


@dataclass
class LinSystem:
    """Variables with sign restrictions plus sparse linear rows."""

    names: list = field(default_factory=list)
    free: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def add_var(self, name=None, free: bool = False) -> int:
        self.names.append(name if name is not None else f"v{len(self.names)}")
        self.free.append(free)
        return len(self.names) - 1

    @property
    def nvars(self) -> int:
        return len(self.names)

    def add_row(self, coeffs: Union[Mapping[int, object], Sequence], rel: str, rhs) -> None:
        if rel not in RELATIONS:
            raise ValueError(f"unknown relation {rel!r}")
        if isinstance(coeffs, Mapping):
            items = coeffs.items()
        else:
            if len(coeffs) != self.nvars:
                raise ValueError("coefficient vector length does not match variable count")
            items = enumerate(coeffs)
        row = {}
        for j, c in items:
            if not 0 <= j < self.nvars:
                raise ValueError(f"variable index {j} out of range")
            c = Fraction(c)
            if c:
                row[j] = row.get(j, Fraction(0)) + c
        row = {j: c for j, c in row.items() if c}
        self.rows.append((row, rel, Fraction(rhs)))

    def copy(self) -> "LinSystem":
        return LinSystem(list(self.names), list(self.free), list(self.rows))

    def has_strict(self) -> bool:
        return any(rel in ("<", ">") for _, rel, _ in self.rows)

    def satisfied_by(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.nvars:
            return False
        for j, v in enumerate(point):
            if not self.free[j] and v < 0:
                return False
        return all(_holds(sum((c * point[j] for j, c in row.items()), Fraction(0)), rel, rhs)
                   for row, rel, rhs in self.rows)


def _holds(lhs, rel, rhs) -> bool:
    if rel == "<=":
        return lhs <= rhs
    if rel == ">=":
        return lhs >= rhs
    if rel == "=":
        return lhs == rhs
    if rel == "<":
        return lhs < rhs
    return lhs > rhs


@dataclass(frozen=True)
class Infeasible:
    pass


@dataclass(frozen=True)
class Optimal:
    point: tuple
    value: Fraction


@dataclass(frozen=True)
class Unbounded:
    point: tuple
    ray: tuple


LpOutcome = Union[Infeasible, Optimal, Unbounded]


class _Tableau:
    """Sparse tableau: basic variable of row i equals rhs[i] - sum(rows[i][j] * x_j)."""

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols

    def pivot(self, r: int, col: int, obj: dict, objval: list) -> None:
        row = self.rows[r]
        piv = row[col]
        inv = 1 / piv
        old = self.basis[r]
        new_row = {j: c * inv for j, c in row.items() if j != col}
        new_row[old] = inv
        new_rhs = self.rhs[r] * inv
        self.rows[r] = new_row
        self.rhs[r] = new_rhs
        self.basis[r] = col
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other.get(col)
            if f is None:
                continue
            del other[col]
            for j, c in new_row.items():
                v = other.get(j)
                if v is None:
                    other[j] = -f * c
                else:
                    v -= f * c
                    if v:
                        other[j] = v
                    else:
                        del other[j]
            self.rhs[i] -= f * new_rhs
        f = obj.get(col)
        if f is not None:
            del obj[col]
            for j, c in new_row.items():
                v = obj.get(j)
                if v is None:
                    obj[j] = -f * c
                else:
                    v -= f * c
                    if v:
                        obj[j] = v
                    else:
                        del obj[j]
            objval[0] += f * new_rhs

    def run(self, obj: dict, objval: list, allowed) -> Optional[int]:
        """Maximise ``objval + sum(obj[j] x_j)`` over nonbasic x >= 0.

        ``obj`` holds reduced costs of nonbasic columns (positive means
        improving).  Returns None at optimality, otherwise the entering column
        of an unbounded direction.
        """
        degenerate = 0
        while True:
            cands = [(c, j) for j, c in obj.items() if c > 0 and allowed(j)]
            if not cands:
                return None
            if degenerate >= DEGENERATE_SWITCH:
                col = min(j for _, j in cands)
            else:
                col = max(cands, key=lambda t: (t[0], -t[1]))[1]
            best = None
            best_r = None
            for i, row in enumerate(self.rows):
                a = row.get(col)
                if a is not None and a > 0:
                    ratio = self.rhs[i] / a
                    if (best is None or ratio < best
                            or (ratio == best and self.basis[i] < self.basis[best_r])):
                        best = ratio
                        best_r = i
            if best_r is None:
                return col
            degenerate = degenerate + 1 if best == 0 else 0
            self.pivot(best_r, col, obj, objval)


def _solve_nonneg(rows, rhs, rels, ncols, objective):
    """Two-phase simplex over nonnegative columns.

    ``rows`` are sparse dicts, ``rels`` in {'<=', '=', '>='}.  Returns
    ('infeasible',) | ('optimal', values, value) | ('unbounded', values, ray).
    """
    ncol = ncols
    eq_rows = []
    eq_rhs = []
    basis = []
    artificials = set()
    for row, rel, b in zip(rows, rels, rhs):
        row = dict(row)
        slack = None
        if rel == "<=":
            slack = ncol
            row[slack] = mpq(1)
            ncol += 1
        elif rel == ">=":
            slack = ncol
            row[slack] = mpq(-1)
            ncol += 1
        if b < 0:
            row = {j: -c for j, c in row.items()}
            b = -b
        if slack is not None and row[slack] > 0:
            basic = slack
        else:
            basic = ncol
            artificials.add(ncol)
            ncol += 1
        # tableau convention: basic = rhs - sum(others)
        t_row = {j: c for j, c in row.items() if j != basic}
        if basic in row and row[basic] != 1:
            raise AssertionError("slack basis with non-unit coefficient")
        eq_rows.append(t_row)
        eq_rhs.append(mpq(b))
        basis.append(basic)

    tab = _Tableau(eq_rows, eq_rhs, basis, ncol)

    if artificials:
        # maximise -sum(artificials)
        obj = {}
        objval = [mpq(0)]
        for i, bvar in enumerate(basis):
            if bvar in artificials:
                objval[0] -= eq_rhs[i]
                for j, c in eq_rows[i].items():
                    obj[j] = obj.get(j, mpq(0)) + c
        obj = {j: c for j, c in obj.items() if c}
        tab.run(obj, objval, lambda j: j not in artificials)
        if objval[0] < 0:
            return ("infeasible",)
        # drive remaining artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] in artificials:
                row = tab.rows[i]
                col = next((j for j in sorted(row) if j not in artificials), None)
                if col is None:
                    del tab.rows[i]
                    del tab.rhs[i]
                    del tab.basis[i]
                    continue
                tab.pivot(i, col, {}, [mpq(0)])
            i += 1
        for row in tab.rows:
            for a in artificials:
                row.pop(a, None)

    obj = {}
    objval = [mpq(0)]
    pos = {b: i for i, b in enumerate(tab.basis)}
    for j, c in objective.items():
        if not c:
            continue
        if j in pos:
            i = pos[j]
            objval[0] += c * tab.rhs[i]
            for k, a in tab.rows[i].items():
                obj[k] = obj.get(k, mpq(0)) - c * a
        else:
            obj[j] = obj.get(j, mpq(0)) + c
    obj = {j: c for j, c in obj.items() if c}
    entering = tab.run(obj, objval, lambda j: j not in artificials)
    values = [mpq(0)] * ncols
    for i, b in enumerate(tab.basis):
        if b < ncols:
            values[b] = tab.rhs[i]
    if entering is None:
        return ("optimal", values, objval[0])
    ray = [mpq(0)] * ncols
    if entering < ncols:
        ray[entering] = mpq(1)
    for i, b in enumerate(tab.basis):
        a = tab.rows[i].get(entering)
        if a is not None and b < ncols:
            ray[b] = -a
    return ("unbounded", values, ray)


def _lp_exact(objective: Mapping[int, Fraction], sys: LinSystem):
    """Core driver: eliminate free variables, then run the simplex."""
    n = sys.nvars
    rows = []
    for row, rel, rhs in sys.rows:
        if rel in ("<", ">"):
            raise ValueError("lp() does not accept strict rows; use strict_feasible")
        rows.append([{j: _q(c) for j, c in row.items()}, rel, _q(rhs)])
    obj = {j: _q(c) for j, c in objective.items() if c}
    obj_const = mpq(0)
    slack_base = n
    nslack = 0
    definitions = []  # (var, const, {col: coeff}) meaning var = const + sum coeff*col

    for f in range(n):
        if not sys.free[f]:
            continue
        cand = [i for i, r in enumerate(rows) if f in r[0]]
        if not cand:
            definitions.append((f, mpq(0), {}))
            if obj.get(f):
                # feasibility of the rest decides between unbounded and infeasible
                definitions[-1] = (f, mpq(0), {"ray": obj[f]})
            continue
        eqs = [i for i in cand if rows[i][1] == "="]
        if eqs:
            i = min(eqs, key=lambda k: len(rows[k][0]))
        else:
            i = min(cand, key=lambda k: len(rows[k][0]))
            s = slack_base + nslack
            nslack += 1
            row, rel, b = rows[i]
            row[s] = mpq(1) if rel == "<=" else mpq(-1)
            rows[i][1] = "="
        row, _, b = rows.pop(i)
        a = row[f]
        expr = {j: -c / a for j, c in row.items() if j != f}
        const = b / a
        definitions.append((f, const, expr))
        for r in rows:
            c = r[0].pop(f, None)
            if c is None:
                continue
            r[2] -= c * const
            for j, e in expr.items():
                v = r[0].get(j, mpq(0)) + c * e
                if v:
                    r[0][j] = v
                else:
                    r[0].pop(j, None)
        c = obj.pop(f, None)
        if c is not None:
            obj_const += c * const
            for j, e in expr.items():
                v = obj.get(j, mpq(0)) + c * e
                if v:
                    obj[j] = v
                else:
                    obj.pop(j, None)

    # rows now mention only nonnegative columns (original or added slacks)
    keep = []
    for row, rel, b in rows:
        if not row:
            if not _holds(0, rel, b):
                return ("infeasible",)
            continue
        keep.append((row, rel, b))
    ncols = slack_base + nslack
    res = _solve_nonneg([r for r, _, _ in keep], [b for _, _, b in keep],
                        [rel for _, rel, _ in keep], ncols, obj)
    if res[0] == "infeasible":
        return res
    values = res[1]
    unconstrained_ray = None
    for f, const, expr in reversed(definitions):
        if "ray" in expr:
            values[f] = mpq(0)
            unconstrained_ray = (f, expr["ray"])
            continue
        values[f] = const + sum((e * values[j] for j, e in expr.items()), mpq(0))
    point = values[:n]
    if unconstrained_ray is not None:
        ray = [mpq(0)] * len(values)
        f, c = unconstrained_ray
        ray[f] = mpq(1) if c > 0 else mpq(-1)
    elif res[0] == "optimal":
        return ("optimal", point, res[2] + obj_const)
    else:
        ray = res[2]
    # free variables defined through others move along the ray as well
    for f, const, expr in reversed(definitions):
        if "ray" in expr:
            if unconstrained_ray is None or f != unconstrained_ray[0]:
                ray[f] = mpq(0)
            continue
        ray[f] = sum((e * ray[j] for j, e in expr.items()), mpq(0))
    return ("unbounded", point, ray[:n])


def _check_ray(sys: LinSystem, objective, ray) -> bool:
    for j, v in enumerate(ray):
        if not sys.free[j] and v < 0:
            return False
    for row, rel, _ in sys.rows:
        d = sum((c * ray[j] for j, c in row.items()), Fraction(0))
        if rel == "<=" and d > 0 or rel == ">=" and d < 0 or rel == "=" and d != 0:
            return False
    return sum((Fraction(c) * ray[j] for j, c in objective.items()), Fraction(0)) > 0


def lp(objective: Union[Mapping[int, object], Sequence], sys: LinSystem) -> LpOutcome:
    """Maximise ``objective . x`` subject to the non-strict rows of ``sys``."""
    if not isinstance(objective, Mapping):
        if len(objective) != sys.nvars:
            raise ValueError("objective length does not match variable count")
        objective = dict(enumerate(objective))
    objective = {j: Fraction(c) for j, c in objective.items() if c}
    res = _lp_exact(objective, sys)
    if res[0] == "infeasible":
        return Infeasible()
    point = tuple(_frac(v) for v in res[1])
    if not sys.satisfied_by(point):
        raise AssertionError("simplex returned a point violating the system")
    if res[0] == "optimal":
        value = sum((c * point[j] for j, c in objective.items()), Fraction(0))
        if value != _frac(res[2]):
            raise AssertionError("objective value mismatch")
        return Optimal(point, value)
    ray = tuple(_frac(v) for v in res[2])
    if not _check_ray(sys, objective, ray):
        raise AssertionError("simplex returned an invalid unbounded ray")
    return Unbounded(point, ray)


def feasible_point(sys: LinSystem) -> Optional[tuple]:
    res = lp({}, sys)
    return res.point if isinstance(res, Optimal) else None


def strict_feasible(sys: LinSystem) -> Optional[tuple]:
    """Return a point satisfying every row (strict ones strictly), or None.

    Strict rows share one margin variable eps, capped at 1, which is
    maximised over the relaxation.  The system is strictly feasible iff the
    optimal margin is positive.
    """
    if not sys.has_strict():
        return feasible_point(sys)
    relaxed = LinSystem(list(sys.names), list(sys.free), [])
    eps = relaxed.add_var("__eps")
    for row, rel, rhs in sys.rows:
        if rel == "<":
            r = dict(row)
            r[eps] = Fraction(1)
            relaxed.rows.append((r, "<=", rhs))
        elif rel == ">":
            r = dict(row)
            r[eps] = Fraction(-1)
            relaxed.rows.append((r, ">=", rhs))
        else:
            relaxed.rows.append((row, rel, rhs))
    relaxed.rows.append(({eps: Fraction(1)}, "<=", Fraction(1)))
    res = lp({eps: 1}, relaxed)
    if not isinstance(res, Optimal) or res.value <= 0:
        return None
    point = res.point[:-1]
    if not sys.satisfied_by(point):
        raise AssertionError("strict model failed verification")
    return point
