"""Fragment dispatch: P routes, the NP pipeline and refusals for undecidable fragments."""
from __future__ import annotations

import itertools
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .automaton import LinearFormula, build, enumerate_lps, lps_to_linear
from .core import Mms, LassoSchedule, Step, chi, is_bounded, vec
from .ltl import And, Atom, F, G, Not, Or, TrueF, U, atoms_of, eval_lasso, operators, rewrite_neg_fg
from . import reach


# ---------------------------------------------------------------- verdicts


@dataclass
class Verdict:
    code = -1
    route: str = ""

    @property
    def name(self) -> str:
        return type(self).__name__


@dataclass
class Holds(Verdict):
    code = 0
    witness: object = None
    lps_index: Optional[int] = None
    linear: Optional[LinearFormula] = None


@dataclass
class Fails(Verdict):
    code = 1
    reason: str = ""


@dataclass
class UndecidableFragment(Verdict):
    code = 2
    reason: str = ""


@dataclass
class Unsupported(Verdict):
    code = 3
    reason: str = ""


# ---------------------------------------------------------------- routing


TEMPORAL = frozenset({"F", "G", "U"})
P_ROUTES = {"FG!": frozenset({"F", "G", "!"}), "G&": frozenset({"G", "&"}), "F|": frozenset({"F", "|"})}
NP_ROUTES = {"NP": frozenset({"F", "G", "&"}), "NP|": frozenset({"F", "&", "|"})}


def route(ops) -> str:
    """Route for an operator set: 'prop', a P route, an NP route, or 'undecidable'."""
    ops = frozenset(ops)
    if not ops & TEMPORAL:
        return "prop"
    if "U" in ops:
        return "undecidable"
    for name, allowed in P_ROUTES.items():
        if ops <= allowed:
            return name
    for name, allowed in NP_ROUTES.items():
        if ops <= allowed:
            return name
    return "undecidable"


def complexity(ops) -> str:
    r = route(ops)
    if r in P_ROUTES:
        return "P"
    if r in NP_ROUTES:
        return "NP"
    return r


# ---------------------------------------------------------------- witnesses for negated forms


def ray_interval(Z, x, m) -> Optional[tuple]:
    """The closed set of reals a with x + a m in Z as (lo, hi), None for +-infinity; or 'empty'."""
    lo, hi = None, None
    for row, b in zip(Z.A, Z.b):
        base = b - sum(a * c for a, c in zip(row, x))
        slope = sum(a * c for a, c in zip(row, m))
        if slope == 0:
            if base < 0:
                return "empty"
        elif slope > 0:
            hi = base / slope if hi is None else min(hi, base / slope)
        else:
            lo = base / slope if lo is None else max(lo, base / slope)
    if lo is not None and hi is not None and lo > hi:
        return "empty"
    return lo, hi


@dataclass
class NegWitness:
    """Run one mode forever; from exit_time on the point never returns to Z."""

    form: str
    zone: object
    x: tuple
    mode: int
    exit_time: Fraction

    def validate(self, M: Mms) -> bool:
        if self.form == "G!" and self.exit_time != 0:
            return False
        iv = ray_interval(self.zone, self.x, M.modes[self.mode])
        if iv == "empty":
            return True
        hi = iv[1]
        return hi is not None and hi < self.exit_time

    def schedule(self) -> LassoSchedule:
        prefix = (Step(self.exit_time, self.mode),) if self.exit_time > 0 else ()
        return LassoSchedule(prefix, (Step(1, self.mode),))


def neg_witness(M: Mms, x, form: str, Z) -> NegWitness:
    x = vec(x)
    best = None
    for j, m in enumerate(M.modes):
        iv = ray_interval(Z, x, m)
        if iv == "empty":
            t = Fraction(0)
        else:
            lo, hi = iv
            if hi is None:
                continue  # only a zero mode with x inside, or a ray staying in Z
            t = Fraction(0) if hi < 0 else hi + 1
        if form == "G!" and t != 0:
            continue
        if best is None or t < best.exit_time:
            best = NegWitness(form, Z, x, j, t)
    if best is None or not best.validate(M):
        raise reach.WitnessError("negated-form witness failed validation")
    return best


# ---------------------------------------------------------------- P routes


def _linear_of_positive(phi) -> LinearFormula:
    """Linear formula of a positive canonical F/G chain over one atom or true."""
    ops = []
    p = phi
    while isinstance(p, (F, G)):
        ops.append("F" if isinstance(p, F) else "G")
        p = p.arg
    atom = frozenset() if isinstance(p, TrueF) else frozenset({p.name})
    key = "".join(ops)
    if key == "":
        return LinearFormula(atom, (), frozenset(), ())
    if key == "F":
        return LinearFormula(None, ((frozenset(), atom),), frozenset(), ())
    if key == "G":
        return LinearFormula(None, (), atom, ())
    if key == "GF":
        return LinearFormula(None, (), frozenset(), (atom,))
    if key == "FG":
        return LinearFormula(None, ((frozenset(), atom),), atom, ())
    raise ValueError(f"non-canonical chain {key}")


def _check_linear(x, M, lin, zones) -> Verdict:
    try:
        w = reach.check_linear(M, x, lin, zones)
    except reach.Unsupported as e:
        return Unsupported(reason=str(e))
    if w is None:
        return Fails()
    return Holds(witness=w, linear=lin)


def _route_fg_neg(x, M, phi, zones) -> Verdict:
    canon = rewrite_neg_fg(phi)
    if canon == Not(TrueF()):
        return Fails(reason="false")
    ops, p = [], canon
    while isinstance(p, (F, G)):
        ops.append("F" if isinstance(p, F) else "G")
        p = p.arg
    if isinstance(p, Not):
        Z = zones[p.arg.name]
        form = "".join(ops) + "!"
        try:
            ok = reach.check_neg_cases(M, x, form, Z)
        except reach.Unsupported as e:
            return Unsupported(reason=str(e))
        return Holds(witness=neg_witness(M, x, form, Z)) if ok else Fails()
    return _check_linear(x, M, _linear_of_positive(canon), zones)


def _route_g_and(x, M, phi, zones) -> Verdict:
    now, always = set(), set()

    def collect(p, under_g):
        if isinstance(p, And):
            collect(p.left, under_g)
            collect(p.right, under_g)
        elif isinstance(p, G):
            collect(p.arg, True)
        elif isinstance(p, Atom):
            (always if under_g else now).add(p.name)

    collect(phi, False)
    return _check_linear(x, M, LinearFormula(frozenset(now), (), frozenset(always), ()), zones)


def _route_f_or(x, M, phi, zones) -> Verdict:
    from .ltl import distribute

    disjuncts = []

    def collect(p):
        if isinstance(p, Or):
            collect(p.left)
            collect(p.right)
        else:
            disjuncts.append(p)

    collect(distribute(phi))
    unsupported = None
    for d in disjuncts:
        v = _check_linear(x, M, _linear_of_positive(d), zones)
        if isinstance(v, Holds):
            return v
        if isinstance(v, Unsupported):
            unsupported = v
    return unsupported or Fails()


# ---------------------------------------------------------------- NP routes


def _lps_job(args):
    x, M, lin, zones = args
    return _check_linear(x, M, lin, zones)


def check_np(x, M: Mms, phi, zones: dict, order: Optional[int] = None, jobs: int = 1,
             deadline: Optional[float] = None) -> Verdict:
    """Stream the path schemes of the automaton of phi and check each linear formula.

    ``order`` shuffles the stream with that seed; the verdict does not depend
    on it.  ``deadline`` (a time.monotonic value) turns an unfinished stream
    into Unsupported.
    """
    unbounded = sorted(a for a in atoms_of(phi) if not is_bounded(zones[a]))
    if unbounded:
        return Unsupported(route="NP", reason=f"zone {unbounded[0]} is unbounded")
    aut = build(phi)
    stream = ((i, lps_to_linear(aut, s)) for i, s in enumerate(enumerate_lps(aut)))
    if order is not None:
        stream = list(stream)
        random.Random(order).shuffle(stream)
    unsupported = None
    count = 0
    if jobs > 1:
        indexed = list(stream)
        count = len(indexed)
        with ProcessPoolExecutor(jobs) as pool:
            verdicts = list(pool.map(_lps_job, [(x, M, lin, zones) for _, lin in indexed]))
        holds = [(i, v) for (i, _), v in zip(indexed, verdicts) if isinstance(v, Holds)]
        if holds:
            i, v = min(holds, key=lambda t: t[0])
            v.lps_index = i
            return v
        unsupported = next((v for v in verdicts if isinstance(v, Unsupported)), None)
    else:
        for i, lin in stream:
            if deadline is not None and time.monotonic() > deadline:
                return Unsupported(reason=f"time budget exhausted after {count} path schemes")
            count += 1
            v = _check_linear(x, M, lin, zones)
            if isinstance(v, Holds):
                v.lps_index = i
                return v
            if isinstance(v, Unsupported):
                unsupported = v
    return unsupported or Fails(reason=f"none of {count} path schemes holds")


def or_selections(phi) -> list:
    """Every choice of one side per disjunction node, before deduplication."""
    nodes = []

    def index(p):
        if isinstance(p, Or):
            nodes.append(p)
        for child in _children(p):
            index(child)

    index(phi)
    out = []
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        pick = {id(n): b for n, b in zip(nodes, bits)}

        def rebuild(p):
            if isinstance(p, Or):
                return rebuild(p.right if pick[id(p)] else p.left)
            if isinstance(p, (And, U)):
                return type(p)(rebuild(p.left), rebuild(p.right))
            if isinstance(p, (F, G, Not)):
                return type(p)(rebuild(p.arg))
            return p

        out.append(rebuild(phi))
    return out


def or_eliminate(phi) -> Iterator:
    seen = set()
    for s in or_selections(phi):
        if s not in seen:
            seen.add(s)
            yield s


def _children(p):
    if isinstance(p, (And, Or, U)):
        return (p.left, p.right)
    if isinstance(p, (F, G, Not)):
        return (p.arg,)
    return ()


# ---------------------------------------------------------------- entry point


def check(x, M: Mms, phi, zones: dict, jobs: int = 1, deadline: Optional[float] = None) -> Verdict:
    x = vec(x)
    if len(x) != M.dim:
        raise ValueError("point and MMS dimensions differ")
    for a in atoms_of(phi):
        if a not in zones:
            raise ValueError(f"undeclared zone {a!r}")
        if zones[a].dim != M.dim:
            raise ValueError(f"zone {a!r} has the wrong dimension")
    ops = operators(phi)
    r = route(ops)
    if r == "undecidable":
        shown = "{" + ",".join(sorted(ops)) + "}"
        if "U" in ops:
            reason = f"operators {shown} include U; model checking is undecidable"
        else:
            reason = f"operators {shown} lie in an undecidable fragment; eval-trace can still check a given run"
        return UndecidableFragment(route=r, reason=reason)
    if M.n == 0:
        return Fails(route=r, reason="no modes, so no non-Zeno schedule exists")
    if r == "prop":
        ok = eval_lasso(_single_letter(chi(list(_named(zones)), x)), phi)
        v = Holds(witness=LassoSchedule((), (Step(1, 0),))) if ok else Fails()
    elif r == "FG!":
        v = _route_fg_neg(x, M, phi, zones)
    elif r == "G&":
        v = _route_g_and(x, M, phi, zones)
    elif r == "F|":
        v = _route_f_or(x, M, phi, zones)
    elif r == "NP":
        v = check_np(x, M, phi, zones, jobs=jobs, deadline=deadline)
    else:
        v = Fails()
        for sel in or_eliminate(phi):
            sub = check_np(x, M, sel, zones, jobs=jobs, deadline=deadline)
            if isinstance(sub, Holds):
                v = sub
                break
            if isinstance(sub, Unsupported):
                v = sub
    v.route = r
    return v


def _named(zones: dict):
    return [z.renamed(name) for name, z in sorted(zones.items())]


def _single_letter(letter):
    from .core import TraceWord

    return TraceWord((), (letter,))
