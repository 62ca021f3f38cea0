"""Instance generators from hardness reductions, with ground truth where it is computable."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .arith import LinSystem, feasible_point
from .core import Mms, Zone, intersect_all, max_norm
from .instance import Instance
from .ltl import Atom, F, G, conj, disj, format_formula, rewrite_or_until


def bounded_zone(dim: int, bounds: dict, default=(None, None), name: str = "Z", rows=()) -> Zone:
    """Zone from per-dimension [lo, hi] bounds (None is unbounded) plus extra (coeffs, rhs) rows."""
    out = list(rows)
    for i in range(dim):
        lo, hi = bounds.get(i, default)
        e = [0] * dim
        if hi is not None:
            e[i] = 1
            out.append((list(e), hi))
        if lo is not None:
            e[i] = -1
            out.append((list(e), -Fraction(lo)))
    return Zone.from_rows(out, dim, name)


# ---------------------------------------------------------------- subset sum


def subset_sum_oracle(S: Sequence, t) -> bool:
    t = Fraction(t)
    S = [Fraction(s) for s in S]
    return any(sum(c, Fraction(0)) == t for k in range(len(S) + 1) for c in itertools.combinations(S, k))


def subset_sum_gamma(S: Sequence, t) -> Fraction:
    return max(Fraction(2), abs(Fraction(t)), len(S) * max(abs(Fraction(s)) for s in S))


def gen_subset_sum(S: Sequence, t) -> Instance:
    """A (4n+1)-dimensional instance whose F/& formula holds from 0 iff some subset of S sums to t."""
    S = [Fraction(s) for s in S]
    t = Fraction(t)
    n = len(S)
    if n == 0:
        raise ValueError("S must be nonempty")
    d = 4 * n + 1
    star = 4 * n

    def c(i, k):  # dimension c_{i,k}, i from 0, k in 1..4
        return 4 * i + k - 1

    half = Fraction(1, 2)
    modes = []
    for i in range(n):
        for col, extra in (((half, 1, 1, 0), S[i]), ((-half, 1, 1, 0), 0), ((-1, 1, 0, 1), 0), ((1, 1, 0, 1), 0)):
            m = [Fraction(0)] * d
            for k in range(4):
                m[c(i, k + 1)] = Fraction(col[k])
            m[star] = Fraction(extra)
            modes.append(tuple(m))
    gamma = subset_sum_gamma(S, t)
    zones = {}
    cs = []
    for i in range(n):
        common = {c(i, 3): (1, 1)}
        for name, b1, b2, b4 in (("Y", (half, half), (1, 2), (0, 1)), ("N", (-half, -half), (1, 2), (0, 1)),
                                 ("C", (-half, half), (2, 2), (1, 1))):
            bounds = dict(common)
            bounds[c(i, 1)] = b1
            bounds[c(i, 2)] = b2
            bounds[c(i, 4)] = b4
            z = bounded_zone(d, bounds, (-gamma, gamma), f"{name}{i + 1}")
            if name == "C":
                cs.append(z)
            else:
                zones[z.name] = z
    T = intersect_all(cs + [bounded_zone(d, {star: (t, t)}, name="t")], d, "T")
    zones = {"T": T, **zones}
    phi = conj([F(Atom("T"))] + [conj([F(Atom(f"Y{i + 1}")), F(Atom(f"N{i + 1}"))]) for i in range(n)])
    return Instance(Mms(d, tuple(modes)), zones, tuple([Fraction(0)] * d), format_formula(phi),
                    expected=subset_sum_oracle(S, t),
                    meta={"S": [str(s) for s in S], "t": str(t), "gamma": str(gamma)})


# ---------------------------------------------------------------- LP feasibility and circuit value


def lp_nonneg_feasible(Z: Zone) -> bool:
    sys = LinSystem()
    for i in range(Z.dim):
        sys.add_var(f"x{i}")
    for row, b in zip(Z.A, Z.b):
        sys.add_row({i: c for i, c in enumerate(row) if c}, "<=", b)
    return feasible_point(sys) is not None


def gen_lp_feasibility(Z: Zone) -> Instance:
    """F Z from the origin under the unit modes holds iff Z meets the nonnegative orthant."""
    d = Z.dim
    modes = tuple(tuple(Fraction(int(i == j)) for j in range(d)) for i in range(d))
    z = Z.renamed("Z")
    return Instance(Mms(d, modes), {"Z": z}, tuple([Fraction(0)] * d), "F Z", expected=lp_nonneg_feasible(z))


@dataclass(frozen=True)
class Circuit:
    """Monotone circuit over inputs x1..xn; gates (name, op, u, v) in topological order, last is the output."""

    inputs: int
    gates: tuple

    def __post_init__(self):
        seen = {f"x{i + 1}" for i in range(self.inputs)}
        if not self.gates:
            raise ValueError("a circuit needs at least one gate")
        for name, op, u, v in self.gates:
            if op not in ("and", "or"):
                raise ValueError(f"gate {name}: operation must be 'and' or 'or'")
            if u not in seen or v not in seen:
                raise ValueError(f"gate {name}: inputs must precede it")
            if name in seen:
                raise ValueError(f"duplicate wire {name}")
            seen.add(name)

    def evaluate(self, w: Sequence[int]) -> bool:
        val = {f"x{i + 1}": bool(b) for i, b in enumerate(w)}
        for name, op, u, v in self.gates:
            val[name] = (val[u] and val[v]) if op == "and" else (val[u] or val[v])
        return val[self.gates[-1][0]]


def gen_cvp(C: Circuit, w: Sequence[int]) -> Instance:
    """G Z over the unit cube holds iff the circuit outputs 1 on w."""
    wires = [f"x{i + 1}" for i in range(C.inputs)] + [g[0] for g in C.gates]
    dims = wires + ["heart", "coheart"]
    idx = {n: i for i, n in enumerate(dims)}
    d = len(dims)

    def e(*pairs):
        v = [Fraction(0)] * d
        for name, c in pairs:
            v[idx[name]] += c
        return tuple(v)

    modes = []
    for name, op, u, v in C.gates:
        if op == "and":
            modes.append(e((u, -1), (v, -1), (name, 1)))
        else:
            modes.append(e((u, -1), (name, 1)))
            modes.append(e((v, -1), (name, 1)))
    out = C.gates[-1][0]
    modes.append(e((out, -1), ("heart", -1), ("coheart", 1)))
    modes.append(e((out, 1), ("heart", 1), ("coheart", -1)))
    uniq = []
    for m in modes:
        if m not in uniq:
            uniq.append(m)
    x = e(("heart", 1), *[(f"x{i + 1}", int(b)) for i, b in enumerate(w)])
    Z = bounded_zone(d, {}, (0, 1), "Z")
    return Instance(Mms(d, tuple(uniq)), {"Z": Z}, x, "G Z", expected=C.evaluate(w), meta={"dims": dims})


# ---------------------------------------------------------------- Petri nets with inhibitor arcs


@dataclass(frozen=True)
class PetriNet:
    """Places, transitions, per-transition tests ('>=' or '=' per place) and pre/post vectors."""

    places: tuple
    transitions: tuple
    comp: dict
    pre: dict
    post: dict

    def __post_init__(self):
        if set(self.places) & set(self.transitions):
            raise ValueError("places and transitions must be disjoint")
        for t in self.transitions:
            for table in (self.comp, self.pre, self.post):
                if len(table[t]) != len(self.places):
                    raise ValueError(f"transition {t}: vector length differs from the place count")
            if any(c not in (">=", "=") for c in self.comp[t]):
                raise ValueError(f"transition {t}: tests must be '>=' or '='")
            if any(v < 0 for v in self.pre[t]) or any(v < 0 for v in self.post[t]):
                raise ValueError(f"transition {t}: arc weights must be nonnegative")

    def delta(self, t) -> tuple:
        return tuple(b - a for a, b in zip(self.pre[t], self.post[t]))

    def is_normalized(self) -> bool:
        return all(not (a > 0 and b > 0) for t in self.transitions for a, b in zip(self.pre[t], self.post[t]))

    def enabled(self, x, t) -> bool:
        if any(c == "=" and v != 0 for c, v in zip(self.comp[t], x)):
            return False
        return all(v >= a for v, a in zip(x, self.pre[t]))

    def fire(self, x, t) -> tuple:
        return tuple(v + dv for v, dv in zip(x, self.delta(t)))


def normalize(net: PetriNet) -> tuple:
    """Split every transition that consumes from and produces into one place.

    The first half consumes and applies the rest of the effect, marking a
    fresh lock place; the second half produces and clears the lock.  Every
    other transition tests the lock for zero.  Returns the new net and the
    embedding of old markings (lock places are appended, set to 0).
    """
    if net.is_normalized():
        return net, lambda x: tuple(x)
    bad = [t for t in net.transitions if any(a > 0 and b > 0 for a, b in zip(net.pre[t], net.post[t]))]
    locks = [f"lock_{t}" for t in bad]
    places = tuple(net.places) + tuple(locks)
    k = len(net.places)
    comp, pre, post, trans = {}, {}, {}, []

    def widen(v, extra=None):
        out = list(v) + [0] * len(locks)
        for i, c in (extra or {}).items():
            out[i] = c
        return tuple(out)

    for t in net.transitions:
        if t not in bad:
            trans.append(t)
            comp[t] = tuple(list(net.comp[t]) + ["="] * len(locks))
            pre[t], post[t] = widen(net.pre[t]), widen(net.post[t])
            continue
        lock = k + bad.index(t)
        shared = [p for p in range(k) if net.pre[t][p] > 0 and net.post[t][p] > 0]
        t_pre, t_post = f"{t}_pre", f"{t}_post"
        trans += [t_pre, t_post]
        comp[t_pre] = tuple(list(net.comp[t]) + ["="] * len(locks))
        pre[t_pre] = widen(net.pre[t])
        post[t_pre] = widen([0 if p in shared else net.post[t][p] for p in range(k)], {lock: 1})
        comp[t_post] = tuple([">="] * k + [">=" if i + k == lock else "=" for i in range(len(locks))])
        pre[t_post] = widen([0] * k, {lock: 1})
        post[t_post] = widen([net.post[t][p] if p in shared else 0 for p in range(k)])
    out = PetriNet(places, tuple(trans), comp, pre, post)
    return out, lambda x: tuple(x) + (0,) * len(locks)


def petri_reachable(net: PetriNet, src, tgt, max_tokens: int = 6, max_states: int = 20000) -> Optional[bool]:
    """Bounded breadth-first search for src ->+ tgt; None when the bound is hit."""
    src, tgt = tuple(src), tuple(tgt)
    frontier = [src]
    seen = set()
    truncated = False
    while frontier:
        nxt = []
        for x in frontier:
            for t in net.transitions:
                if net.enabled(x, t):
                    y = net.fire(x, t)
                    if y == tgt:
                        return True
                    if sum(y) > max_tokens:
                        truncated = True
                        continue
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
                        if len(seen) > max_states:
                            return None
        frontier = nxt
    return None if truncated else False


@dataclass
class PetriEncoding:
    """The inner scaling-closed encoding and its bounded, wrapped variants."""

    net: PetriNet
    inner: Mms
    inner_zones: dict  # scaling-closed zones before bounding
    x: tuple
    x_target: tuple
    gamma: Fraction
    bounded_zones: dict
    wrapped: Mms
    wrapped_zones: dict
    start: tuple
    target: tuple
    dims: list


def _inner(net: PetriNet, src, tgt):
    P, T = list(net.places), list(net.transitions)
    dims = [f"p:{p}" for p in P] + [f"{t}_{I}" for t in T for I in "ABC"]
    idx = {n: i for i, n in enumerate(dims)}
    d = len(dims)
    modes = []
    for t in T:
        delta = net.delta(t)
        for col in ((-1, 1, 0), (0, -1, 1), (1, 0, -1)):
            m = [Fraction(0)] * d
            if col == (0, -1, 1):
                for i, v in enumerate(delta):
                    m[i] = Fraction(v)
            for I, v in zip("ABC", col):
                m[idx[f"{t}_{I}"]] = Fraction(v)
            modes.append(tuple(m))

    def zone(name, t, own, place_test):
        rows = []
        for i in range(len(P)):
            e = [0] * d
            e[i] = -1
            rows.append((e, 0))
            if place_test is not None and place_test[i] == "=":
                e2 = [0] * d
                e2[i] = 1
                rows.append((e2, 0))
        for s in T:
            spec = own if s == t else ("ge", "eq", "eq")
            for I, kind in zip("ABC", spec):
                e = [0] * d
                e[idx[f"{s}_{I}"]] = -1
                rows.append((list(e), 0))
                if kind == "eq":
                    e[idx[f"{s}_{I}"]] = 1
                    rows.append((e, 0))
        return Zone.from_rows(rows, d, name)

    zones = {"A": zone("A", T[0] if T else None, ("ge", "eq", "eq"), None)}
    for t in T:
        zones[f"Ap_{t}"] = zone(f"Ap_{t}", t, ("ge", "ge", "eq"), None)
        zones[f"B_{t}"] = zone(f"B_{t}", t, ("eq", "ge", "eq"), net.comp[t])
        zones[f"Bp_{t}"] = zone(f"Bp_{t}", t, ("eq", "ge", "ge"), None)
        zones[f"C_{t}"] = zone(f"C_{t}", t, ("eq", "eq", "ge"), None)
        zones[f"Cp_{t}"] = zone(f"Cp_{t}", t, ("ge", "eq", "ge"), None)

    def point(marking):
        v = [Fraction(0)] * d
        for i, c in enumerate(marking):
            v[i] = Fraction(c)
        for t in T:
            v[idx[f"{t}_A"]] = Fraction(1)
        return tuple(v)

    return Mms(d, tuple(modes)), zones, point(src), point(tgt), dims


def gen_petri(net: PetriNet, src, tgt) -> PetriEncoding:
    """Encode reachability of a normalized net with inhibitor arcs over bounded zones."""
    if not net.is_normalized():
        raise ValueError("net has a transition that consumes from and produces into one place; normalize it first")
    if not net.transitions:
        raise ValueError("net needs at least one transition")
    M, zones, x, x2, dims = _inner(net, src, tgt)
    d = M.dim
    gamma = max_norm(x) + M.norm()
    box = {i: (-gamma, gamma) for i in range(d)}
    bounded = {n: intersect_all([z, bounded_zone(d, box, name="box")], d, n) for n, z in zones.items()}
    # wrapper dimensions: top, start, bottom, star, then the inner ones
    D = d + 4
    TOP, START, BOT, STAR = range(4)

    def lift(head, rest):
        return tuple(Fraction(c) for c in head) + tuple(Fraction(c) for c in rest)

    zero = [0] * d
    wmodes = [lift((-1, 0, 0, 1), x), lift((-1, 0, 0, 0), zero)]
    wmodes += [lift((0, 1, 0, 0), m) for m in M.modes]
    wmodes += [lift((0, 0, 1, -1), [-c for c in x2]), lift((0, 0, 1, 0), zero)]
    wzones = {}
    for n, z in bounded.items():
        rows = [([0] * 4 + list(r), b) for r, b in zip(z.A, z.b)]
        wzones[n] = bounded_zone(D, {TOP: (0, 0), BOT: (0, 0), START: (0, 1), STAR: (0, 1)}, name=n, rows=rows)
    rest = {i: (-gamma, gamma) for i in range(4, D)}
    wzones["Atop"] = bounded_zone(D, {**rest, TOP: (0, 1), START: (0, 0), BOT: (0, 0), STAR: (0, 1)}, name="Atop")
    wzones["Abot"] = bounded_zone(D, {**rest, TOP: (0, 0), START: (1, 1), BOT: (0, 1), STAR: (0, 1)}, name="Abot")
    start = lift((1, 0, 0, 0), zero)
    target = lift((0, 1, 1, 0), zero)
    return PetriEncoding(net, M, zones, x, x2, gamma, bounded, Mms(D, tuple(wmodes)), wzones, start, target,
                         ["top", "start", "bottom", "star"] + dims)


def gen_petri_gor(net: PetriNet, src, tgt) -> Instance:
    """G of a disjunction of zones, with an extra dimension that idles once the target is reached."""
    enc = gen_petri(net, src, tgt)
    M, D = enc.wrapped, enc.wrapped.dim + 1
    modes = [(Fraction(0),) + m for m in M.modes]
    modes += [(Fraction(1),) + (Fraction(0),) * M.dim, (Fraction(-1),) + (Fraction(0),) * M.dim]
    zones = {}
    for n, z in enc.wrapped_zones.items():
        rows = [([0] + list(r), b) for r, b in zip(z.A, z.b)]
        zones[n] = bounded_zone(D, {0: (0, 0)}, name=n, rows=rows)
    zones["Aheart"] = bounded_zone(D, {0: (0, 1), **{i + 1: (c, c) for i, c in enumerate(enc.target)}},
                                   name="Aheart")
    phi = G(disj([Atom(n) for n in zones]))
    return Instance(Mms(D, tuple(modes)), zones, (Fraction(0),) + enc.start, format_formula(phi),
                    meta={"construction": "petri-gor"})


def gen_petri_until(net: PetriNet, src, tgt) -> Instance:
    """(A_1 | ... | A_k) U target, rewritten without disjunctions."""
    enc = gen_petri(net, src, tgt)
    zones = dict(enc.wrapped_zones)
    zones["Xt"] = Zone.point(enc.target, "Xt")
    phi = rewrite_or_until([Atom(n) for n in enc.wrapped_zones], Atom("Xt"))
    return Instance(enc.wrapped, zones, enc.start, format_formula(phi), meta={"construction": "petri-until"})


# ---------------------------------------------------------------- seeded random corpora


def random_subset_sum(rng, size: int) -> tuple:
    """A rational subset-sum pair (S, t); t is a subset sum about half the time."""
    S = [Fraction(rng.randint(1, 12), rng.choice((1, 1, 2, 3))) for _ in range(size)]
    if rng.random() < 0.5:
        t = sum((s for s in S if rng.random() < 0.5), Fraction(0))
    else:
        t = Fraction(rng.randint(0, 24), rng.choice((1, 2)))
    return S, t


def random_bounded_zone(rng, dim: int, name: str = "Z") -> Zone:
    """A box with a few random cuts; may be empty."""
    rows = []
    for i in range(dim):
        lo = rng.randint(-3, 2)
        rows.append(([-int(i == j) for j in range(dim)], -lo))
        rows.append(([int(i == j) for j in range(dim)], lo + rng.randint(0, 3)))
    for _ in range(rng.randint(0, 2)):
        rows.append(([rng.randint(-2, 2) for _ in range(dim)], rng.randint(-2, 3)))
    return Zone.from_rows(rows, dim, name)


def random_circuit(rng, inputs: int, gates: int) -> Circuit:
    wires = [f"x{i + 1}" for i in range(inputs)]
    out = []
    for g in range(gates):
        u, v = rng.choice(wires), rng.choice(wires)
        name = f"g{g + 1}"
        out.append((name, rng.choice(("and", "or")), u, v))
        wires.append(name)
    return Circuit(inputs, tuple(out))


def random_petri_net(rng, places: int, transitions: int) -> PetriNet:
    """A normalized net: no transition consumes from and produces into one place."""
    P = tuple(f"p{i + 1}" for i in range(places))
    T = tuple(f"t{i + 1}" for i in range(transitions))
    comp, pre, post = {}, {}, {}
    for t in T:
        pre_t, post_t, comp_t = [], [], []
        for _ in P:
            r = rng.random()
            pre_t.append(1 if r < 0.35 else 0)
            post_t.append(1 if 0.35 <= r < 0.7 else 0)
            comp_t.append("=" if r >= 0.9 else ">=")
        comp[t], pre[t], post[t] = tuple(comp_t), tuple(pre_t), tuple(post_t)
    return PetriNet(P, T, comp, pre, post)


def net_from_json(data) -> tuple:
    """(net, src, tgt) from {"places", "transitions", "comp", "pre", "post", "src", "tgt"}."""
    net = PetriNet(tuple(data["places"]), tuple(data["transitions"]),
                   {t: tuple(v) for t, v in data["comp"].items()},
                   {t: tuple(v) for t, v in data["pre"].items()},
                   {t: tuple(v) for t, v in data["post"].items()})
    return net, tuple(data["src"]), tuple(data["tgt"])


def net_to_json(net: PetriNet, src, tgt) -> dict:
    return {"places": list(net.places), "transitions": list(net.transitions),
            "comp": {t: list(v) for t, v in net.comp.items()}, "pre": {t: list(v) for t, v in net.pre.items()},
            "post": {t: list(v) for t, v in net.post.items()}, "src": list(src), "tgt": list(tgt)}


def petri_instance(enc: PetriEncoding) -> Instance:
    """The wrapped encoding as an instance; the question is start ->* target inside the zone union."""
    from .instance import rat_str

    return Instance(enc.wrapped, dict(enc.wrapped_zones), enc.start, "",
                    meta={"construction": "petri", "target": [rat_str(c) for c in enc.target],
                          "inner_dim": enc.inner.dim, "gamma": rat_str(enc.gamma), "dims": enc.dims})
