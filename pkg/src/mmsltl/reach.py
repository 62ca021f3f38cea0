"""Reachability and recurrence inside zones, compiled to Horn systems, with witnesses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import (Mms, Step, Zone, dot, intersect_all, is_bounded, member, run_endpoint, scale_schedule,
                   validate_run, vadd, vec, vscale, vsub, weight, zeros)
from .horn import HornModel, HornSystem, solve_sat


class Unsupported(ValueError):
    """A query outside the proven hypotheses (for instance an unbounded goal zone)."""


class WitnessError(AssertionError):
    """A synthesised witness failed validation: an internal soundness bug."""


RECORDER: Optional[list] = None  # when a list, every solved Horn system is appended


def solve(h: HornSystem, solver=solve_sat):
    if RECORDER is not None:
        RECORDER.append(h)
    return solver(h)


# ---------------------------------------------------------------- affine expressions


class Aff:
    """An affine expression over Horn variables: sum coeff * var + const."""

    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs=None, const=0):
        self.coeffs = dict(coeffs or {})
        self.const = const if isinstance(const, (int, Fraction)) else Fraction(const)

    @classmethod
    def var(cls, v) -> "Aff":
        return cls({v: 1})

    @classmethod
    def of(cls, item) -> "Aff":
        return item if isinstance(item, Aff) else cls({}, item)

    def __add__(self, other):
        other = Aff.of(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return Aff(out, self.const + other.const)

    def __sub__(self, other):
        return self + Aff.of(other).scale(-1)

    def scale(self, c):
        if not isinstance(c, (int, Fraction)):
            c = Fraction(c)
        return Aff({k: v * c for k, v in self.coeffs.items()}, self.const * c)

    def value(self, model: HornModel) -> Fraction:
        return self.const + sum((c * model[k] for k, c in self.coeffs.items()), Fraction(0))


def const_point(p) -> list:
    return [Aff({}, c) for c in vec(p)]


def free_point(h: HornSystem, d: int, name: str) -> list:
    return [Aff.var(fv) for fv in h.free_vec(d, name)]


def point_value(pt: list, model: HornModel) -> tuple:
    return tuple(a.value(model) for a in pt)


def constrain(h: HornSystem, aff: Aff, rel: str, rhs=0) -> None:
    h.add(list(aff.coeffs.items()), rel, rhs - aff.const)


def combine(pt: list, coeff_vars: Sequence[int], modes: Sequence) -> list:
    """pt + sum_j var_j * mode_j, componentwise."""
    out = []
    for i, a in enumerate(pt):
        acc = Aff(a.coeffs, a.const)
        for v, m in zip(coeff_vars, modes):
            if m[i] != 0:
                acc.coeffs[v] = acc.coeffs.get(v, 0) + m[i]
        out.append(acc)
    return out


def in_zone(h: HornSystem, pt: list, Z: Zone) -> None:
    for row, b in zip(Z.A, Z.b):
        acc = Aff()
        for c, a in zip(row, pt):
            if c:
                acc = acc + a.scale(c)
        constrain(h, acc, "<=", b)


def equal_points(h: HornSystem, p: list, q: list) -> None:
    for a, b in zip(p, q):
        constrain(h, a - b, "=", 0)


def zone_of(names, zones: dict, dim: int) -> Zone:
    names = sorted(names)
    if not names:
        return Zone.universe(dim)
    return intersect_all([zones[n] for n in names], dim, "&".join(names))


# ---------------------------------------------------------------- compiled blocks


@dataclass
class ThetaBlock:
    lams: list  # lams[i][j] Horn variables, i, j in 0..n-1
    alphas: list
    points: list  # points[i][j], j in 0..n


def build_theta(h: HornSystem, Z: Zone, M: Mms, x_pt: list, s_vars: Sequence[int], y_pt: list,
                tag: str = "t") -> ThetaBlock:
    """Guess a schedule of n*n steps from x to y inside Z that uses exactly the modes of s."""
    n, d = M.n, M.dim
    pts = [[free_point(h, d, f"{tag}.z{i},{j}") for j in range(n + 1)] for i in range(n)]
    lams = [[h.var(f"{tag}.l{i},{j}") for j in range(n)] for i in range(n)]
    alphas = [h.var(f"{tag}.a{j}") for j in range(n)]
    if n == 0:
        equal_points(h, x_pt, y_pt)
        in_zone(h, x_pt, Z)
        return ThetaBlock(lams, alphas, pts)
    equal_points(h, x_pt, pts[0][0])
    equal_points(h, y_pt, pts[n - 1][n])
    for i in range(n):
        for j in range(n + 1):
            in_zone(h, pts[i][j], Z)
        for j in range(1, n + 1):
            equal_points(h, pts[i][j], combine(pts[i][j - 1], [lams[i][j - 1]], [M.modes[j - 1]]))
        if i > 0:
            equal_points(h, pts[i][0], pts[i - 1][n])
    for j in range(n):
        h.add([(alphas[j], 1)] + [(lams[i][j], -1) for i in range(n)], "=", 0)
        h.iff_pos(s_vars[j], alphas[j])
    return ThetaBlock(lams, alphas, pts)


@dataclass
class LegBlock:
    """x ~>*_Z y with Parikh image lam (zone None: effect only)."""

    zone: Optional[Zone]
    x: list
    lam: list
    y: list
    fwd: Optional[ThetaBlock] = None
    bwd: Optional[ThetaBlock] = None


def build_leg(h: HornSystem, Z: Optional[Zone], M: Mms, x_pt: list, lam: Sequence[int], y_pt: list,
              tag: str = "leg") -> LegBlock:
    equal_points(h, y_pt, combine(x_pt, lam, M.modes))
    leg = LegBlock(Z, x_pt, list(lam), y_pt)
    if Z is None:
        return leg
    if Z.k == 0:
        return leg  # the whole space: every ordering stays inside
    leg.fwd = build_theta(h, Z, M, x_pt, lam, free_point(h, M.dim, f"{tag}.fx"), f"{tag}.f")
    leg.bwd = build_theta(h, Z, M, free_point(h, M.dim, f"{tag}.by"), lam, y_pt, f"{tag}.b")
    return leg


@dataclass
class GZBlock:
    zone: Zone
    z: list
    pi: list
    pi2: list
    z2: list
    fwd: Optional[ThetaBlock]


def build_gz(h: HornSystem, Z: Zone, M: Mms, z_pt: list, tag: str = "gz") -> GZBlock:
    n = M.n
    pi = [h.var(f"{tag}.pi{j}") for j in range(n)]
    pi2 = [h.var(f"{tag}.pi'{j}") for j in range(n)]
    z2 = free_point(h, M.dim, f"{tag}.z'")
    fwd = None
    in_zone(h, z_pt, Z)
    if Z.k:
        fwd = build_theta(h, Z, M, z_pt, pi, free_point(h, M.dim, f"{tag}.fx"), f"{tag}.f")
    equal_points(h, z2, combine(z_pt, pi2, M.modes))
    in_zone(h, z2, Z)
    for row in Z.A:
        acc = Aff()
        for c, a, b in zip(row, z2, z_pt):
            if c:
                acc = acc + (a - b).scale(c)
        constrain(h, acc, "<=", 0)
    for j in range(n):
        h.imply_pos(pi2[j], pi[j])
    h.add([(v, 1) for v in pi2], ">=", 1)
    return GZBlock(Z, z_pt, pi, pi2, z2, fwd)


@dataclass
class LassoBlock:
    zones: tuple  # (Z, X, Y)
    legs: list  # z->z', z'->x0, x0->y0, y0->x'
    free_legs: list  # x'->xf, xf->yf, yf->xf
    points: dict


def build_lasso(h: HornSystem, Z: Zone, X: Zone, Y: Zone, M: Mms, z_pt: list, tag: str = "ls") -> LassoBlock:
    n, d = M.n, M.dim
    XZ = intersect_all([X, Z], d, "X&Z")
    YZ = intersect_all([Y, Z], d, "Y&Z")
    pts = {k: free_point(h, d, f"{tag}.{k}") for k in ("z'", "x0", "y0", "x'", "xf", "yf")}
    in_zone(h, pts["z'"], Z)
    for k in ("x0", "x'", "xf"):
        in_zone(h, pts[k], XZ)
    for k in ("y0", "yf"):
        in_zone(h, pts[k], YZ)
    par = {k: [h.var(f"{tag}.{k}{j}") for j in range(n)] for k in ("s", "pi''", "pi", "pi'", "rho", "rho'", "rho''")}
    legs = [
        build_leg(h, Z, M, z_pt, par["s"], pts["z'"], f"{tag}.L0"),
        build_leg(h, Z, M, pts["z'"], par["pi''"], pts["x0"], f"{tag}.L1"),
        build_leg(h, Z, M, pts["x0"], par["pi"], pts["y0"], f"{tag}.L2"),
        build_leg(h, Z, M, pts["y0"], par["pi'"], pts["x'"], f"{tag}.L3"),
    ]
    free_legs = [
        build_leg(h, None, M, pts["x'"], par["rho"], pts["xf"]),
        build_leg(h, None, M, pts["xf"], par["rho'"], pts["yf"]),
        build_leg(h, None, M, pts["yf"], par["rho''"], pts["xf"]),
    ]
    for j in range(n):
        h.iff_pos(par["pi"][j], par["pi'"][j])
        h.iff_pos(par["pi'"][j], par["pi''"][j])
        h.iff_pos(par["pi''"][j], par["rho"][j])
        h.imply_pos(par["rho'"][j], par["rho"][j])
        h.imply_pos(par["rho''"][j], par["rho"][j])
    h.add([(v, 1) for v in par["rho'"] + par["rho''"]], ">=", 1)
    return LassoBlock((Z, X, Y), legs, free_legs, {"pts": pts, "par": par})


# ---------------------------------------------------------------- witnesses for legs


@dataclass
class UntilStage:
    zone: Zone
    start: tuple
    end: tuple
    blocks: list  # (Schedule, repeat) pairs
    beta: int = 1
    k: int = 0

    def validate(self, M: Mms) -> bool:
        if not validate_run(self.start, M, self.blocks, self.zone, self.end):
            return False
        # the repeated block realises a line: x_j = (1 - j/(R-1)) x_0 + j/(R-1) x_{R-1}
        for block, rep in self.blocks:
            if rep > 2:
                effect = run_endpoint(zeros(M.dim), M, block)
                last = vscale(rep - 1, effect)
                for j in (1, rep // 2, rep - 2):
                    lam = Fraction(j, rep - 1)
                    if vscale(j, effect) != vscale(lam, last):
                        return False
        return True

    def weight(self) -> Fraction:
        return sum((rep * weight(b) for b, rep in self.blocks), Fraction(0))


@dataclass
class UntilWitness:
    stages: list

    def validate(self, M: Mms) -> bool:
        for a, b in zip(self.stages, self.stages[1:]):
            if a.end != b.start:
                return False
        return all(s.validate(M) for s in self.stages)


def theta_steps(block: Optional[ThetaBlock], model: HornModel) -> list:
    """The schedule guessed by a theta block, zero-duration steps dropped."""
    if block is None:
        return []
    out = []
    for row in block.lams:
        for j, v in enumerate(row):
            if model[v] > 0:
                out.append(Step(model[v], j))
    return out


def halve_forward(steps: list) -> list:
    return [Step(s.dur / 2 ** (i + 1), s.mode) for i, s in enumerate(steps)]


def halve_backward(steps: list) -> list:
    k = len(steps)
    return [Step(s.dur / 2 ** (k - i), s.mode) for i, s in enumerate(steps)]


def halving_beta(steps: list) -> int:
    return 2 ** len(steps) * max(1, math.ceil(weight(steps)))


def synth_until(Z: Zone, M: Mms, x, lam, y, fwd_steps: list, bwd_steps: list) -> UntilStage:
    """A compressed in-zone schedule from x to y with Parikh image lam.

    Follows the constructive route: halve the forward and backward
    schedules, scale them by 1/gamma, and join them with the repeated
    line schedule of the remaining Parikh mass.
    """
    x, y = vec(x), vec(y)
    lam = [Fraction(v) for v in lam]
    if not any(lam):
        stage = UntilStage(Z, x, y, [], 1, 0)
    elif Z.k == 0:
        stage = UntilStage(Z, x, y, [(tuple(Step(v, j) for j, v in enumerate(lam) if v > 0), 1)], 1, 1)
    else:
        fwd = halve_forward(fwd_steps)
        bwd = halve_backward(bwd_steps)
        beta = max(halving_beta(fwd_steps), halving_beta(bwd_steps))
        mass = [Fraction(0)] * M.n
        for s in fwd + bwd:
            mass[s.mode] += s.dur
        gamma = 1
        for j in range(M.n):
            if mass[j] > 0:
                gamma = max(gamma, math.ceil(mass[j] / lam[j]))
        rest = [lam[j] - mass[j] / gamma for j in range(M.n)]
        middle = [Step(v, j) for j, v in enumerate(rest) if v > 0]
        blocks = []
        if fwd:
            blocks.append((tuple(Step(s.dur / gamma, s.mode) for s in fwd), 1))
        k = len(middle)
        big = beta * gamma * max(1, math.ceil(weight(middle)))
        if middle:
            reps = big * k
            blocks.append((tuple(Step(s.dur / reps, s.mode) for s in middle), reps))
        if bwd:
            blocks.append((tuple(Step(s.dur / gamma, s.mode) for s in bwd), 1))
        stage = UntilStage(Z, x, y, blocks, big, k)
    if not stage.validate(M):
        raise WitnessError("synthesised until-witness failed validation")
    return stage


def leg_stage(leg: LegBlock, M: Mms, model: HornModel) -> UntilStage:
    x = point_value(leg.x, model)
    y = point_value(leg.y, model)
    lam = [model[v] for v in leg.lam]
    return synth_until(leg.zone, M, x, lam, y, theta_steps(leg.fwd, model), theta_steps(leg.bwd, model))


# ---------------------------------------------------------------- decide_reach


@dataclass
class ReachResult:
    parikh: tuple
    target: tuple
    witness: UntilWitness
    system: HornSystem = field(repr=False)


def decide_reach(M: Mms, x, Z: Optional[Zone], target=None, target_zone: Optional[Zone] = None,
                 solver=solve_sat) -> Optional[ReachResult]:
    """Is there a finite schedule from x to target (or into target_zone) inside Z?"""
    h = HornSystem()
    lam = [h.var(f"lam{j}") for j in range(M.n)]
    y = const_point(target) if target is not None else free_point(h, M.dim, "y")
    if target_zone is not None:
        in_zone(h, y, target_zone)
    leg = build_leg(h, Z, M, const_point(x), lam, y)
    model = solve(h, solver)
    if model is None:
        return None
    if Z is None:
        yv = point_value(y, model)
        stage = UntilStage(Zone.universe(M.dim), vec(x), yv,
                           [(tuple(Step(model[v], j) for j, v in enumerate(lam) if model[v] > 0), 1)])
        if not stage.validate(M):
            raise WitnessError("effect-only witness failed validation")
    else:
        stage = leg_stage(leg, M, model)
    return ReachResult(tuple(model[v] for v in lam), stage.end, UntilWitness([stage]), h)


# ---------------------------------------------------------------- G Z


@dataclass
class GZWitness:
    zone: Zone
    z: tuple
    prefix: tuple  # plain schedule inside Z from z to z0
    z0: tuple
    period: tuple  # one pass of the recurrent schedule
    beta: int
    pi: tuple
    pi2: tuple
    z2: tuple

    def validate(self, M: Mms) -> bool:
        if not validate_run(self.z, M, self.prefix, self.zone, self.z0):
            return False
        if not validate_run(self.z0, M, self.period, self.zone):
            return False
        delta = run_endpoint(zeros(M.dim), M, self.period)
        # A delta <= 0 keeps every later repetition inside Z
        if any(dot(row, delta) > 0 for row in self.zone.A):
            return False
        return weight(self.period) > 0

    def lasso(self):
        from .core import LassoSchedule
        return LassoSchedule(self.prefix, self.period)


def _period_room(Z: Zone, M: Mms, z0, period) -> Fraction:
    """Largest c <= 1 such that every partial sum of c * period from z0 stays in Z.

    z0 is a strictly positive combination of the points of the guessed run,
    so every row tight at z0 is orthogonal to the period's modes and the
    bound is positive.  Since A * effect <= 0, later passes stay in Z too.
    """
    c = Fraction(1)
    partial = zeros(M.dim)
    for st in period:
        partial = vadd(partial, vscale(st.dur, M.modes[st.mode]))
        for row, b in zip(Z.A, Z.b):
            rise = dot(row, partial)
            if rise > 0:
                c = min(c, (b - dot(row, z0)) / rise)
    return c


def gz_witness(block: GZBlock, M: Mms, model: HornModel) -> GZWitness:
    z = point_value(block.z, model)
    pi = tuple(model[v] for v in block.pi)
    pi2 = tuple(model[v] for v in block.pi2)
    steps = theta_steps(block.fwd, model)
    prefix = tuple(halve_forward(steps))
    beta = halving_beta(steps)
    z0 = run_endpoint(z, M, prefix)
    total = sum(pi2)
    period = tuple(Step(v / (beta * total), j) for j, v in enumerate(pi2) if v > 0)
    period = scale_schedule(_period_room(block.zone, M, z0, period), period)
    w = GZWitness(block.zone, z, prefix, z0, period, beta, pi, pi2, point_value(block.z2, model))
    if not w.validate(M):
        raise WitnessError("G Z witness failed validation")
    return w


def decide_gz(M: Mms, x, Z: Zone, solver=solve_sat) -> Optional[GZWitness]:
    h = HornSystem()
    block = build_gz(h, Z, M, const_point(x))
    model = solve(h, solver)
    if model is None:
        return None
    return gz_witness(block, M, model)


# ---------------------------------------------------------------- G Z & GF X & GF Y


def _eff(M: Mms, parikh) -> tuple:
    out = zeros(M.dim)
    for j, v in enumerate(parikh):
        if v:
            out = vadd(out, vscale(v, M.modes[j]))
    return out


@dataclass
class LassoWitness:
    zones: tuple
    z: tuple
    z1: tuple
    x0: tuple
    x1: tuple
    xf: tuple
    y0: tuple
    yf: tuple
    pi: tuple
    pi1: tuple
    pi2: tuple
    rho: tuple
    rho1: tuple
    rho2: tuple
    eps: Fraction
    lam: Fraction
    stages: list  # until stages z -> z' -> x0 -> y0 -> x'
    rounds: list = field(default_factory=list)  # stages x_n -> y_n -> x_{n+1}

    def iterates(self, M: Mms, count: int) -> list:
        """(x_n, y_n) from the defining recurrences, n = 0..count."""
        eps, lam = self.eps, self.lam
        d_pi, d_pi1 = _eff(M, self.pi), _eff(M, self.pi1)
        d_rho, d_rho1, d_rho2 = _eff(M, self.rho), _eff(M, self.rho1), _eff(M, self.rho2)
        corr = vadd(d_pi1, vscale(1 / (1 + eps), vsub(d_rho, vscale(eps, vadd(d_pi, d_pi1)))))
        xs, ys = [self.x0], [self.y0]
        for n in range(1, count + 1):
            p = lam ** (n - 1)
            x = vadd(vadd(ys[-1], vscale(p, corr)), vscale(1 - p, d_rho2))
            y = vadd(vadd(x, vscale(lam ** n, d_pi)), vscale(1 - lam ** n, d_rho1))
            xs.append(x)
            ys.append(y)
        return list(zip(xs, ys))

    def check_algebra(self, M: Mms) -> bool:
        Z, X, Y = self.zones
        sup = lambda p: frozenset(j for j, v in enumerate(p) if v > 0)  # noqa: E731
        s = sup(self.rho)
        if not (sup(self.pi) == sup(self.pi1) == sup(self.pi2) == s):
            return False
        if not (sup(self.rho1) <= s and sup(self.rho2) <= s):
            return False
        if sum(self.rho1) + sum(self.rho2) < 1:
            return False
        if self.eps <= 0 or self.lam != 1 - 1 / (1 + self.eps):
            return False
        if any(self.rho[j] < self.eps * (self.pi[j] + self.pi1[j]) for j in range(M.n)):
            return False
        for p, zs in ((self.x0, (X, Z)), (self.x1, (X, Z)), (self.xf, (X, Z)), (self.y0, (Y, Z)),
                      (self.yf, (Y, Z)), (self.z1, (Z,))):
            if not all(member(zz, p) for zz in zs):
                return False
        if vadd(self.x1, _eff(M, self.rho)) != self.xf or vadd(self.xf, _eff(M, self.rho1)) != self.yf \
                or vadd(self.yf, _eff(M, self.rho2)) != self.xf:
            return False
        for n, (x, y) in enumerate(self.iterates(M, 3)):
            p = self.lam ** n
            if x != vadd(vscale(p, self.x0), vscale(1 - p, self.xf)):
                return False
            if y != vadd(vscale(p, self.y0), vscale(1 - p, self.yf)):
                return False
        return True

    def validate(self, M: Mms) -> bool:
        if not self.check_algebra(M):
            return False
        Z = self.zones[0]
        chain = [self.z, self.z1, self.x0, self.y0, self.x1]
        if len(self.stages) != 4:
            return False
        for st, a, b in zip(self.stages, chain, chain[1:]):
            if st.start != a or st.end != b or st.zone.A != Z.A or not st.validate(M):
                return False
        # rounds follow x_0 -> y_0 -> x_1 -> ... along the iterates
        count = len(self.rounds) // 2
        points = [p for xy in self.iterates(M, count) for p in xy][: 2 * count + 1]
        if len(self.rounds) != 2 * count:
            return False
        for st, a, b in zip(self.rounds, points, points[1:]):
            if st.start != a or st.end != b or st.zone.A != Z.A or not st.validate(M):
                return False
        return True


def lasso_witness(block: LassoBlock, M: Mms, model: HornModel, rounds: int = 3) -> LassoWitness:
    Z, X, Y = block.zones
    pts = {k: point_value(v, model) for k, v in block.points["pts"].items()}
    par = {k: tuple(model[v] for v in vs) for k, vs in block.points["par"].items()}
    stages = [leg_stage(leg, M, model) for leg in block.legs]
    ratios = [par["rho"][j] / (par["pi"][j] + par["pi'"][j])
              for j in range(M.n) if par["pi"][j] + par["pi'"][j] > 0]
    eps = min(ratios) if ratios else Fraction(1)
    w = LassoWitness((Z, X, Y), point_value(block.legs[0].x, model), pts["z'"], pts["x0"], pts["x'"],
                     pts["xf"], pts["y0"], pts["yf"], par["pi"], par["pi'"], par["pi''"], par["rho"],
                     par["rho'"], par["rho''"], eps, 1 - 1 / (1 + eps), stages)
    if not w.check_algebra(M):
        raise WitnessError("lasso witness failed its algebraic checks")
    seq = w.iterates(M, rounds)
    for n in range(rounds):
        (x, y), (x_next, _) = seq[n], seq[n + 1]
        for a, b in ((x, y), (y, x_next)):
            r = decide_reach(M, a, Z, target=b)
            if r is None:
                raise WitnessError("lasso round leg is not reachable inside Z")
            w.rounds.extend(r.witness.stages)
    if not w.validate(M):
        raise WitnessError("lasso witness failed validation")
    return w


def decide_gz_gfx_gfy(M: Mms, z, Z: Zone, X: Zone, Y: Zone, rounds: int = 3,
                      solver=solve_sat) -> Optional[LassoWitness]:
    if not (is_bounded(X) or is_bounded(Y) or is_bounded(Z)):
        raise Unsupported("G Z & GF X & GF Y needs at least one bounded zone")
    h = HornSystem()
    block = build_lasso(h, Z, X, Y, M, const_point(z))
    model = solve(h, solver)
    if model is None:
        return None
    return lasso_witness(block, M, model, rounds)


# ---------------------------------------------------------------- product reduction


@dataclass
class Product:
    mms: Mms
    point: tuple
    Z: Zone
    X: Zone
    Y: Zone
    blocks: int
    origin: list  # product mode index -> (block, original mode index)


def product_reduce(M: Mms, x, zones: Sequence[Zone]) -> Product:
    """Encode G Z0 & GF Z1 & ... & GF Zn as G Z & GF X & GF Y over n copies of the space."""
    Z0, goals = zones[0], list(zones[1:])
    if len(goals) == 1:
        goals = goals * 2
    n, d = len(goals), M.dim
    if n < 2:
        raise ValueError("product reduction needs at least one goal zone")
    modes, origin = [], []
    for i in range(n):
        for j, m in enumerate(M.modes):
            pm = zeros(n * d)[: i * d] + tuple(m) + zeros(n * d)[(i + 1) * d:]
            if pm not in modes:
                modes.append(pm)
                origin.append((i, j))

    def place(z: Zone, i: int) -> list:
        return [(tuple([0] * (i * d) + list(row) + [0] * ((n - i - 1) * d)), b) for row, b in zip(z.A, z.b)]

    zrows, xrows = [], []
    for i in range(n):
        zrows += place(Z0, i)
        xrows += place(goals[i], i)
    yrows = place(goals[0], 0)
    for i in range(1, n):
        for k in range(d):
            row = [0] * (n * d)
            row[k], row[i * d + k] = 1, -1
            yrows.append((tuple(row), 0))
            yrows.append((tuple(-c for c in row), 0))
    Z = Zone(tuple(r for r, _ in zrows), tuple(b for _, b in zrows), n * d, "Z")
    X = Zone(tuple(r for r, _ in xrows), tuple(b for _, b in xrows), n * d, "X")
    Y = Zone(tuple(r for r, _ in yrows), tuple(b for _, b in yrows), n * d, "Y")
    return Product(Mms(n * d, modes), tuple(vec(x)) * n, Z, X, Y, n, origin)


# ---------------------------------------------------------------- linear formulas


@dataclass
class LinearWitness:
    formula: object
    head: tuple
    stages: list
    tail: object  # GZWitness | LassoWitness
    product: Optional[Product] = None

    def validate(self, M: Mms, zones: dict) -> bool:
        phi = self.formula
        d = M.dim
        p = vec(self.head)
        if phi.head is not None and not member(zone_of(phi.head, zones, d), p):
            return False
        for (b, b2), st in zip(phi.chain, self.stages):
            if st.start != p or not st.validate(M) or st.zone.A != zone_of(b, zones, d).A:
                return False
            p = st.end
            if not member(zone_of(b2, zones, d), p):
                return False
        if isinstance(self.tail, GZWitness):
            return self.tail.z == p and self.tail.validate(M)
        if self.product is not None:
            return self.tail.z == tuple(p) * self.product.blocks and self.tail.validate(self.product.mms)
        return False


def check_linear(M: Mms, x, phi, zones: dict, rounds: int = 3, solver=solve_sat) -> Optional[LinearWitness]:
    """Does x satisfy the linear formula phi?  One Horn system for the whole formula."""
    d = M.dim
    goals = [c for c in phi.recurs if c]
    for c in goals:
        z = zone_of(c, zones, d)
        if not is_bounded(z):
            raise Unsupported(f"goal zone {' & '.join(sorted(c)) or 'true'} is unbounded")
    h = HornSystem()
    p = const_point(x)
    if phi.head is not None:
        in_zone(h, p, zone_of(phi.head, zones, d))
    legs = []
    for i, (b, b2) in enumerate(phi.chain):
        lam = [h.var(f"c{i}.lam{j}") for j in range(M.n)]
        y = free_point(h, d, f"c{i}.y")
        in_zone(h, y, zone_of(b2, zones, d))
        legs.append(build_leg(h, zone_of(b, zones, d), M, p, lam, y, f"c{i}"))
        p = y
    Z0 = zone_of(phi.always, zones, d)
    product = None
    if not goals:
        tail = build_gz(h, Z0, M, p)
    else:
        product = product_reduce(M, zeros(d), [Z0] + [zone_of(c, zones, d) for c in goals])
        big = [p[i % d] for i in range(d * product.blocks)]
        tail = build_lasso(h, product.Z, product.X, product.Y, product.mms, big)
    model = solve(h, solver)
    if model is None:
        return None
    stages = [leg_stage(leg, M, model) for leg in legs]
    if product is None:
        tw = gz_witness(tail, M, model)
    else:
        tw = lasso_witness(tail, product.mms, model, rounds)
    w = LinearWitness(phi, tuple(vec(x)), stages, tw, product)
    if not w.validate(M, zones):
        raise WitnessError("linear-formula witness failed validation")
    return w


# ---------------------------------------------------------------- negated single-zone forms


def ray_avoids(Z: Zone, x, m) -> bool:
    """True iff x + a m lies outside Z for every a > 0."""
    lo, hi = None, None
    for row, b in zip(Z.A, Z.b):
        base = b - dot(row, x)  # need a * slope <= base
        slope = dot(row, m)
        if slope == 0:
            if base < 0:
                return True
        elif slope > 0:
            bound = base / slope
            hi = bound if hi is None else min(hi, bound)
        else:
            bound = base / slope
            lo = bound if lo is None else max(lo, bound)
    if hi is not None and hi <= 0:
        return True
    return lo is not None and hi is not None and lo > hi


def check_neg_cases(M: Mms, x, form: str, Z: Zone) -> bool:
    """Closed-form decision of F!Z, GF!Z, FG!Z and G!Z for a bounded zone Z."""
    if not is_bounded(Z):
        raise Unsupported(f"zone {Z.name} is unbounded")
    if M.n == 0:
        return False
    x = vec(x)
    if form in ("F!", "GF!", "FG!"):
        return not member(Z, x) or any(any(c != 0 for c in m) for m in M.modes)
    if form == "G!":
        return not member(Z, x) and any(ray_avoids(Z, x, m) for m in M.modes)
    raise ValueError(f"unknown negated form {form!r}")
