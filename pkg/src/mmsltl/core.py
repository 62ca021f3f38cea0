"""Exact geometry, schedules, executions and traces of multi-mode systems."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

from .arith import LinSystem, Optimal, Unbounded, lp

Rat = Fraction
Vec = tuple


def vec(*xs) -> Vec:
    if len(xs) == 1 and not isinstance(xs[0], (int, Fraction, str)):
        xs = tuple(xs[0])
    return tuple(Fraction(x) for x in xs)


def zeros(d: int) -> Vec:
    return (Fraction(0),) * d


def vadd(u: Vec, v: Vec) -> Vec:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u: Vec, v: Vec) -> Vec:
    return tuple(a - b for a, b in zip(u, v))


def vscale(c, u: Vec) -> Vec:
    return tuple(c * a for a in u)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def max_norm(u: Sequence) -> Fraction:
    return max((abs(Fraction(a)) for a in u), default=Fraction(0))


def lcm_of_denominators(values: Iterable[Fraction]) -> int:
    m = 1
    for v in values:
        m = m * Fraction(v).denominator // math.gcd(m, Fraction(v).denominator)
    return m


@dataclass(frozen=True)
class Mms:
    """A finite, ordered, duplicate-free set of rational mode vectors."""

    dim: int
    modes: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("an MMS needs dimension at least 1")
        modes = tuple(vec(m) for m in self.modes)
        for m in modes:
            if len(m) != self.dim:
                raise ValueError(f"mode {m} does not have dimension {self.dim}")
        if len(set(modes)) != len(modes):
            raise ValueError("duplicate modes")
        object.__setattr__(self, "modes", modes)

    @property
    def n(self) -> int:
        return len(self.modes)

    def norm(self) -> Fraction:
        return max((max_norm(m) for m in self.modes), default=Fraction(0))


@dataclass(frozen=True)
class Zone:
    """The polytope {x : A x <= b} with integer A and b."""

    A: tuple
    b: tuple
    dim: int
    name: str = "Z"

    def __post_init__(self):
        A = tuple(tuple(int(c) for c in row) for row in self.A)
        b = tuple(int(c) for c in self.b)
        if len(A) != len(b):
            raise ValueError("A and b have different row counts")
        for row in A:
            if len(row) != self.dim:
                raise ValueError("row length does not match zone dimension")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_rows(cls, rows, dim: int, name: str = "Z") -> "Zone":
        """Build from rational rows ``(coeffs, rhs)`` meaning coeffs . x <= rhs."""
        A, b = [], []
        for coeffs, rhs in rows:
            coeffs = [Fraction(c) for c in coeffs]
            rhs = Fraction(rhs)
            m = lcm_of_denominators(coeffs + [rhs])
            A.append([int(c * m) for c in coeffs])
            b.append(int(rhs * m))
        return cls(tuple(map(tuple, A)), tuple(b), dim, name)

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence, name: str = "Z") -> "Zone":
        d = len(lo)
        rows = []
        for i in range(d):
            e = [0] * d
            if hi[i] is not None:
                e[i] = 1
                rows.append((list(e), hi[i]))
            if lo[i] is not None:
                e[i] = -1
                rows.append((list(e), -Fraction(lo[i])))
        return cls.from_rows(rows, d, name)

    @classmethod
    def universe(cls, dim: int, name: str = "true") -> "Zone":
        return cls((), (), dim, name)

    @classmethod
    def point(cls, p: Sequence, name: str = "P") -> "Zone":
        return cls.box(p, p, name)

    @property
    def k(self) -> int:
        return len(self.b)

    def renamed(self, name: str) -> "Zone":
        return Zone(self.A, self.b, self.dim, name)

    def slack(self, x: Sequence) -> tuple:
        """b - A x, componentwise."""
        return tuple(bi - dot(row, x) for row, bi in zip(self.A, self.b))

    def __contains__(self, x) -> bool:
        return member(self, x)


def _check_dim(z: Zone, x: Sequence) -> None:
    if len(x) != z.dim:
        raise ValueError(f"dimension mismatch: zone {z.name} has dim {z.dim}, point has {len(x)}")


def member(z: Zone, x: Sequence) -> bool:
    _check_dim(z, x)
    return all(dot(row, x) <= bi for row, bi in zip(z.A, z.b))


def _zone_system(z: Zone) -> LinSystem:
    sys = LinSystem()
    for i in range(z.dim):
        sys.add_var(f"x{i}", free=True)
    for row, bi in zip(z.A, z.b):
        sys.add_row(dict(enumerate(row)), "<=", bi)
    return sys


def is_empty(z: Zone) -> bool:
    return not isinstance(lp({}, _zone_system(z)), Optimal)


def intersect(z1: Zone, z2: Zone, name: Optional[str] = None) -> Zone:
    if z1.dim != z2.dim:
        raise ValueError("dimension mismatch")
    return Zone(z1.A + z2.A, z1.b + z2.b, z1.dim, name or f"{z1.name}&{z2.name}")


def intersect_all(zones: Sequence[Zone], dim: int, name: str = "Z") -> Zone:
    A, b = (), ()
    for z in zones:
        if z.dim != dim:
            raise ValueError("dimension mismatch")
        A += z.A
        b += z.b
    return Zone(A, b, dim, name)


def is_bounded(z: Zone) -> bool:
    """True iff the recession cone {x : A x <= 0} is trivial.

    Decided by maximising +x_i and -x_i over the cone intersected with the
    unit box; any positive optimum exhibits a nonzero recession direction.
    """
    if z.dim == 0:
        return True
    sys = LinSystem()
    for i in range(z.dim):
        sys.add_var(f"x{i}", free=True)
    for row in z.A:
        sys.add_row(dict(enumerate(row)), "<=", 0)
    for i in range(z.dim):
        sys.add_row({i: 1}, "<=", 1)
        sys.add_row({i: 1}, ">=", -1)
    for i in range(z.dim):
        for sign in (1, -1):
            res = lp({i: sign}, sys)
            if isinstance(res, Unbounded) or (isinstance(res, Optimal) and res.value > 0):
                return False
    return True


def zone_from_vertices_2d(points: Sequence, name: str = "Z") -> Zone:
    """Half-space form of the convex hull of planar rational points."""
    pts = sorted(set(vec(p) for p in points))
    if len(pts) < 3:
        raise ValueError("need at least three points")

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]  # counter-clockwise
    if len(hull) < 3:
        raise ValueError("points are collinear")
    rows = []
    for i, p in enumerate(hull):
        q = hull[(i + 1) % len(hull)]
        # interior lies to the left of p->q: (q-p) x (x-p) >= 0
        a = (q[1] - p[1], -(q[0] - p[0]))
        rows.append((a, dot(a, p)))
    return Zone.from_rows(rows, 2, name)


# ---------------------------------------------------------------- schedules


@dataclass(frozen=True)
class Step:
    dur: Fraction
    mode: int

    def __post_init__(self):
        object.__setattr__(self, "dur", Fraction(self.dur))
        if self.dur <= 0:
            raise ValueError("step durations must be strictly positive")


Schedule = tuple


def schedule(*steps) -> Schedule:
    """Build a schedule from ``(duration, mode_index)`` pairs."""
    return tuple(s if isinstance(s, Step) else Step(Fraction(s[0]), s[1]) for s in steps)


@dataclass(frozen=True)
class LassoSchedule:
    prefix: Schedule
    period: Schedule

    def __post_init__(self):
        object.__setattr__(self, "prefix", schedule(*self.prefix))
        object.__setattr__(self, "period", schedule(*self.period))
        if not self.period:
            raise ValueError("lasso period must be nonempty")


@dataclass(frozen=True)
class ScheduleStats:
    effect: Vec
    parikh: dict
    support: frozenset
    weight: Fraction


def _check_modes(pi: Schedule, M: Mms) -> None:
    for s in pi:
        if not 0 <= s.mode < M.n:
            raise ValueError(f"invalid mode index {s.mode}")


def schedule_stats(pi: Schedule, M: Mms) -> ScheduleStats:
    _check_modes(pi, M)
    effect = zeros(M.dim)
    parikh = {}
    for s in pi:
        effect = vadd(effect, vscale(s.dur, M.modes[s.mode]))
        parikh[s.mode] = parikh.get(s.mode, Fraction(0)) + s.dur
    weight = sum((s.dur for s in pi), Fraction(0))
    return ScheduleStats(effect, parikh, frozenset(parikh), weight)


def parikh_vector(pi: Schedule, n: int) -> tuple:
    out = [Fraction(0)] * n
    for s in pi:
        out[s.mode] += s.dur
    return tuple(out)


def weight(pi: Schedule) -> Fraction:
    return sum((s.dur for s in pi), Fraction(0))


def normalize(pi: Schedule) -> Schedule:
    """Merge consecutive steps that use the same mode."""
    out = []
    for s in pi:
        if out and out[-1].mode == s.mode:
            out[-1] = Step(out[-1].dur + s.dur, s.mode)
        else:
            out.append(s)
    return tuple(out)


def scale_schedule(c, pi: Schedule) -> Schedule:
    c = Fraction(c)
    if c <= 0:
        return ()
    return tuple(Step(c * s.dur, s.mode) for s in pi)


def _slice_finite(pi: Schedule, t0: Fraction, t1: Fraction) -> Schedule:
    out = []
    start = Fraction(0)
    for s in pi:
        end = start + s.dur
        lo, hi = max(start, t0), min(end, t1)
        if hi > lo:
            out.append(Step(hi - lo, s.mode))
        start = end
    return tuple(out)


def schedule_slice(pi: Union[Schedule, LassoSchedule], t0, t1=None):
    """The part of ``pi`` between elapsed times ``t0`` and ``t1`` (None for infinity)."""
    t0 = Fraction(t0)
    if isinstance(pi, LassoSchedule):
        P = weight(pi.period)
        pre = weight(pi.prefix)
        if t1 is None:
            if t0 <= pre:
                return LassoSchedule(_slice_finite(pi.prefix, t0, pre), pi.period)
            off = (t0 - pre) % P
            return LassoSchedule(_slice_finite(pi.period, off, P), pi.period)
        t1 = Fraction(t1)
        if not 0 <= t0 <= t1:
            raise ValueError("slice bounds out of order")
        copies = 0 if t1 <= pre else math.ceil((t1 - pre) / P)
        return _slice_finite(unroll(pi, copies), t0, t1)
    total = weight(pi)
    if t1 is None:
        t1 = total
    t1 = Fraction(t1)
    if not 0 <= t0 <= t1 or t1 > total:
        raise ValueError("slice bounds outside the schedule")
    return _slice_finite(pi, t0, t1)


def unroll(pi: LassoSchedule, copies: int) -> Schedule:
    return tuple(pi.prefix) + tuple(pi.period) * copies


# ---------------------------------------------------------------- executions


@dataclass(frozen=True)
class Execution:
    origin: Vec
    times: tuple
    points: tuple

    def __post_init__(self):
        if not self.times or self.times[0] != 0:
            raise ValueError("executions start at time 0")

    @property
    def end_time(self) -> Fraction:
        return self.times[-1]


def induce(pi: Union[Schedule, LassoSchedule], x0: Sequence, M: Mms, periods: int = 1) -> Execution:
    """Breakpoints of the execution of ``pi`` from ``x0``.

    A lasso is unrolled ``periods`` times; the execution beyond that is the
    periodic continuation.
    """
    x0 = vec(x0)
    if len(x0) != M.dim:
        raise ValueError("dimension mismatch between point and MMS")
    steps = unroll(pi, periods) if isinstance(pi, LassoSchedule) else schedule(*pi)
    _check_modes(steps, M)
    times = [Fraction(0)]
    points = [x0]
    for s in steps:
        times.append(times[-1] + s.dur)
        points.append(vadd(points[-1], vscale(s.dur, M.modes[s.mode])))
    return Execution(x0, tuple(times), tuple(points))


def eval_at(sigma: Execution, tau) -> Vec:
    tau = Fraction(tau)
    if tau < 0 or tau > sigma.end_time:
        raise ValueError("time outside the execution's domain")
    i = bisect.bisect_left(sigma.times, tau)
    if sigma.times[i] == tau:
        return sigma.points[i]
    t0, t1 = sigma.times[i - 1], sigma.times[i]
    p, q = sigma.points[i - 1], sigma.points[i]
    lam = (tau - t0) / (t1 - t0)
    return tuple(a + lam * (b - a) for a, b in zip(p, q))


def segment_interval(z: Zone, p: Sequence, q: Sequence) -> Optional[tuple]:
    """The closed sub-interval [lo, hi] of s in [0, 1] with p + s(q-p) in z, or None."""
    lo, hi = Fraction(0), Fraction(1)
    d = vsub(q, p)
    for row, bi in zip(z.A, z.b):
        base = dot(row, p) - bi  # value at s = 0; need base + s*slope <= 0
        slope = dot(row, d)
        if slope == 0:
            if base > 0:
                return None
        elif slope > 0:
            hi = min(hi, -base / slope)
        else:
            lo = max(lo, -base / slope)
        if lo > hi:
            return None
    return (lo, hi)


# ---------------------------------------------------------------- validation


def _blocks(pi) -> list:
    """Accept a plain schedule or a compressed list of (block, repeat) pairs."""
    if pi and isinstance(pi[0], tuple) and len(pi[0]) == 2 and isinstance(pi[0][1], int) \
            and not isinstance(pi[0], Step) and isinstance(pi[0][0], tuple):
        return [(schedule(*b), r) for b, r in pi]
    return [(schedule(*pi), 1)]


def validate_run(x0: Sequence, M: Mms, pi, coverage, target: Optional[Sequence] = None) -> bool:
    """Check that the execution of ``pi`` from ``x0`` stays within ``coverage``.

    ``coverage`` is a single zone (breakpoints suffice by convexity) or a
    collection of zones (each segment must be covered by the union of the
    exact per-zone sub-intervals).  ``pi`` may be run-length compressed as a
    list of ``(block, repeat)`` pairs.  For a single zone a repeated block is
    checked on its first and last repetition only: every constraint is
    affine in the repetition index, so its extreme values occur there.
    """
    x = vec(x0)
    if len(x) != M.dim:
        raise ValueError("dimension mismatch")
    zones = [coverage] if isinstance(coverage, Zone) else list(coverage)
    for z in zones:
        if z.dim != M.dim:
            raise ValueError("dimension mismatch between zone and MMS")
    single = len(zones) == 1

    def covered(p, q) -> bool:
        if single:
            return member(zones[0], q)
        ivs = sorted(iv for iv in (segment_interval(z, p, q) for z in zones) if iv is not None)
        reach = Fraction(0)
        started = False
        for lo, hi in ivs:
            if lo > reach if started else lo > 0:
                return False
            started = True
            reach = max(reach, hi)
            if reach >= 1:
                return True
        return False

    if single and not member(zones[0], x):
        return False
    if not single and not any(member(z, x) for z in zones):
        return False
    for block, rep in _blocks(pi):
        _check_modes(block, M)
        if rep <= 0:
            continue
        effect = zeros(M.dim)
        for s in block:
            effect = vadd(effect, vscale(s.dur, M.modes[s.mode]))
        if single:
            for start in ((x,) if rep == 1 else (x, vadd(x, vscale(rep - 1, effect)))):
                p = start
                for s in block:
                    q = vadd(p, vscale(s.dur, M.modes[s.mode]))
                    if not covered(p, q):
                        return False
                    p = q
        else:
            p = x
            for _ in range(rep):
                for s in block:
                    q = vadd(p, vscale(s.dur, M.modes[s.mode]))
                    if not covered(p, q):
                        return False
                    p = q
        x = vadd(x, vscale(rep, effect))
    if target is not None and x != vec(target):
        return False
    return True


def run_endpoint(x0: Sequence, M: Mms, pi) -> Vec:
    x = vec(x0)
    for block, rep in _blocks(pi):
        for s in block:
            x = vadd(x, vscale(rep * s.dur, M.modes[s.mode]))
    return x


# ---------------------------------------------------------------- traces


@dataclass(frozen=True)
class TraceWord:
    """The word ``prefix . period^omega`` over sets of zone names."""

    prefix: tuple
    period: tuple
    prefix_times: tuple = field(default=(), compare=False)
    period_times: tuple = field(default=(), compare=False)
    period_length: Fraction = field(default=Fraction(0), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(frozenset(a) for a in self.prefix))
        object.__setattr__(self, "period", tuple(frozenset(a) for a in self.period))
        if not self.period:
            raise ValueError("period must be nonempty")

    def __len__(self):
        return len(self.prefix) + len(self.period)

    def letter(self, i: int) -> frozenset:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def time(self, i: int) -> Fraction:
        if i < len(self.prefix):
            return self.prefix_times[i]
        j = i - len(self.prefix)
        return self.period_times[j % len(self.period)] + (j // len(self.period)) * self.period_length


def chi(zones: Sequence[Zone], x: Sequence) -> frozenset:
    return frozenset(z.name for z in zones if member(z, x))


def _stabilisation_copies(pi: LassoSchedule, x0, M: Mms, zones) -> int:
    """Number of period copies after which zone membership repeats exactly."""
    pre = induce(pi.prefix, x0, M)
    start = pre.points[-1]
    per = induce(pi.period, start, M)
    delta = vsub(per.points[-1], start)
    K = 0
    for z in zones:
        for row, bi in zip(z.A, z.b):
            slope = dot(row, delta)
            if slope == 0:
                continue
            # value at copy k of breakpoint q: (row.q - b) + k*slope must have sign(slope)
            need = max((-(dot(row, q) - bi) / slope for q in per.points))
            K = max(K, math.floor(need) + 1)
    return K


def extract_trace(pi: LassoSchedule, x0: Sequence, M: Mms, zones: Sequence[Zone]) -> TraceWord:
    """A trace of the execution of the lasso ``pi`` from ``x0`` over ``zones``.

    Sample times are the breakpoints and the zone entry/exit times on every
    segment, plus a midpoint wherever the open gap between two samples
    carries a letter different from both ends.
    """
    K = _stabilisation_copies(pi, x0, M, zones)
    sigma = induce(pi, x0, M, periods=K + 1)
    period_len = weight(pi.period)
    t_split = weight(pi.prefix) + K * period_len
    t_end = t_split + period_len

    samples = []
    for i in range(len(sigma.times) - 1):
        t0, t1 = sigma.times[i], sigma.times[i + 1]
        p, q = sigma.points[i], sigma.points[i + 1]
        crit = {Fraction(0)}
        for z in zones:
            iv = segment_interval(z, p, q)
            if iv is not None:
                crit.update(s for s in iv if 0 < s < 1)
        for s in sorted(crit):
            samples.append(t0 + s * (t1 - t0))
    samples.append(t_end)
    samples = sorted(set(samples))

    def letter(t):
        return chi(zones, eval_at(sigma, t))

    refined = []
    for a, b in zip(samples, samples[1:]):
        refined.append(a)
        mid = (a + b) / 2
        la, lb, lm = letter(a), letter(b), letter(mid)
        if lm != la and lm != lb:
            refined.append(mid)
    times_pre = [t for t in refined if t < t_split]
    times_per = [t for t in refined if t_split <= t < t_end]
    return TraceWord(tuple(letter(t) for t in times_pre), tuple(letter(t) for t in times_per),
                     tuple(times_pre), tuple(times_per), period_len)


def lasso_point(pi: LassoSchedule, x0: Sequence, M: Mms, tau) -> Vec:
    """sigma(tau) for the infinite execution of a lasso."""
    tau = Fraction(tau)
    pre = weight(pi.prefix)
    P = weight(pi.period)
    copies = 0 if tau <= pre else math.ceil((tau - pre) / P)
    return eval_at(induce(pi, x0, M, periods=copies), tau)
