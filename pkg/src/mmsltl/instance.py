"""Model-checking instances and their JSON form (rationals as "num/den" strings)."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import LassoSchedule, Mms, Step, Zone, zone_from_vertices_2d


class InstanceError(ValueError):
    """Malformed instance data; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def rat(value, path: str = "") -> Fraction:
    if isinstance(value, bool):
        raise InstanceError("expected a rational, got a boolean", path)
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"bad rational {value!r}", path) from None
    if isinstance(value, float):
        raise InstanceError("floats are not accepted; write rationals as \"num/den\"", path)
    raise InstanceError(f"expected a rational, got {type(value).__name__}", path)


def rat_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass
class Instance:
    mms: Mms
    zones: dict
    point: tuple
    formula: str = ""
    schedule: Optional[LassoSchedule] = None
    expected: Optional[bool] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.point) != self.mms.dim:
            raise InstanceError("point dimension differs from the MMS", "point")
        for name, z in self.zones.items():
            if z.dim != self.mms.dim:
                raise InstanceError("zone dimension differs from the MMS", f"zones.{name}")

    def to_json(self) -> dict:
        out = {
            "dim": self.mms.dim,
            "modes": [[rat_str(c) for c in m] for m in self.mms.modes],
            "zones": {n: {"A": [list(r) for r in z.A], "b": list(z.b)} for n, z in self.zones.items()},
            "point": [rat_str(c) for c in self.point],
            "formula": self.formula,
        }
        if self.schedule is not None:
            out["schedule"] = {k: [[rat_str(s.dur), s.mode] for s in getattr(self.schedule, k)]
                               for k in ("prefix", "period")}
        if self.expected is not None:
            out["expected"] = "holds" if self.expected else "fails"
        if self.meta:
            out["meta"] = self.meta
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)


def _zone(name: str, spec, dim: int) -> Zone:
    path = f"zones.{name}"
    if not isinstance(spec, dict):
        raise InstanceError("zone must be an object", path)
    if "A" in spec:
        rows = spec["A"]
        b = spec.get("b")
        if not isinstance(rows, list) or not isinstance(b, list) or len(rows) != len(b):
            raise InstanceError("A and b must be lists of equal length", path)
        pairs = []
        for i, (row, rhs) in enumerate(zip(rows, b)):
            if not isinstance(row, list) or len(row) != dim:
                raise InstanceError(f"row must have {dim} entries", f"{path}.A[{i}]")
            pairs.append(([rat(c, f"{path}.A[{i}]") for c in row], rat(rhs, f"{path}.b[{i}]")))
        return Zone.from_rows(pairs, dim, name)
    if "box" in spec:
        box = spec["box"]
        lo = [None if v is None else rat(v, f"{path}.box.lo") for v in box.get("lo", [None] * dim)]
        hi = [None if v is None else rat(v, f"{path}.box.hi") for v in box.get("hi", [None] * dim)]
        if len(lo) != dim or len(hi) != dim:
            raise InstanceError(f"box bounds need {dim} entries", path)
        return Zone.box(lo, hi, name)
    if "vertices" in spec:
        if dim != 2:
            raise InstanceError("vertex form is only available in dimension 2", path)
        pts = [tuple(rat(c, f"{path}.vertices[{i}]") for c in p) for i, p in enumerate(spec["vertices"])]
        return zone_from_vertices_2d(pts, name)
    if "point" in spec:
        return Zone.point([rat(c, f"{path}.point") for c in spec["point"]], name)
    raise InstanceError("zone needs one of A/b, box, vertices or point", path)


def _schedule(spec, n: int, path: str) -> tuple:
    out = []
    for i, item in enumerate(spec):
        if not isinstance(item, list) or len(item) != 2:
            raise InstanceError("step must be [duration, mode]", f"{path}[{i}]")
        mode = item[1]
        if not isinstance(mode, int) or not 0 <= mode < n:
            raise InstanceError(f"mode index must be in 0..{n - 1}", f"{path}[{i}]")
        dur = rat(item[0], f"{path}[{i}]")
        if dur <= 0:
            raise InstanceError("duration must be positive", f"{path}[{i}]")
        out.append(Step(dur, mode))
    return tuple(out)


def from_json(data) -> Instance:
    if not isinstance(data, dict):
        raise InstanceError("instance must be a JSON object")
    try:
        dim = data["dim"]
        modes = data["modes"]
    except KeyError as e:
        raise InstanceError("missing field", str(e.args[0])) from None
    if not isinstance(dim, int) or dim < 1:
        raise InstanceError("dim must be a positive integer", "dim")
    mm = []
    for i, m in enumerate(modes):
        if not isinstance(m, list) or len(m) != dim:
            raise InstanceError(f"mode must have {dim} entries", f"modes[{i}]")
        mm.append(tuple(rat(c, f"modes[{i}]") for c in m))
    try:
        mms = Mms(dim, tuple(mm))
    except ValueError as e:
        raise InstanceError(str(e), "modes") from None
    zones = {n: _zone(n, z, dim) for n, z in data.get("zones", {}).items()}
    point = tuple(rat(c, "point") for c in data.get("point", [0] * dim))
    sched = None
    if "schedule" in data and data["schedule"] is not None:
        s = data["schedule"]
        period = _schedule(s.get("period", []), mms.n, "schedule.period")
        if not period:
            raise InstanceError("period must be nonempty", "schedule.period")
        sched = LassoSchedule(_schedule(s.get("prefix", []), mms.n, "schedule.prefix"), period)
    expected = data.get("expected")
    if expected is not None:
        if expected not in ("holds", "fails", True, False):
            raise InstanceError("expected must be \"holds\" or \"fails\"", "expected")
        expected = expected in ("holds", True)
    return Instance(mms, zones, point, data.get("formula", ""), sched, expected, data.get("meta", {}))


def loads(text: str) -> Instance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return from_json(data)
