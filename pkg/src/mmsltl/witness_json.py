"""JSON form of verdict witnesses, and re-validation from that form alone."""
from __future__ import annotations

from fractions import Fraction

from .automaton import LinearFormula
from .checker import Fails, NegWitness, UndecidableFragment, Unsupported, Verdict
from .core import LassoSchedule, Mms, Step, validate_run
from .instance import Instance, InstanceError, rat, rat_str
from . import reach


def _v(p) -> list:
    return [rat_str(c) for c in p]


def _pv(data, path) -> tuple:
    if not isinstance(data, list):
        raise InstanceError("expected a vector", path)
    return tuple(rat(c, path) for c in data)


def _steps(steps) -> list:
    return [[rat_str(s.dur), s.mode] for s in steps]


def _load_steps(data, path) -> tuple:
    try:
        return tuple(Step(rat(d, path), int(m)) for d, m in data)
    except (TypeError, ValueError) as e:
        raise InstanceError(f"bad step list: {e}", path) from None


def _names(s) -> list:
    return sorted(s)


def _stage(st: reach.UntilStage) -> dict:
    return {"start": _v(st.start), "end": _v(st.end), "beta": st.beta, "k": st.k,
            "blocks": [{"steps": _steps(b), "repeat": r} for b, r in st.blocks]}


def _load_stage(data, zone, path) -> reach.UntilStage:
    blocks = [(_load_steps(b["steps"], f"{path}.blocks"), int(b["repeat"])) for b in data["blocks"]]
    return reach.UntilStage(zone, _pv(data["start"], f"{path}.start"), _pv(data["end"], f"{path}.end"),
                            blocks, int(data.get("beta", 1)), int(data.get("k", 0)))


def linear_to_json(lin: LinearFormula) -> dict:
    return {"head": None if lin.head is None else _names(lin.head),
            "chain": [[_names(b), _names(b2)] for b, b2 in lin.chain],
            "always": _names(lin.always), "recurs": [_names(c) for c in lin.recurs],
            "text": lin.format(unicode=False)}


def linear_from_json(data) -> LinearFormula:
    return LinearFormula(None if data["head"] is None else frozenset(data["head"]),
                         tuple((frozenset(b), frozenset(b2)) for b, b2 in data["chain"]),
                         frozenset(data["always"]), tuple(frozenset(c) for c in data["recurs"]))


def _gz(w: reach.GZWitness) -> dict:
    return {"kind": "always", "z": _v(w.z), "prefix": _steps(w.prefix), "z0": _v(w.z0),
            "period": _steps(w.period), "beta": w.beta, "pi": _v(w.pi), "pi_rec": _v(w.pi2), "z_rec": _v(w.z2)}


def _lasso(w: reach.LassoWitness) -> dict:
    return {"kind": "lasso", "z": _v(w.z), "z1": _v(w.z1), "x0": _v(w.x0), "x1": _v(w.x1), "xf": _v(w.xf),
            "y0": _v(w.y0), "yf": _v(w.yf), "pi": _v(w.pi), "pi1": _v(w.pi1), "pi2": _v(w.pi2),
            "rho": _v(w.rho), "rho1": _v(w.rho1), "rho2": _v(w.rho2), "eps": rat_str(w.eps),
            "lambda": rat_str(w.lam), "stages": [_stage(s) for s in w.stages],
            "rounds": [_stage(s) for s in w.rounds]}


def verdict_to_json(v: Verdict) -> dict:
    out = {"verdict": v.name, "route": v.route}
    if isinstance(v, (Fails, UndecidableFragment, Unsupported)):
        out["reason"] = v.reason
        return out
    w = v.witness
    if isinstance(w, reach.LinearWitness):
        out["witness"] = {"kind": "linear", "formula": linear_to_json(w.formula), "head": _v(w.head),
                          "stages": [_stage(s) for s in w.stages],
                          "tail": _gz(w.tail) if isinstance(w.tail, reach.GZWitness) else _lasso(w.tail)}
        if v.lps_index is not None:
            out["lps_index"] = v.lps_index
    elif isinstance(w, NegWitness):
        out["witness"] = {"kind": "negated", "form": w.form, "zone": w.zone.name, "x": _v(w.x), "mode": w.mode,
                          "exit_time": rat_str(w.exit_time)}
    elif isinstance(w, LassoSchedule):
        out["witness"] = {"kind": "schedule", "prefix": _steps(w.prefix), "period": _steps(w.period)}
    return out


def _load_gz(d, zone) -> reach.GZWitness:
    return reach.GZWitness(zone, _pv(d["z"], "z"), _load_steps(d["prefix"], "prefix"), _pv(d["z0"], "z0"),
                           _load_steps(d["period"], "period"), int(d["beta"]), _pv(d["pi"], "pi"),
                           _pv(d["pi_rec"], "pi_rec"), _pv(d["z_rec"], "z_rec"))


def _load_lasso(d, zones3, M: Mms) -> reach.LassoWitness:
    Z = zones3[0]
    w = reach.LassoWitness(zones3, *(_pv(d[k], k) for k in ("z", "z1", "x0", "x1", "xf", "y0", "yf", "pi", "pi1",
                                                             "pi2", "rho", "rho1", "rho2")),
                           rat(d["eps"], "eps"), rat(d["lambda"], "lambda"),
                           [_load_stage(s, Z, "stages") for s in d["stages"]])
    w.rounds = [_load_stage(s, Z, "rounds") for s in d["rounds"]]
    return w


def validate_json(data: dict, inst: Instance) -> bool:
    """Re-check a serialized Holds witness against the instance."""
    M, zones = inst.mms, inst.zones
    if data.get("verdict") != "Holds":
        raise InstanceError("only Holds verdicts carry a witness", "verdict")
    w = data.get("witness")
    if not isinstance(w, dict):
        raise InstanceError("missing witness", "witness")
    kind = w.get("kind")
    if kind == "schedule":
        sched = LassoSchedule(_load_steps(w["prefix"], "prefix"), _load_steps(w["period"], "period"))
        return len(sched.period) > 0 and all(0 <= s.mode < M.n for s in sched.prefix + sched.period)
    if kind == "negated":
        nw = NegWitness(w["form"], zones[w["zone"]], _pv(w["x"], "x"), int(w["mode"]), rat(w["exit_time"], "t"))
        return nw.x == tuple(inst.point) and nw.validate(M)
    if kind != "linear":
        raise InstanceError(f"unknown witness kind {kind!r}", "witness.kind")
    lin = linear_from_json(w["formula"])
    d = M.dim
    stages = [_load_stage(s, reach.zone_of(b, zones, d), f"stages[{i}]")
              for i, (s, (b, _)) in enumerate(zip(w["stages"], lin.chain))]
    if len(stages) != len(lin.chain):
        return False
    tail = w["tail"]
    product = None
    if tail["kind"] == "always":
        tw = _load_gz(tail, reach.zone_of(lin.always, zones, d))
    else:
        goals = [c for c in lin.recurs if c]
        product = reach.product_reduce(M, (Fraction(0),) * d,
                                       [reach.zone_of(lin.always, zones, d)] +
                                       [reach.zone_of(c, zones, d) for c in goals])
        tw = _load_lasso(tail, (product.Z, product.X, product.Y), product.mms)
    lw = reach.LinearWitness(lin, _pv(w["head"], "head"), stages, tw, product)
    return lw.head == tuple(inst.point) and lw.validate(M, zones)


def schedule_validates(sched: LassoSchedule, inst: Instance) -> bool:
    return validate_run(inst.point, inst.mms, sched.prefix + sched.period, list(inst.zones.values()) or [])
