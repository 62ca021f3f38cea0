"""Command-line frontend.

Exit codes: 0 Holds (or true/valid), 1 Fails (or false/invalid),
2 UndecidableFragment, 3 Unsupported, 64 usage error, 65 malformed
input, 66 unreadable input file.
"""
from __future__ import annotations

import json
import random
import sys
import time

import click

from . import gen
from .automaton import build, enumerate_lps, lps_to_linear
from .checker import check, complexity, route
from .core import extract_trace
from .instance import InstanceError, from_json, loads, rat
from .ltl import FormulaSyntaxError, classify, eval_lasso, flatten, parse
from .witness_json import validate_json, verdict_to_json

EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66


class InputError(Exception):
    def __init__(self, message: str, code: int = EX_DATAERR):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", EX_NOINPUT) from None


def _instance(path: str):
    return loads(_read(path))


def _formula(text: str, zones=None):
    return parse(text, zones)


instance_opt = click.option("--instance", "instance_path", default="-", show_default=True,
                            help="Instance JSON file, '-' for stdin.")
formula_opt = click.option("--formula", default=None, help="Formula text; overrides the instance formula.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
def main():
    """Model-check constant-rate multi-mode systems against LTL over zones."""


@main.command("check")
@instance_opt
@formula_opt
@click.option("--witness", "witness_path", default=None, help="Write the verdict and witness as JSON here.")
@click.option("--fragment-report", is_flag=True, help="Print the operator set, route and zone boundedness.")
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1),
              help="Worker processes for path-scheme checking.")
@click.option("--timeout", default=None, type=click.FloatRange(min=0),
              help="Seconds before the path-scheme stream gives up with Unsupported.")
def cmd_check(instance_path, formula, witness_path, fragment_report, jobs, timeout):
    """Decide whether the instance point satisfies the formula."""
    inst = _instance(instance_path)
    text = formula if formula is not None else inst.formula
    phi = _formula(text, inst.zones)
    if fragment_report:
        tag = classify(phi, inst.zones)
        click.echo(f"operators: {{{','.join(sorted(tag.operators))}}}")
        click.echo(f"route: {route(tag.operators)} ({complexity(tag.operators)})")
        click.echo(f"bounded zones: {'yes' if tag.bounded else 'no, ' + ', '.join(tag.unbounded_atoms)}")
    deadline = None if timeout is None else time.monotonic() + timeout
    try:
        v = check(inst.point, inst.mms, phi, inst.zones, jobs=jobs, deadline=deadline)
    except ValueError as e:
        raise InputError(str(e)) from None
    if witness_path is not None:
        with open(witness_path, "w", encoding="utf-8") as fh:
            json.dump(verdict_to_json(v), fh, indent=1)
    click.echo(f"verdict: {v.name}")
    click.echo(f"route: {v.route}")
    reason = getattr(v, "reason", "")
    if reason:
        click.echo(f"reason: {reason}")
    if getattr(v, "linear", None) is not None:
        click.echo(f"linear formula: {v.linear.format(unicode=False)}")
    if getattr(v, "lps_index", None) is not None:
        click.echo(f"path scheme: {v.lps_index}")
    if inst.expected is not None and v.code in (0, 1):
        agree = (v.code == 0) == inst.expected
        click.echo(f"expected: {'holds' if inst.expected else 'fails'} ({'match' if agree else 'MISMATCH'})")
    sys.exit(v.code)


@main.command("flatten")
@click.option("--formula", required=True)
@click.option("--unicode/--ascii", default=False, show_default=True)
def cmd_flatten(formula, unicode):
    """Print the flat normal form of a formula over F, G and conjunction."""
    click.echo(flatten(_formula(formula)).format(unicode))


@main.command("automaton")
@click.option("--formula", required=True)
@click.option("--dot", is_flag=True, help="Emit Graphviz DOT.")
def cmd_automaton(formula, dot):
    """Build the almost-acyclic automaton of a formula."""
    aut = build(_formula(formula))
    if dot:
        click.echo(aut.to_dot())
        return
    click.echo(f"states: {len(aut.states)}  width: {aut.width}")
    for i, q in enumerate(aut.states):
        mark = " (final)" if i in aut.finals else ""
        click.echo(f"q{i}{mark}: {q.format()}")
    for (i, j), lab in sorted(aut.labels.items()):
        click.echo(f"q{i} -> q{j} on {{{','.join(sorted(lab))}}}")


@main.command("lps")
@click.option("--formula", required=True)
@click.option("--unicode/--ascii", default=True, show_default=True)
def cmd_lps(formula, unicode):
    """List the linear formulas of the automaton's path schemes."""
    aut = build(_formula(formula))
    for s in enumerate_lps(aut):
        click.echo(lps_to_linear(aut, s).format(unicode))


@main.command("validate-witness")
@instance_opt
@click.option("--witness", "witness_path", required=True, help="Witness JSON written by check --witness.")
def cmd_validate_witness(instance_path, witness_path):
    """Re-check a stored witness against an instance."""
    inst = _instance(instance_path)
    try:
        data = json.loads(_read(witness_path))
    except json.JSONDecodeError as e:
        raise InputError(f"{witness_path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        ok = validate_json(data, inst)
    except (KeyError, TypeError) as e:
        raise InputError(f"{witness_path}: malformed witness ({e!r})") from None
    click.echo("valid" if ok else "invalid")
    sys.exit(0 if ok else 1)


@main.command("eval-trace")
@instance_opt
@formula_opt
def cmd_eval_trace(instance_path, formula):
    """Evaluate any formula on the trace of the instance's lasso schedule."""
    inst = _instance(instance_path)
    if inst.schedule is None:
        raise InputError("schedule: the instance has no lasso schedule")
    text = formula if formula is not None else inst.formula
    phi = _formula(text, inst.zones)
    zones = [z.renamed(n) for n, z in sorted(inst.zones.items())]
    word = extract_trace(inst.schedule, inst.point, inst.mms, zones)
    ok = eval_lasso(word, phi)
    click.echo("true" if ok else "false")
    sys.exit(0 if ok else 1)


# ---------------------------------------------------------------- generators


def _emit(instances) -> None:
    if len(instances) == 1:
        click.echo(instances[0].dumps())
    else:
        for inst in instances:
            click.echo(json.dumps(inst.to_json()))


def _rats(text: str, what: str) -> list:
    try:
        return [rat(s.strip(), what) for s in text.split(",") if s.strip()]
    except InstanceError as e:
        raise InputError(str(e)) from None


seed_opt = click.option("--seed", default=None, type=int, help="Seed for a random instance corpus.")
count_opt = click.option("--count", default=1, show_default=True, type=click.IntRange(min=1),
                         help="Number of random instances (JSON lines when above 1).")


@main.group("gen")
def cmd_gen():
    """Emit instances of the hardness-reduction families."""


@cmd_gen.command("subset-sum")
@click.option("--set", "items", default=None, help="Comma-separated rationals, e.g. 8,9.")
@click.option("--target", default=None, help="Target sum.")
@click.option("--size", default=2, show_default=True, type=click.IntRange(1, 8))
@seed_opt
@count_opt
def gen_subset_sum_cmd(items, target, size, seed, count):
    """F T & F Y1 & F N1 & ...: holds iff some subset sums to the target."""
    if items is not None:
        if target is None:
            raise click.UsageError("--set needs --target")
        S = _rats(items, "--set")
        if not S:
            raise click.UsageError("--set must name at least one item")
        _emit([gen.gen_subset_sum(S, _rats(target, "--target")[0])])
        return
    rng = random.Random(seed)
    _emit([gen.gen_subset_sum(*gen.random_subset_sum(rng, size)) for _ in range(count)])


@cmd_gen.command("lp")
@click.option("--zone", default=None, help='Zone JSON, e.g. \'{"box": {"lo": [0,0], "hi": [1,1]}}\'.')
@click.option("--dim", default=2, show_default=True, type=click.IntRange(1, 6), help="Dimension of the zone.")
@seed_opt
@count_opt
def gen_lp_cmd(zone, dim, seed, count):
    """F Z under unit modes: holds iff Z meets the nonnegative orthant."""
    if zone is not None:
        try:
            spec = json.loads(zone)
        except json.JSONDecodeError as e:
            raise InputError(f"--zone: invalid JSON: {e.msg}") from None
        Z = from_json({"dim": dim, "modes": [], "zones": {"Z": spec}}).zones["Z"]
        _emit([gen.gen_lp_feasibility(Z)])
        return
    rng = random.Random(seed)
    _emit([gen.gen_lp_feasibility(gen.random_bounded_zone(rng, dim)) for _ in range(count)])


@cmd_gen.command("cvp")
@click.option("--circuit", default=None, help='Circuit JSON: {"inputs": 2, "gates": [["g1", "and", "x1", "x2"]]}.')
@click.option("--input", "bits", default=None, help="Comma-separated input bits.")
@click.option("--gates", default=3, show_default=True, type=click.IntRange(1, 12))
@seed_opt
@count_opt
def gen_cvp_cmd(circuit, bits, gates, seed, count):
    """G Z over the unit cube: holds iff the monotone circuit outputs 1."""
    if circuit is not None:
        try:
            data = json.loads(circuit)
            C = gen.Circuit(int(data["inputs"]), tuple(tuple(g) for g in data["gates"]))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise InputError(f"--circuit: {e}") from None
        w = [int(b) for b in (bits or "").split(",") if b.strip()]
        if len(w) != C.inputs or any(b not in (0, 1) for b in w):
            raise click.UsageError(f"--input needs {C.inputs} bits")
        _emit([gen.gen_cvp(C, w)])
        return
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        C = gen.random_circuit(rng, rng.randint(1, 3), gates)
        out.append(gen.gen_cvp(C, [rng.randint(0, 1) for _ in range(C.inputs)]))
    _emit(out)


def _nets(net_path, seed, count):
    if net_path is not None:
        try:
            return [gen.net_from_json(json.loads(_read(net_path)))]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise InputError(f"{net_path}: {e}") from None
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        net = gen.random_petri_net(rng, rng.randint(1, 2), rng.randint(1, 2))
        src = tuple(rng.randint(0, 1) for _ in net.places)
        tgt = tuple(rng.randint(0, 1) for _ in net.places)
        out.append((net, src, tgt))
    return out


net_opt = click.option("--net", "net_path", default=None,
                       help="Net JSON with places, transitions, comp, pre, post, src, tgt.")


@cmd_gen.command("petri")
@net_opt
@seed_opt
@count_opt
def gen_petri_cmd(net_path, seed, count):
    """Bounded-zone encoding of inhibitor-net reachability."""
    try:
        _emit([gen.petri_instance(gen.gen_petri(*n)) for n in _nets(net_path, seed, count)])
    except ValueError as e:
        raise InputError(str(e)) from None


@cmd_gen.command("petri-gor")
@net_opt
@seed_opt
@count_opt
def gen_petri_gor_cmd(net_path, seed, count):
    """G of a zone disjunction; the checker refuses it as undecidable."""
    try:
        _emit([gen.gen_petri_gor(*n) for n in _nets(net_path, seed, count)])
    except ValueError as e:
        raise InputError(str(e)) from None


@cmd_gen.command("petri-until")
@net_opt
@seed_opt
@count_opt
def gen_petri_until_cmd(net_path, seed, count):
    """A disjunction-free until chain; the checker refuses it as undecidable."""
    try:
        _emit([gen.gen_petri_until(*n) for n in _nets(net_path, seed, count)])
    except ValueError as e:
        raise InputError(str(e)) from None


def run(argv=None) -> int:
    """Entry point; maps click and input errors onto the exit codes above."""
    try:
        main.main(args=argv, prog_name="mmsltl", standalone_mode=False)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    except click.exceptions.NoArgsIsHelpError as e:
        click.echo(e.ctx.get_help() if e.ctx else str(e), err=True)
        return EX_USAGE
    except click.UsageError as e:
        e.show()
        return EX_USAGE
    except click.Abort:
        return EX_USAGE
    except InputError as e:
        click.echo(f"error: {e}", err=True)
        return e.code
    except (InstanceError, FormulaSyntaxError) as e:
        click.echo(f"error: {e}", err=True)
        return EX_DATAERR
    return 0


def entry() -> None:
    sys.exit(run())

