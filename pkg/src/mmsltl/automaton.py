"""Almost acyclic Büchi automata of (F, G, &) formulas and their linear path schemes."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

from .ltl import (And, LassoMasks, FlatFormula, G, F, U, atoms_conj, conj, flatten, format_formula,
                  size)


class StructureError(RuntimeError):
    """A structural guarantee of the construction failed (an implementation bug)."""


def unfold(phi: FlatFormula) -> frozenset:
    """All formulas obtained by choosing, for each F-child, to keep it or to unfold it."""
    base = FlatFormula(phi.now, phi.always, phi.recurs, ())
    options = []
    for child in phi.eventually:
        keep = FlatFormula(eventually=(child,))
        options.append([keep] + sorted(unfold(child), key=FlatFormula.sort_key))
    out = set()
    for choice in itertools.product(*options):
        acc = base
        for part in choice:
            acc = acc.merge(part)
        out.add(acc)
    return frozenset(out)


def apply_letter(phi: FlatFormula, letter) -> Optional[FlatFormula]:
    """phi[A]: drop the present-time atoms, or None when A misses a required atom."""
    if not (phi.now | phi.always) <= frozenset(letter):
        return None
    return FlatFormula(frozenset(), phi.always, phi.recurs, phi.eventually)


@dataclass
class Automaton:
    formula: object
    states: list
    index: dict
    labels: dict  # (i, j) -> minimal atom set of X_{i,j}
    finals: list
    width: int = 0

    @property
    def initial(self) -> int:
        return 0

    def label(self, i: int, j: int) -> Optional[frozenset]:
        return self.labels.get((i, j))

    def successors(self, i: int) -> list:
        return sorted(j for (a, j) in self.labels if a == i)

    def obligations(self, i: int) -> tuple:
        return self.states[i].recurs

    def to_dot(self) -> str:
        lines = ["digraph A {", "  rankdir=LR;", '  init [shape=point];']
        for i, q in enumerate(self.states):
            shape = "doublecircle" if i in self.finals else "ellipse"
            extra = ""
            if i in self.finals and q.recurs:
                extra = "\\nGF: " + ", ".join("{" + ",".join(sorted(r)) + "}" for r in q.recurs)
            lines.append(f'  q{i} [shape={shape}, label="{q.format()}{extra}"];')
        lines.append("  init -> q0;")
        for (i, j), lab in sorted(self.labels.items()):
            lines.append(f'  q{i} -> q{j} [label="{{{",".join(sorted(lab))}}}"];')
        lines.append("}")
        return "\n".join(lines)


def build(phi) -> Automaton:
    """The reachable part of the automaton of ``phi`` with minimal edge labels."""
    q0 = flatten(phi)
    states = [q0]
    index = {q0: 0}
    labels = {}
    todo = [0]
    while todo:
        i = todo.pop(0)
        q = states[i]
        candidates = {}
        for theta in sorted(unfold(q), key=FlatFormula.sort_key):
            r = FlatFormula(frozenset(), theta.always, theta.recurs, theta.eventually)
            candidates.setdefault(r, []).append(theta.now | theta.always)
        for r in sorted(candidates, key=FlatFormula.sort_key):
            sets = candidates[r]
            least = min(sets, key=len)
            if not all(least <= s for s in sets):
                raise StructureError(f"edge label family from {q} to {r} is not upward closed")
            if r not in index:
                index[r] = len(states)
                states.append(r)
                todo.append(index[r])
            labels[(i, index[r])] = least
    aut = Automaton(phi, states, index, labels, [])
    aut.finals = [j for j, q in enumerate(states) if q.fcount() == 0 and _reachable_plus(aut, j)]
    _check_structure(aut, phi)
    return aut


def _reachable_plus(aut: Automaton, target: int) -> bool:
    seen = set()
    frontier = aut.successors(0)
    while frontier:
        j = frontier.pop()
        if j == target:
            return True
        if j not in seen:
            seen.add(j)
            frontier.extend(aut.successors(j))
    return False


def _check_structure(aut: Automaton, phi) -> None:
    n = len(aut.states)
    succ = {i: [j for j in aut.successors(i) if j != i] for i in range(n)}
    # almost acyclic: no cycle through distinct states (Kahn's algorithm on the loop-free graph)
    indeg = [0] * n
    for i in range(n):
        for j in succ[i]:
            indeg[j] += 1
    order = [i for i in range(n) if indeg[i] == 0]
    for i in order:
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                order.append(j)
    if len(order) != n:
        raise StructureError("automaton has a cycle through distinct states")
    longest = [0] * n
    for i in reversed(order):
        longest[i] = max((1 + longest[j] for j in succ[i]), default=0)
    aut.width = longest[0]
    if aut.width > size(phi) + 1:
        raise StructureError(f"width {aut.width} exceeds |phi| + 1 = {size(phi) + 1}")
    for (i, j), lab in aut.labels.items():
        if i != j:
            if aut.label(j, j) is None:
                raise StructureError("edge target without self-loop")
            loop = aut.label(i, i)
            if loop is not None and not loop <= lab:
                raise StructureError("self-loop label is not below an outgoing label")


def accepts(aut: Automaton, word) -> bool:
    """Decide membership of the lasso word via the product with the automaton."""
    letters = [frozenset(a) for a in word.prefix] + [frozenset(a) for a in word.period]
    return bool(accepts_masks(aut, LassoMasks.single(letters, len(word.prefix))))


def accepts_masks(aut: Automaton, masks: LassoMasks) -> int:
    """Mask of the accepted words among an encoded family of lasso words, read up to stuttering."""
    n, p0 = masks.length, masks.loop
    edges = [(q, r, lab) for (q, r), lab in sorted(aut.labels.items())]
    reach = [[0] * n for _ in aut.states]
    reach[0][0] = masks.full
    changed = True
    while changed:
        changed = False
        for i in range(n):
            j = masks.succ(i)
            for q, r, lab in edges:
                src = reach[q][i]
                if not src:
                    continue
                moved = src & masks.letter_has(lab, i)
                # a held letter may be read again, so a move can stay on position i
                for k in ((j, i) if q != r else (j,)):
                    new = reach[r][k] | moved
                    if new != reach[r][k]:
                        reach[r][k] = new
                        changed = True
    accepted = 0
    for q in aut.finals:
        loop = aut.label(q, q)
        if loop is None:
            continue
        # every period letter carries the loop label and each obligation recurs
        ok = masks.full
        for j in range(p0, n):
            ok &= masks.letter_has(loop, j)
        for c in aut.obligations(q):
            some = 0
            for j in range(p0, n):
                some |= masks.letter_has(loop | c, j)
            ok &= some
        for i in range(p0, n):
            accepted |= reach[q][i] & ok
        # entering in the prefix also needs the loop label on the remaining prefix letters
        for i in range(p0 - 1, -1, -1):
            ok &= masks.letter_has(loop, i)
            accepted |= reach[q][i] & ok
    return accepted


# ---------------------------------------------------------------- linear path schemes


@dataclass(frozen=True)
class Lps:
    states: tuple  # state indices r_0 .. r_n
    edge_labels: tuple  # B_1 .. B_n
    loop_labels: tuple  # A_0 .. A_n (None when absent)
    obligations: tuple  # C_1 .. C_k of the final state


def enumerate_lps(aut: Automaton) -> Iterator[Lps]:
    """Simple paths from the initial state to a final state, depth first in creation order."""
    finals = set(aut.finals)

    def make(path):
        return Lps(tuple(path),
                   tuple(aut.label(a, b) for a, b in zip(path, path[1:])),
                   tuple(aut.label(r, r) for r in path),
                   aut.obligations(path[-1]))

    def dfs(path):
        q = path[-1]
        if q in finals:
            yield make(path)
        for r in aut.successors(q):
            if r not in path:
                yield from dfs(path + [r])

    yield from dfs([aut.initial])


@dataclass(frozen=True)
class LinearFormula:
    """head & B_1 U (B'_1 & ... B_k U (B'_k & (G C_0 & GF C_1 & ...)))."""

    head: Optional[frozenset]
    chain: tuple  # (B, B') pairs with B a subset of B'
    always: frozenset = frozenset()
    recurs: tuple = ()

    def __post_init__(self):
        for b, b2 in self.chain:
            if not frozenset(b) <= frozenset(b2):
                raise ValueError("until-step requires B to be a subset of B'")

    def to_formula(self):
        tail = conj([G(atoms_conj(self.always))] + [G(F(atoms_conj(c))) for c in self.recurs])
        out = tail
        for b, b2 in reversed(self.chain):
            out = U(atoms_conj(b), And(atoms_conj(b2), out))
        if self.head is not None:
            out = And(atoms_conj(self.head), out)
        return out

    def format(self, unicode: bool = True) -> str:
        return format_formula(self.to_formula(), unicode)

    def goals(self) -> tuple:
        return self.recurs


def lps_to_linear(aut: Automaton, lps: Lps) -> LinearFormula:
    n = len(lps.states) - 1
    always = lps.loop_labels[n]
    if always is None:
        raise StructureError("final state of a path scheme has no self-loop")
    chain = []
    head = None
    for i in range(n - 1, -1, -1):
        edge = lps.edge_labels[i]
        loop = lps.loop_labels[i]
        if loop is not None:
            chain.insert(0, (loop, edge))
        else:
            if i != 0:
                raise StructureError("intermediate path state without self-loop")
            head = edge
    return LinearFormula(head, tuple(chain), always, tuple(lps.obligations))


def restrict(aut: Automaton, lps: Lps) -> Automaton:
    """The sub-automaton that only keeps the states and edges of one path scheme."""
    keep = set(lps.states)
    pairs = set(zip(lps.states, lps.states[1:])) | {(r, r) for r in lps.states}
    labels = {k: v for k, v in aut.labels.items() if k in pairs and k[0] in keep}
    sub = Automaton(aut.formula, aut.states, aut.index, labels, [lps.states[-1]], aut.width)
    return sub
