"""LTL formulas without next: syntax, lasso-word semantics, rewrites and flattening."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# ---------------------------------------------------------------- AST


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class F:
    arg: "Formula"


@dataclass(frozen=True)
class G:
    arg: "Formula"


@dataclass(frozen=True)
class U:
    left: "Formula"
    right: "Formula"


Formula = (TrueF, Atom, Not, And, Or, F, G, U)
TRUE = TrueF()
BINARY = (And, Or, U)
UNARY = (Not, F, G)


def conj(parts: Sequence) -> object:
    """Left-folded conjunction; the empty conjunction is ``true``."""
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Sequence) -> object:
    parts = list(parts)
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def atoms_conj(names: Iterable[str]) -> object:
    return conj([Atom(n) for n in sorted(names)])


def atoms_of(phi) -> frozenset:
    if isinstance(phi, Atom):
        return frozenset([phi.name])
    if isinstance(phi, TrueF):
        return frozenset()
    if isinstance(phi, UNARY):
        return atoms_of(phi.arg)
    return atoms_of(phi.left) | atoms_of(phi.right)


def operators(phi) -> frozenset:
    """Operator names used by ``phi``, drawn from U, F, G, &, |, !."""
    names = {Not: "!", And: "&", Or: "|", F: "F", G: "G", U: "U"}
    if isinstance(phi, (Atom, TrueF)):
        return frozenset()
    own = frozenset([names[type(phi)]])
    if isinstance(phi, UNARY):
        return own | operators(phi.arg)
    return own | operators(phi.left) | operators(phi.right)


def size(phi) -> int:
    if isinstance(phi, (TrueF, Atom)):
        return 1
    if isinstance(phi, UNARY):
        return 1 + size(phi.arg)
    return size(phi.left) + 1 + size(phi.right)


def fcount(phi) -> int:
    if isinstance(phi, (TrueF, Atom, G)):
        return 0
    if isinstance(phi, And):
        return fcount(phi.left) + fcount(phi.right)
    if isinstance(phi, F):
        return 1 + fcount(phi.arg)
    raise ValueError(f"fcount is defined on F, G, & formulas only, got {type(phi).__name__}")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<not>!|¬)|(?P<and>&|∧)|(?P<or>\||∨)"
                    r"|(?P<word>[A-Za-z_][A-Za-z0-9_']*))")
_OPERATOR_RUN = re.compile(r"[FG]+")


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                     len(text) - len(text[pos:].lstrip()))
        start = m.start(m.lastgroup)
        kind, value = m.lastgroup, m.group(m.lastgroup)
        if kind == "word":
            if value == "true":
                tokens.append(("true", value, start))
            elif value == "U":
                tokens.append(("U", value, start))
            elif _OPERATOR_RUN.fullmatch(value):
                for k, ch in enumerate(value):
                    tokens.append((ch, ch, start + k))
            else:
                tokens.append(("atom", value, start))
        else:
            tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    # precedence: unary > U > & > |
    def __init__(self, text: str, zones: Optional[Iterable[str]]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.zones = None if zones is None else set(zones)

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind):
        tok = self.peek()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        phi = self.disjunction()
        self.take("eof")
        return phi

    def disjunction(self):
        phi = self.conjunction()
        while self.peek()[0] == "or":
            self.i += 1
            phi = Or(phi, self.conjunction())
        return phi

    def conjunction(self):
        phi = self.until()
        while self.peek()[0] == "and":
            self.i += 1
            phi = And(phi, self.until())
        return phi

    def until(self):
        left = self.unary()
        if self.peek()[0] == "U":
            self.i += 1
            return U(left, self.until())
        return left

    def unary(self):
        kind, value, pos = self.peek()
        if kind == "not":
            self.i += 1
            return Not(self.unary())
        if kind == "F":
            self.i += 1
            return F(self.unary())
        if kind == "G":
            self.i += 1
            return G(self.unary())
        if kind == "true":
            self.i += 1
            return TRUE
        if kind == "atom":
            self.i += 1
            if self.zones is not None and value not in self.zones:
                raise FormulaSyntaxError(f"unknown zone {value!r}", pos)
            return Atom(value)
        if kind == "lpar":
            self.i += 1
            phi = self.disjunction()
            self.take("rpar")
            return phi
        raise FormulaSyntaxError(f"unexpected {value or 'end of input'!r}", pos)


def parse(text: str, zones: Optional[Iterable[str]] = None):
    """Parse a formula; zone names made only of the letters F and G are not allowed."""
    return _Parser(text, zones).parse()


_ASCII = {And: "&", Or: "|", U: "U", Not: "!"}
_UNICODE = {And: "∧", Or: "∨", U: "U", Not: "¬"}


def format_formula(phi, unicode: bool = False) -> str:
    sym = _UNICODE if unicode else _ASCII

    def operand(sub):
        text = go(sub)
        return f"({text})" if isinstance(sub, BINARY) else text

    def go(p):
        if isinstance(p, TrueF):
            return "true"
        if isinstance(p, Atom):
            return p.name
        if isinstance(p, Not):
            return sym[Not] + operand(p.arg)
        if isinstance(p, (F, G)):
            ops = ""
            while isinstance(p, (F, G)):
                ops += "F" if isinstance(p, F) else "G"
                p = p.arg
            return f"{ops} {operand(p)}"
        return f"{operand(p.left)} {sym[type(p)]} {operand(p.right)}"

    return go(phi)


# ---------------------------------------------------------------- lasso words


def eval_lasso(word, phi) -> bool:
    """Decide ``word |= phi`` for an ultimately periodic word (prefix, period)."""
    letters = [frozenset(a) for a in word.prefix] + [frozenset(a) for a in word.period]
    masks = LassoMasks.single(letters, len(word.prefix))
    return bool(eval_masks(masks, phi)[0])


class LassoMasks:
    """Bit-parallel encoding of a family of lasso words of one shape.

    Bit ``w`` of ``atom(name, i)`` is set when word ``w`` has ``name`` in its
    letter at position ``i``.  ``enumerate_all`` encodes every word of the
    shape over the given atoms, word ``w`` having letter ``(w >> k*i) & (2^k-1)``
    at position ``i``.
    """

    def __init__(self, length: int, loop: int, full: int, table: dict):
        self.length = length
        self.loop = loop
        self.full = full
        self.table = table

    @classmethod
    def single(cls, letters: Sequence, loop: int) -> "LassoMasks":
        table = {}
        for i, a in enumerate(letters):
            for name in a:
                table[(name, i)] = 1
        return cls(len(letters), loop, 1, table)

    @classmethod
    def enumerate_all(cls, atoms: Sequence[str], length: int, loop: int) -> "LassoMasks":
        k = len(atoms)
        total = 1 << (k * length)
        table = {}
        for i in range(length):
            for b, name in enumerate(atoms):
                shift = k * i + b
                # bit ``shift`` of the word index selects the atom: runs of 2^shift
                run = (1 << (1 << shift)) - 1
                unit = run << (1 << shift)
                reps = total >> (shift + 1)
                table[(name, i)] = _repeat(unit, 1 << (shift + 1), reps)
        return cls(length, loop, (1 << total) - 1, table)

    def atom(self, name: str, i: int) -> int:
        return self.table.get((name, i), 0)

    def letter_has(self, names, i: int) -> int:
        out = self.full
        for n in names:
            out &= self.atom(n, i)
        return out

    def succ(self, i: int) -> int:
        return i + 1 if i + 1 < self.length else self.loop


def _repeat(unit: int, width: int, reps: int) -> int:
    """``unit`` repeated ``reps`` times at stride ``width`` bits."""
    out, block, count = 0, unit, 1
    pos = 0
    while reps:
        if reps & 1:
            out |= block << pos
            pos += width * count
        block |= block << (width * count)
        count *= 2
        reps >>= 1
    return out


def eval_masks(masks: LassoMasks, phi) -> list:
    """Per-position truth masks of ``phi`` over the encoded family of words."""
    n, p0, full = masks.length, masks.loop, masks.full
    cache = {}

    def until(left, right):
        r = [0] * n
        # least fixpoint around the loop: two backward sweeps of the period
        for _ in range(2):
            for i in range(n - 1, p0 - 1, -1):
                r[i] = right[i] | (left[i] & r[masks.succ(i)])
        for i in range(p0 - 1, -1, -1):
            r[i] = right[i] | (left[i] & r[i + 1])
        return r

    def ev(f) -> list:
        if f in cache:
            return cache[f]
        if isinstance(f, TrueF):
            r = [full] * n
        elif isinstance(f, Atom):
            r = [masks.atom(f.name, i) for i in range(n)]
        elif isinstance(f, Not):
            r = [full & ~v for v in ev(f.arg)]
        elif isinstance(f, And):
            r = [a & b for a, b in zip(ev(f.left), ev(f.right))]
        elif isinstance(f, Or):
            r = [a | b for a, b in zip(ev(f.left), ev(f.right))]
        elif isinstance(f, F):
            r = until([full] * n, ev(f.arg))
        elif isinstance(f, G):
            r = [full & ~v for v in until([full] * n, [full & ~v for v in ev(f.arg)])]
        elif isinstance(f, U):
            r = until(ev(f.left), ev(f.right))
        else:
            raise TypeError(f"not a formula: {f!r}")
        cache[f] = r
        return r

    return ev(phi)


def eval_unrolled(word, phi, copies: int) -> bool:
    """Reference semantics on the finite unrolling prefix . period^copies.

    The last copy of the period is treated as looping onto itself, so the
    result coincides with the lasso semantics once ``copies`` exceeds the
    nesting depth of ``phi``.
    """
    letters = [frozenset(a) for a in word.prefix] + [frozenset(a) for a in word.period] * copies
    n = len(letters)
    loop = n - len(word.period)

    def later(i):
        return list(range(i, n)) + (list(range(loop, i)) if i >= loop else [])

    def holds(f, i) -> bool:
        if isinstance(f, TrueF):
            return True
        if isinstance(f, Atom):
            return f.name in letters[i]
        if isinstance(f, Not):
            return not holds(f.arg, i)
        if isinstance(f, And):
            return holds(f.left, i) and holds(f.right, i)
        if isinstance(f, Or):
            return holds(f.left, i) or holds(f.right, i)
        if isinstance(f, F):
            return any(holds(f.arg, j) for j in later(i))
        if isinstance(f, G):
            return all(holds(f.arg, j) for j in later(i))
        if isinstance(f, U):
            for j in later(i):
                if holds(f.right, j):
                    return True
                if not holds(f.left, j):
                    return False
            return False
        raise TypeError(f)

    return holds(phi, 0)


# ---------------------------------------------------------------- rewrites


class FragmentError(ValueError):
    pass


def rewrite_neg_fg(phi):
    """Canonical form of a single F/G/! chain over an atom (or true)."""
    ops = []
    positive = True
    p = phi
    while isinstance(p, UNARY):
        if isinstance(p, Not):
            positive = not positive
        elif isinstance(p, F):
            ops.append("F" if positive else "G")
        else:
            ops.append("G" if positive else "F")
        p = p.arg
    if not isinstance(p, (Atom, TrueF)):
        raise FragmentError("expected a chain of F, G and ! over an atom")
    if isinstance(p, TrueF):
        return TRUE if positive else Not(TRUE)
    collapsed = []
    for op in ops:
        if not collapsed or collapsed[-1] != op:
            collapsed.append(op)
    # alternating runs of length >= 3 collapse: FGF -> GF, GFG -> FG
    while len(collapsed) >= 3:
        collapsed = collapsed[1:]
    out = p if positive else Not(p)
    for op in reversed(collapsed):
        out = F(out) if op == "F" else G(out)
    return out


def distribute(phi):
    """Normal forms of the (F, |) and (G, &) fragments."""
    ops = operators(phi)
    if ops <= {"F", "|"}:
        disjuncts = []

        def collect(p, under_f):
            if isinstance(p, Or):
                collect(p.left, under_f)
                collect(p.right, under_f)
            elif isinstance(p, F):
                collect(p.arg, True)
            elif isinstance(p, (Atom, TrueF)):
                item = F(p) if under_f else p
                if item not in disjuncts:
                    disjuncts.append(item)
            else:
                raise FragmentError("unexpected operator")

        collect(phi, False)
        return disj(disjuncts)
    if ops <= {"G", "&"}:
        now, always = set(), set()

        def collect(p, under_g):
            if isinstance(p, And):
                collect(p.left, under_g)
                collect(p.right, under_g)
            elif isinstance(p, G):
                collect(p.arg, True)
            elif isinstance(p, Atom):
                (always if under_g else now).add(p.name)
            elif isinstance(p, TrueF):
                pass
            else:
                raise FragmentError("unexpected operator")

        collect(phi, False)
        if not always:
            return atoms_conj(now)
        tail = G(atoms_conj(always))
        return And(atoms_conj(now), tail) if now else tail
    raise FragmentError("distribute expects a formula over {F, |} or {G, &}")


def rewrite_or_until(disjuncts: Sequence, phi):
    """An or-free formula equivalent to (d1 | ... | dn) U phi."""
    disjuncts = list(disjuncts)
    if not disjuncts:
        raise ValueError("need at least one disjunct")
    if len(disjuncts) == 1:
        return U(disjuncts[0], phi)
    first, rest = disjuncts[0], disjuncts[1:]
    swapped = rewrite_or_until(rest, first)
    return rewrite_or_until([U(first, d) for d in rest], U(swapped, phi))


# ---------------------------------------------------------------- flat formulas


def _names_key(s: frozenset) -> tuple:
    return tuple(sorted(s))


@dataclass(frozen=True)
class FlatFormula:
    """now & G always & AND GF recurs & AND F eventually, in canonical order."""

    now: frozenset = frozenset()
    always: frozenset = frozenset()
    recurs: tuple = ()
    eventually: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "now", frozenset(self.now))
        object.__setattr__(self, "always", frozenset(self.always))
        object.__setattr__(self, "recurs", tuple(sorted((frozenset(r) for r in self.recurs), key=_names_key)))
        object.__setattr__(self, "eventually", tuple(sorted(self.eventually, key=FlatFormula.sort_key)))

    def sort_key(self) -> tuple:
        return (_names_key(self.now), _names_key(self.always),
                tuple(_names_key(r) for r in self.recurs),
                tuple(c.sort_key() for c in self.eventually))

    def merge(self, other: "FlatFormula") -> "FlatFormula":
        return FlatFormula(self.now | other.now, self.always | other.always,
                           self.recurs + other.recurs, self.eventually + other.eventually)

    def fcount(self) -> int:
        return sum(1 + c.fcount() for c in self.eventually)

    def to_formula(self):
        parts = [Atom(a) for a in sorted(self.now)]
        parts += [G(F(atoms_conj(r))) for r in self.recurs]
        if self.always:
            parts.append(G(atoms_conj(self.always)))
        parts += [F(c.to_formula()) for c in self.eventually]
        return conj(parts)

    def format(self, unicode: bool = False) -> str:
        sep = " ∧ " if unicode else " & "
        parts = sorted(self.now)
        parts += ["GF " + _group(r, unicode) for r in self.recurs]
        if self.always:
            parts.append("G " + _group(self.always, unicode))
        for c in self.eventually:
            pieces = len(c.now) + len(c.recurs) + len(c.eventually) + (1 if c.always else 0)
            if pieces == 1 and c.always:
                parts.append("FG " + _group(c.always, unicode))
            elif pieces <= 1:
                parts.append("F " + c.format(unicode))
            else:
                parts.append(f"F ({c.format(unicode)})")
        return sep.join(parts) if parts else "true"

    def __str__(self):
        return self.format()


def _group(names: frozenset, unicode: bool) -> str:
    if len(names) == 1:
        return next(iter(names))
    if not names:
        return "true"
    sep = " ∧ " if unicode else " & "
    return "(" + sep.join(sorted(names)) + ")"


def _split_conjunction(phi):
    """Split an (F, G, &) formula into (atoms, G-arguments, F-arguments)."""
    atoms, gs, fs = set(), [], []

    def go(p):
        if isinstance(p, And):
            go(p.left)
            go(p.right)
        elif isinstance(p, Atom):
            atoms.add(p.name)
        elif isinstance(p, TrueF):
            pass
        elif isinstance(p, G):
            gs.append(p.arg)
        elif isinstance(p, F):
            fs.append(p.arg)
        else:
            raise FragmentError(f"operator {type(p).__name__} outside (F, G, &)")

    go(phi)
    return atoms, gs, fs


def _flat_parts(phi, kind: str) -> list:
    """The conjuncts of flat_G / flat_GF / flat_FG as (kind, atom set) pairs."""
    atoms, gs, fs = _split_conjunction(phi)
    inner_g = {"G": "G", "GF": "FG", "FG": "FG"}[kind]
    out = [(kind, frozenset(atoms))]
    for g in gs:
        out += _flat_parts(g, inner_g)
    for f in fs:
        out += _flat_parts(f, "GF")
    return out


def _assemble(now, parts, eventually) -> FlatFormula:
    always = set()
    recurs = []
    eventually = list(eventually)
    for kind, s in parts:
        if kind == "G":
            always |= s
        elif kind == "GF":
            recurs.append(s)
        else:
            eventually.append(FlatFormula(always=s))
    return FlatFormula(frozenset(now), frozenset(always), tuple(recurs), tuple(eventually))


def flat_g(phi) -> list:
    return _flat_parts(phi, "G")


def flat_gf(phi) -> list:
    return _flat_parts(phi, "GF")


def flat_fg(phi) -> list:
    return _flat_parts(phi, "FG")


def flatten(phi) -> FlatFormula:
    atoms, gs, fs = _split_conjunction(phi)
    parts = []
    for g in gs:
        parts += flat_g(g)
    return _assemble(atoms, parts, [flatten(f) for f in fs])


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class FragmentTag:
    operators: frozenset
    bounded: bool
    unbounded_atoms: tuple = ()


def classify(phi, zones=None) -> FragmentTag:
    """Operator set plus boundedness of every atom (``zones`` maps names to Zone)."""
    from .core import is_bounded

    unbounded = ()
    if zones is not None:
        unbounded = tuple(sorted(a for a in atoms_of(phi) if not is_bounded(zones[a])))
    return FragmentTag(operators(phi), not unbounded, unbounded)
