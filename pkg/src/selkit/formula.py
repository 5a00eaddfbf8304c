"""Formula AST, scenarios, common-knowledge expansion and fragment enumeration.

Formulas are immutable, hashable trees. ``Everybody`` is surface sugar only:
it is produced by the parser and removed by :func:`expand_everybody` before a
formula reaches any reasoning code. Common knowledge is not a connective at
all; it lives on :class:`Assumption` as :attr:`Mode.COMMON`.
"""

from __future__ import annotations

import enum
import itertools
import logging
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

log = logging.getLogger(__name__)

ATOM_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


class BudgetError(Exception):
    """A formula-count cap would be exceeded."""


class SignatureError(ValueError):
    """A formula mentions an atom or agent outside the declared signature."""


@dataclass(frozen=True, slots=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Top:
    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Bottom:
    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Not:
    arg: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class And:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Or:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Implies:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Iff:
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Knows:
    agent: int
    arg: Formula

    def __str__(self) -> str:
        return _render(self)


@dataclass(frozen=True, slots=True)
class Everybody:
    """Parser-level ``E`` macro; never present in an expanded formula."""

    arg: Formula


Formula = Union[Atom, Top, Bottom, Not, And, Or, Implies, Iff, Knows]
BINARY = (And, Or, Implies, Iff)
TOP = Top()
BOTTOM = Bottom()


def _render(f: Formula) -> str:
    from .parser import render

    return render(f)


def conj(formulas: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``Top``."""
    items = list(formulas)
    if not items:
        return TOP
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


def disj(formulas: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is ``Bottom``."""
    items = list(formulas)
    if not items:
        return BOTTOM
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Not, Knows, Everybody)):
        yield from subformulas(f.arg)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def atoms_of(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def agents_of(f: Formula) -> set[int]:
    return {g.agent for g in subformulas(f) if isinstance(g, Knows)}


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def modal_depth(f: Formula) -> int:
    """Nesting depth of knowledge operators; ``E`` counts as one level."""
    if isinstance(f, (Knows, Everybody)):
        return 1 + modal_depth(f.arg)
    if isinstance(f, Not):
        return modal_depth(f.arg)
    if isinstance(f, BINARY):
        return max(modal_depth(f.left), modal_depth(f.right))
    return 0


def expand_everybody(f: Formula, agent_count: int) -> Formula:
    """Replace every ``E phi`` by ``K1 phi & ... & Kn phi``."""
    if isinstance(f, Everybody):
        body = expand_everybody(f.arg, agent_count)
        return conj(Knows(i, body) for i in range(1, agent_count + 1))
    if isinstance(f, Not):
        return Not(expand_everybody(f.arg, agent_count))
    if isinstance(f, Knows):
        return Knows(f.agent, expand_everybody(f.arg, agent_count))
    if isinstance(f, BINARY):
        return type(f)(expand_everybody(f.left, agent_count), expand_everybody(f.right, agent_count))
    return f


def check_signature(f: Formula, agent_count: int, atoms: Iterable[str]) -> None:
    known = set(atoms)
    for g in subformulas(f):
        if isinstance(g, Atom) and g.name not in known:
            raise SignatureError(f"unknown atom {g.name!r}")
        if isinstance(g, Knows) and not 1 <= g.agent <= agent_count:
            raise SignatureError(f"agent {g.agent} out of range 1..{agent_count}")
        if isinstance(g, Everybody):
            raise SignatureError("unexpanded E macro")


# -- normalisation -----------------------------------------------------------

_KIND_RANK = {Bottom: 0, Top: 1, Atom: 2, Not: 3, Knows: 4, And: 5, Or: 6, Implies: 7, Iff: 8}


def order_key(f: Formula) -> tuple:
    """A fixed total order on formulas (used for sorting, not semantics)."""
    rank = _KIND_RANK[type(f)]
    if isinstance(f, Atom):
        return (rank, f.name)
    if isinstance(f, Not):
        return (rank, order_key(f.arg))
    if isinstance(f, Knows):
        return (rank, f.agent, order_key(f.arg))
    if isinstance(f, BINARY):
        return (rank, order_key(f.left), order_key(f.right))
    return (rank,)


def _flatten(f: Formula, kind: type) -> list[Formula]:
    if isinstance(f, kind):
        return _flatten(f.left, kind) + _flatten(f.right, kind)
    return [f]


def normalize(f: Formula) -> Formula:
    """Cheap syntactic canonical form.

    Removes double negations and flattens, deduplicates and sorts conjunct
    and disjunct lists. Logical equivalence beyond that is not detected.
    """
    if isinstance(f, Not):
        inner = normalize(f.arg)
        return inner.arg if isinstance(inner, Not) else Not(inner)
    if isinstance(f, Knows):
        return Knows(f.agent, normalize(f.arg))
    if isinstance(f, (And, Or)):
        kind = type(f)
        parts = _flatten(normalize(f.left), kind) + _flatten(normalize(f.right), kind)
        unique = sorted(set(parts), key=order_key)
        out = unique[-1]
        for g in reversed(unique[:-1]):
            out = kind(g, out)
        return out
    if isinstance(f, (Implies, Iff)):
        return type(f)(normalize(f.left), normalize(f.right))
    return f


# -- scenarios ---------------------------------------------------------------


class Mode(enum.Enum):
    PLAIN = "plain"
    COMMON = "common"


@dataclass(frozen=True, slots=True)
class Assumption:
    formula: Formula
    mode: Mode = Mode.PLAIN


@dataclass(frozen=True)
class Scenario:
    """Agents, atoms and assumptions; each assumption plain or common knowledge."""

    agent_count: int
    atoms: tuple[str, ...]
    assumptions: tuple[Assumption, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "assumptions", tuple(self.assumptions))
        if self.agent_count < 1:
            raise ValueError("agent_count must be positive")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atom names")
        for name in self.atoms:
            if not ATOM_RE.match(name):
                raise ValueError(f"bad atom name {name!r}")
        for a in self.assumptions:
            check_signature(a.formula, self.agent_count, self.atoms)

    @property
    def plain(self) -> list[Formula]:
        return [a.formula for a in self.assumptions if a.mode is Mode.PLAIN]

    @property
    def common(self) -> list[Formula]:
        return [a.formula for a in self.assumptions if a.mode is Mode.COMMON]

    def with_assumptions(self, *extra: Assumption) -> Scenario:
        return Scenario(self.agent_count, self.atoms, self.assumptions + tuple(extra))

    def max_assumption_depth(self) -> int:
        return max((modal_depth(a.formula) for a in self.assumptions), default=0)


DEFAULT_MAX_EXPANSION = 20_000


def prefixes(agent_count: int, length: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(1, agent_count + 1), repeat=length)


def expand_ck(s: Scenario, k: int, max_formulas: int = DEFAULT_MAX_EXPANSION) -> tuple[Formula, ...]:
    """Plain assumptions plus every ``P1...Pj A`` (j <= k) for each common one.

    Order is deterministic: assumptions in declaration order, prefixes by
    length then lexicographically. Syntactic duplicates are dropped.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    n = s.agent_count
    per_assumption = sum(n**j for j in range(k + 1))
    total = len(s.plain) + per_assumption * len(s.common)
    if total > max_formulas:
        raise BudgetError(f"common-knowledge expansion to depth {k} needs {total} formulas (cap {max_formulas})")
    out: dict[Formula, None] = {}
    for a in s.assumptions:
        if a.mode is Mode.PLAIN:
            out[a.formula] = None
            continue
        for j in range(k + 1):
            for prefix in prefixes(n, j):
                g = a.formula
                for agent in reversed(prefix):
                    g = Knows(agent, g)
                out[g] = None
    return tuple(out)


# -- fragments ---------------------------------------------------------------


class Shape(str, enum.Enum):
    LITERALS = "literals"
    KBOOL = "kbool"
    FULL = "full"


@dataclass(frozen=True)
class FragmentSpec:
    """Finite family of formulas standing in for "every formula".

    ``literals``: atom literals, closed under ``Ki``/``~Ki`` layer by layer.
    ``kbool``: as ``literals`` plus binary and/or of literals over distinct
    atoms at depth 0, and binary and/or of positive knowledge-literals at
    depth 1.
    ``full``: every formula over ~, &, |, ->, Ki with at most ``max_size``
    nodes, ordered by (depth, size).
    """

    atoms: tuple[str, ...]
    agent_count: int
    max_modal_depth: int
    shape: Shape = Shape.KBOOL
    size_budget: int = 2_000
    max_size: int = 5

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "shape", Shape(self.shape))
        if self.agent_count < 1 or self.max_modal_depth < 0 or self.size_budget < 1:
            raise ValueError("bad fragment parameters")
        if not self.atoms:
            raise ValueError("fragment needs at least one atom")


class Fragment(list):
    """Ordered formula list that remembers whether the size budget cut it."""

    truncated: bool = False


def _literals(atoms: Iterable[str]) -> list[Formula]:
    out: list[Formula] = []
    for a in atoms:
        out += [Atom(a), Not(Atom(a))]
    return out


def _knowledge_layer(prev: list[Formula], n: int) -> list[Formula]:
    out: list[Formula] = []
    for phi in prev:
        for i in range(1, n + 1):
            out += [Knows(i, phi), Not(Knows(i, phi))]
    return out


def _pairs(items: list[Formula]) -> list[Formula]:
    out: list[Formula] = []
    for x, y in itertools.combinations(items, 2):
        out += [And(x, y), Or(x, y)]
    return out


def _layered(spec: FragmentSpec) -> Iterator[Formula]:
    lits = _literals(spec.atoms)
    layer = list(lits)
    if spec.shape is Shape.KBOOL:
        layer += _pairs_distinct_atoms(lits)
    yield from layer
    for d in range(1, spec.max_modal_depth + 1):
        layer = _knowledge_layer(layer, spec.agent_count)
        if spec.shape is Shape.KBOOL and d == 1:
            positive = [Knows(i, lit) for lit in lits for i in range(1, spec.agent_count + 1)]
            layer += _pairs(positive)
        yield from layer


def _pairs_distinct_atoms(lits: list[Formula]) -> list[Formula]:
    out: list[Formula] = []
    for x, y in itertools.combinations(lits, 2):
        if atoms_of(x) != atoms_of(y):
            out += [And(x, y), Or(x, y)]
    return out


def _all_formulas(spec: FragmentSpec) -> list[Formula]:
    by_size: dict[int, list[Formula]] = {1: [Atom(a) for a in spec.atoms]}
    for s in range(2, spec.max_size + 1):
        level: list[Formula] = []
        for g in by_size[s - 1]:
            level.append(Not(g))
            if modal_depth(g) < spec.max_modal_depth:
                level += [Knows(i, g) for i in range(1, spec.agent_count + 1)]
        for ls in range(1, s - 1):
            rs = s - 1 - ls
            for left in by_size[ls]:
                for right in by_size[rs]:
                    level += [And(left, right), Or(left, right), Implies(left, right)]
        by_size[s] = level
    everything = [(modal_depth(g), s, g) for s, level in by_size.items() for g in level]
    everything.sort(key=lambda t: (t[0], t[1], order_key(t[2])))
    return [g for _, _, g in everything]


def enumerate_fragment(spec: FragmentSpec) -> Fragment:
    """Deterministic, normalize-deduplicated formula list for ``spec``.

    The list for depth d is a prefix of the list for depth d+1. If the size
    budget cuts the list short, ``result.truncated`` is set and a warning
    is logged.
    """
    source = _all_formulas(spec) if spec.shape is Shape.FULL else _layered(spec)
    out = Fragment()
    seen: set[Formula] = set()
    for g in source:
        g = normalize(g)
        if g in seen:
            continue
        if len(out) >= spec.size_budget:
            out.truncated = True
            log.warning("fragment truncated at %d formulas", spec.size_budget)
            break
        seen.add(g)
        out.append(g)
    return out
