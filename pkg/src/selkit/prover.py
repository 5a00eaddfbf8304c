"""Decision procedure for S5n with countermodels, and derivability from hypotheses.

The tableau works on negation normal form. Every tableau world belongs to
exactly one cluster per agent; a cluster is a block of that agent's
partition in the model being built. ``Ki phi`` at a world puts ``phi`` on
every member of its agent-i cluster, and ``~Ki phi`` (stored as a diamond)
asks for some member carrying ``~phi``; when no member carries it, a fresh
world joins the cluster and opens new singleton clusters for every other
agent. Bodies of modal formulas have strictly smaller modal depth, so the
cluster tree is finite and the search terminates without loop checks.

Disjunctions are handled DPLL-style: a disjunct that is already refuted
syntactically forces the other one, otherwise the search branches with
chronological backtracking over an undo trail.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence, Union

from .formula import (
    BOTTOM,
    And,
    Atom,
    Bottom,
    Formula,
    FragmentSpec,
    Iff,
    Implies,
    Knows,
    Not,
    Or,
    Scenario,
    Top,
    atoms_of,
    check_signature,
    enumerate_fragment,
    expand_ck,
    modal_depth,
    DEFAULT_MAX_EXPANSION,
)
from .kripke import KripkeStructure, PointedModel, check, submodel

log = logging.getLogger(__name__)

DEFAULT_MAX_NODES = 200_000
SHRINK_LIMIT = 48  # models with more worlds are returned as built


class ResourceLimitError(RuntimeError):
    """The tableau exceeded its node budget; no verdict was reached."""


class InconsistentScenarioError(ValueError):
    """The scenario derives falsum."""


# -- results -----------------------------------------------------------------


@dataclass(frozen=True)
class Satisfiable:
    witness: PointedModel


@dataclass(frozen=True)
class Unsatisfiable:
    trace: str


SatResult = Union[Satisfiable, Unsatisfiable]


class Validity(NamedTuple):
    valid: bool
    countermodel: PointedModel | None


@dataclass(frozen=True)
class Derivable:
    ck_depth_used: int = 0

    derivable = True


@dataclass(frozen=True)
class NotDerivable:
    countermodel: PointedModel
    ck_depth_tried: int = 0

    derivable = False


DerivabilityResult = Union[Derivable, NotDerivable]


@dataclass(frozen=True)
class Pass:
    ck_depth: int

    passed = True


@dataclass(frozen=True)
class Fail:
    witness: Formula
    agent: int
    ck_depth: int

    passed = False


@dataclass
class CompletenessReport:
    fragment: FragmentSpec
    ck_depth: int
    witness: Formula | None = None
    derivable: int = 0
    refutable: int = 0
    undetermined: list[Formula] = field(default_factory=list)
    truncated: bool = False

    @property
    def complete(self) -> bool:
        return self.witness is None


# -- NNF interning -----------------------------------------------------------

LIT, TOP_, BOT_, AND, OR, BOX, DIA = range(7)


class _Nodes:
    """Hash-consed NNF nodes: ``(kind, a, b)`` tuples addressed by integer id."""

    def __init__(self) -> None:
        self.table: list[tuple] = []
        self.ids: dict[tuple, int] = {}
        self.comp: list[int] = []
        self._nnf: dict[tuple[Formula, bool], int] = {}

    def make(self, kind: int, a=None, b=None) -> int:
        key = (kind, a, b)
        nid = self.ids.get(key)
        if nid is not None:
            return nid
        nid = len(self.table)
        self.table.append(key)
        self.ids[key] = nid
        self.comp.append(-1)
        if kind == LIT:
            other = self.make(LIT, a, not b)
        elif kind == TOP_:
            other = self.make(BOT_)
        elif kind == BOT_:
            other = self.make(TOP_)
        elif kind in (AND, OR):
            other = self.make(OR if kind == AND else AND, self.comp[a], self.comp[b])
        else:
            other = self.make(DIA if kind == BOX else BOX, a, self.comp[b])
        self.comp[nid] = other
        self.comp[other] = nid
        return nid

    def nnf(self, f: Formula, positive: bool = True) -> int:
        key = (f, positive)
        hit = self._nnf.get(key)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            nid = self.make(LIT, f.name, positive)
        elif isinstance(f, Top):
            nid = self.make(TOP_ if positive else BOT_)
        elif isinstance(f, Bottom):
            nid = self.make(BOT_ if positive else TOP_)
        elif isinstance(f, Not):
            nid = self.nnf(f.arg, not positive)
        elif isinstance(f, And):
            nid = self.make(AND if positive else OR, self.nnf(f.left, positive), self.nnf(f.right, positive))
        elif isinstance(f, Or):
            nid = self.make(OR if positive else AND, self.nnf(f.left, positive), self.nnf(f.right, positive))
        elif isinstance(f, Implies):
            nid = self.make(OR if positive else AND, self.nnf(f.left, not positive), self.nnf(f.right, positive))
        elif isinstance(f, Iff):
            # a <-> b  ==  (a -> b) & (b -> a)
            there = Implies(f.left, f.right)
            back = Implies(f.right, f.left)
            nid = self.nnf(And(there, back), positive)
        elif isinstance(f, Knows):
            nid = self.make(BOX if positive else DIA, f.agent, self.nnf(f.arg, positive))
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._nnf[key] = nid
        return nid


# -- tableau -----------------------------------------------------------------


class _Clash(Exception):
    pass


class _Tableau:
    def __init__(self, nodes: _Nodes, agent_count: int, max_nodes: int) -> None:
        self.nodes = nodes
        self.table = nodes.table
        self.comp = nodes.comp
        self.n = agent_count
        self.max_nodes = max_nodes
        self.spent = 0
        self.branches = 0

        self.labels: list[set[int]] = []
        self.ors: list[list[int]] = []
        self.cluster: list[list[int]] = []
        self.c_agent: list[int] = []
        self.c_members: list[list[int]] = []
        self.c_boxes: list[set[int]] = []
        self.c_boxlist: list[list[int]] = []
        self.c_dias: list[set[int]] = []
        self.c_dialist: list[list[int]] = []
        self.trail: list[tuple] = []
        self.queue: deque[tuple[int, int]] = deque()

    # structural edits, all recorded on the trail

    def _new_cluster(self, agent: int, world: int) -> int:
        c = len(self.c_agent)
        self.c_agent.append(agent)
        self.c_members.append([world])
        self.c_boxes.append(set())
        self.c_boxlist.append([])
        self.c_dias.append(set())
        self.c_dialist.append([])
        self.trail.append(("C",))
        return c

    def _new_world(self, home: int | None) -> int:
        self.spent += 1
        if self.spent > self.max_nodes:
            raise ResourceLimitError(f"tableau node budget {self.max_nodes} exceeded")
        w = len(self.labels)
        self.labels.append(set())
        self.ors.append([])
        self.cluster.append([-1] * self.n)
        self.trail.append(("W",))
        for i in range(self.n):
            if home is not None and self.c_agent[home] == i:
                self.cluster[w][i] = home
                self.c_members[home].append(w)
                self.trail.append(("M", home))
            else:
                self.cluster[w][i] = self._new_cluster(i, w)
        return w

    def undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            op = trail.pop()
            tag = op[0]
            if tag == "L":
                self.labels[op[1]].discard(op[2])
            elif tag == "O":
                self.ors[op[1]].pop()
            elif tag == "B":
                self.c_boxes[op[1]].discard(op[2])
                self.c_boxlist[op[1]].pop()
            elif tag == "D":
                self.c_dias[op[1]].discard(op[2])
                self.c_dialist[op[1]].pop()
            elif tag == "M":
                self.c_members[op[1]].pop()
            elif tag == "C":
                for lst in (self.c_agent, self.c_members, self.c_boxes, self.c_boxlist,
                            self.c_dias, self.c_dialist):
                    lst.pop()
            elif tag == "W":
                self.labels.pop()
                self.ors.pop()
                self.cluster.pop()
        self.queue.clear()

    # rule application

    def add(self, w: int, f: int) -> None:
        label = self.labels[w]
        if f in label:
            return
        if self.comp[f] in label or self.table[f][0] == BOT_:
            raise _Clash
        label.add(f)
        self.trail.append(("L", w, f))
        self.queue.append((w, f))

    def propagate(self) -> None:
        table = self.table
        while self.queue:
            w, f = self.queue.popleft()
            kind, a, b = table[f]
            if kind == AND:
                self.add(w, a)
                self.add(w, b)
            elif kind == OR:
                self.ors[w].append(f)
                self.trail.append(("O", w))
            elif kind == BOX:
                c = self.cluster[w][a - 1]
                if b not in self.c_boxes[c]:
                    if self.comp[b] in self.c_dias[c]:
                        raise _Clash
                    self.c_boxes[c].add(b)
                    self.c_boxlist[c].append(b)
                    self.trail.append(("B", c, b))
                    for v in self.c_members[c]:
                        self.add(v, b)
            elif kind == DIA:
                c = self.cluster[w][a - 1]
                if b not in self.c_dias[c]:
                    if self.comp[b] in self.c_boxes[c]:
                        raise _Clash
                    self.c_dias[c].add(b)
                    self.c_dialist[c].append(b)
                    self.trail.append(("D", c, b))

    def refuted(self, w: int, f: int, depth: int = 0) -> bool:
        """Cheap, sound test that ``f`` cannot be added at ``w`` on this branch."""
        if self.comp[f] in self.labels[w]:
            return True
        kind, a, b = self.table[f]
        if kind == BOT_:
            return True
        if depth > 3:
            return False
        if kind == AND:
            return self.refuted(w, a, depth + 1) or self.refuted(w, b, depth + 1)
        if kind == OR:
            return self.refuted(w, a, depth + 1) and self.refuted(w, b, depth + 1)
        if kind == BOX:
            c = self.cluster[w][a - 1]
            nb = self.comp[b]
            if nb in self.c_dias[c]:
                return True
            return any(nb in self.labels[v] for v in self.c_members[c]) or self.refuted(w, b, depth + 1)
        if kind == DIA:
            return self.comp[b] in self.c_boxes[self.cluster[w][a - 1]]
        return False

    def next_step(self):
        """Apply one deterministic step, or return a branching point, or None."""
        labels = self.labels
        pending = None
        for w in range(len(labels)):
            label = labels[w]
            for f in self.ors[w]:
                _, a, b = self.table[f]
                if a in label or b in label:
                    continue
                ra, rb = self.refuted(w, a), self.refuted(w, b)
                if ra and rb:
                    raise _Clash
                if ra or rb:
                    self.add(w, b if ra else a)
                    return "step"
                if pending is None:
                    pending = (w, a, b)
        for c in range(len(self.c_agent)):
            members = self.c_members[c]
            for phi in self.c_dialist[c]:
                if any(phi in labels[v] for v in members):
                    continue
                v = self._new_world(c)
                self.add(v, phi)
                for psi in self.c_boxlist[c]:
                    self.add(v, psi)
                return "step"
        return pending

    def run(self, roots: Sequence[int]) -> bool:
        """True iff an open, fully expanded branch exists for ``roots``."""
        stack: list[tuple[int, int, int]] = []
        ok = True
        try:
            root = self._new_world(None)
            for f in roots:
                self.add(root, f)
            self.propagate()
        except _Clash:
            return False
        while True:
            try:
                if ok:
                    step = self.next_step()
                    if step is None:
                        return True
                    if step != "step":
                        w, a, b = step
                        self.branches += 1
                        self.spent += 1
                        if self.spent > self.max_nodes:
                            raise ResourceLimitError(f"tableau node budget {self.max_nodes} exceeded")
                        stack.append((len(self.trail), w, b))
                        self.add(w, a)
                    self.propagate()
                    continue
                if not stack:
                    return False
                mark, w, alt = stack.pop()
                self.undo(mark)
                ok = True
                self.add(w, alt)
                self.propagate()
            except _Clash:
                ok = False

    def model(self, atoms: Iterable[str]) -> PointedModel:
        names = [f"w{k}" for k in range(len(self.labels))]
        atoms = tuple(atoms)
        valuation = {}
        for w, label in enumerate(self.labels):
            true = set()
            for f in label:
                kind, a, b = self.table[f]
                if kind == LIT and b:
                    true.add(a)
            valuation[names[w]] = true & set(atoms)
        partitions = []
        for i in range(self.n):
            blocks = [frozenset(names[v] for v in self.c_members[c])
                      for c in range(len(self.c_agent)) if self.c_agent[c] == i]
            partitions.append(tuple(blocks))
        structure = KripkeStructure(self.n, atoms, tuple(names), tuple(partitions), valuation)
        return PointedModel(structure, names[0])


def shrink(pm: PointedModel, formulas: Sequence[Formula]) -> PointedModel:
    """Greedily drop worlds while every formula stays true at the designated one.

    Tableau witnesses are often redundant; a smaller countermodel reads
    better. Worlds are renamed ``w0..`` in order afterwards.
    """
    m = pm.structure
    if len(m.worlds) > SHRINK_LIMIT:
        return pm
    for w in reversed(m.worlds):
        if w == pm.designated:
            continue
        smaller = submodel(m, [v for v in m.worlds if v != w])
        if all(check(smaller, f, pm.designated) for f in formulas):
            m = smaller
    names = {w: f"w{k}" for k, w in enumerate(m.worlds)}
    renamed = KripkeStructure(
        m.agents, m.atoms, tuple(names.values()),
        tuple(tuple(frozenset(names[v] for v in b) for b in blocks) for blocks in m.partitions),
        {names[w]: m.valuation[w] for w in m.worlds},
    )
    return PointedModel(renamed, names[pm.designated])


# -- public API --------------------------------------------------------------


class Prover:
    """Reusable prover; shares NNF interning across many queries.

    Instances are not thread-safe; create one per thread.
    """

    def __init__(self, agent_count: int, atoms: Iterable[str] = (), *,
                 max_nodes: int = DEFAULT_MAX_NODES) -> None:
        if agent_count < 1:
            raise ValueError("agent_count must be positive")
        self.agent_count = agent_count
        self.atoms = tuple(atoms)
        self.max_nodes = max_nodes
        self.nodes = _Nodes()

    def _signature(self, formulas: Iterable[Formula]) -> tuple[str, ...]:
        formulas = list(formulas)
        names = dict.fromkeys(self.atoms)
        for f in formulas:
            for a in sorted(atoms_of(f)):
                names.setdefault(a)
            check_signature(f, self.agent_count, names)
        return tuple(names)

    def satisfiable_all(self, formulas: Sequence[Formula], *, minimize: bool = True) -> SatResult:
        """Joint satisfiability of ``formulas`` at a single world.

        With ``minimize`` the witness is shrunk before it is returned; verdict-only
        callers can skip that.
        """
        atoms = self._signature(formulas)
        tab = _Tableau(self.nodes, self.agent_count, self.max_nodes)
        if tab.run([self.nodes.nnf(f) for f in formulas]):
            witness = tab.model(atoms)
            return Satisfiable(shrink(witness, formulas) if minimize else witness)
        return Unsatisfiable(f"all branches closed ({tab.branches} branch points, "
                             f"{tab.spent} nodes)")

    def satisfiable(self, f: Formula) -> SatResult:
        return self.satisfiable_all([f])

    def valid(self, f: Formula) -> Validity:
        res = self.satisfiable(Not(f))
        if isinstance(res, Satisfiable):
            return Validity(False, res.witness)
        return Validity(True, None)

    def derives(self, hypotheses: Iterable[Formula], goal: Formula, ck_depth: int = 0, *,
                minimize: bool = True) -> DerivabilityResult:
        """Hypotheses are asserted at the root world beside the negated goal."""
        res = self.satisfiable_all([*hypotheses, Not(goal)], minimize=minimize)
        if isinstance(res, Satisfiable):
            return NotDerivable(res.witness, ck_depth)
        return Derivable(ck_depth)


def satisfiable(f: Formula, agent_count: int, *, max_nodes: int = DEFAULT_MAX_NODES) -> SatResult:
    """Decide S5n satisfiability; a positive answer carries a pointed model."""
    return Prover(agent_count, max_nodes=max_nodes).satisfiable(f)


def valid(f: Formula, agent_count: int, *, max_nodes: int = DEFAULT_MAX_NODES) -> Validity:
    return Prover(agent_count, max_nodes=max_nodes).valid(f)


def derives(hypotheses: Iterable[Formula], goal: Formula, agent_count: int, *,
            atoms: Iterable[str] = (), max_nodes: int = DEFAULT_MAX_NODES) -> DerivabilityResult:
    """Derivability of ``goal`` from finitely many hypotheses (Modus Ponens closure)."""
    return Prover(agent_count, atoms, max_nodes=max_nodes).derives(hypotheses, goal)


def default_ck_depth(s: Scenario, goal: Formula) -> int:
    """Heuristic prefix depth when the caller gives none."""
    return modal_depth(goal) + s.max_assumption_depth() + 1


def derives_scenario(s: Scenario, goal: Formula, ck_depth: int | None = None, *,
                     max_nodes: int = DEFAULT_MAX_NODES, max_expansion: int = DEFAULT_MAX_EXPANSION,
                     prover: Prover | None = None) -> DerivabilityResult:
    """Derivability from the depth-``ck_depth`` expansion of ``s``.

    ``Derivable`` also holds for the full common-knowledge closure. For
    scenarios with common-knowledge assumptions ``NotDerivable`` only speaks
    about the depth tried.
    """
    if ck_depth is None:
        ck_depth = default_ck_depth(s, goal)
    hyps = expand_ck(s, ck_depth, max_expansion)
    check_signature(goal, s.agent_count, s.atoms)
    prover = prover or Prover(s.agent_count, s.atoms, max_nodes=max_nodes)
    return prover.derives(hyps, goal, ck_depth)


def necessitation_check(s: Scenario, k: int, *, max_nodes: int = DEFAULT_MAX_NODES,
                        max_expansion: int = DEFAULT_MAX_EXPANSION) -> Pass | Fail:
    """Does the depth-(k+1) expansion derive ``Ki A`` for every A of the depth-k one?"""
    base = expand_ck(s, k, max_expansion)
    wider = expand_ck(s, k + 1, max_expansion)
    prover = Prover(s.agent_count, s.atoms, max_nodes=max_nodes)
    for a in base:
        for i in range(1, s.agent_count + 1):
            if not prover.derives(wider, Knows(i, a), k + 1, minimize=False).derivable:
                return Fail(a, i, k)
    return Pass(k)


def completeness_check(s: Scenario, frag: FragmentSpec, ck_depth: int, *,
                       max_nodes: int = DEFAULT_MAX_NODES,
                       max_expansion: int = DEFAULT_MAX_EXPANSION,
                       stop_at_first: bool = False) -> CompletenessReport:
    """Classify every fragment formula as derivable, refutable or undetermined."""
    prover = Prover(s.agent_count, s.atoms, max_nodes=max_nodes)
    hyps = expand_ck(s, ck_depth, max_expansion)
    if prover.derives(hyps, BOTTOM, ck_depth, minimize=False).derivable:
        raise InconsistentScenarioError(f"scenario derives FALSE at depth {ck_depth}")
    formulas = enumerate_fragment(frag)
    report = CompletenessReport(frag, ck_depth, truncated=formulas.truncated)
    for f in formulas:
        check_signature(f, s.agent_count, s.atoms)
        if prover.derives(hyps, f, ck_depth, minimize=False).derivable:
            report.derivable += 1
        elif prover.derives(hyps, Not(f), ck_depth, minimize=False).derivable:
            report.refutable += 1
        else:
            report.undetermined.append(f)
            if report.witness is None:
                report.witness = f
                if stop_at_first:
                    break
    return report
