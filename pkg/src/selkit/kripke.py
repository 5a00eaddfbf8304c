"""Finite S5 Kripke structures stored as per-agent partitions."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import (
    And,
    Atom,
    Bottom,
    Formula,
    Iff,
    Implies,
    Knows,
    Mode,
    Not,
    Or,
    Scenario,
    SignatureError,
    Top,
    atoms_of,
    agents_of,
)


class StructureError(ValueError):
    """Blocks overlap, fail to cover the worlds, or the valuation is malformed."""


class EmptyAnnouncementError(ValueError):
    """No world satisfies the announced formula."""


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    """Worlds, one partition of the worlds per agent, and a valuation.

    ``partitions[i - 1]`` is agent ``i``'s partition. Storing blocks rather
    than relations makes every accessibility relation an equivalence.
    """

    agents: int
    atoms: tuple[str, ...]
    worlds: tuple[str, ...]
    partitions: tuple[tuple[frozenset[str], ...], ...]
    valuation: Mapping[str, frozenset[str]]
    _block_of: tuple[dict[str, frozenset[str]], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "partitions",
                           tuple(tuple(frozenset(b) for b in blocks) for blocks in self.partitions))
        object.__setattr__(self, "valuation",
                           {w: frozenset(v) for w, v in dict(self.valuation).items()})
        self.validate()
        lookup = []
        for blocks in self.partitions:
            lookup.append({w: b for b in blocks for w in b})
        object.__setattr__(self, "_block_of", tuple(lookup))

    def validate(self) -> None:
        if self.agents < 1:
            raise StructureError("need at least one agent")
        if not self.worlds:
            raise StructureError("world set must be non-empty")
        if len(set(self.worlds)) != len(self.worlds):
            raise StructureError("duplicate world ids")
        if len(self.partitions) != self.agents:
            raise StructureError(f"expected {self.agents} partitions, got {len(self.partitions)}")
        everything = set(self.worlds)
        for i, blocks in enumerate(self.partitions, start=1):
            seen: set[str] = set()
            for b in blocks:
                if not b:
                    raise StructureError(f"agent {i}: empty block")
                if b & seen:
                    raise StructureError(f"agent {i}: overlapping blocks at {sorted(b & seen)}")
                seen |= b
            if seen != everything:
                missing, extra = everything - seen, seen - everything
                raise StructureError(f"agent {i}: blocks do not cover worlds "
                                     f"(missing {sorted(missing)}, unknown {sorted(extra)})")
        if set(self.valuation) != everything:
            raise StructureError("valuation must be defined on exactly the worlds")
        for w, true_atoms in self.valuation.items():
            unknown = true_atoms - set(self.atoms)
            if unknown:
                raise StructureError(f"world {w}: unknown atoms {sorted(unknown)}")

    @classmethod
    def build(cls, agents: int, atoms: Iterable[str], worlds: Iterable[str],
              partitions: Mapping[int, Iterable[Iterable[str]]] | Sequence[Iterable[Iterable[str]]],
              valuation: Mapping[str, Iterable[str]]) -> KripkeStructure:
        """Convenience constructor; ``partitions`` may be keyed by agent number."""
        if isinstance(partitions, Mapping):
            parts = [partitions.get(i, partitions.get(str(i), ())) for i in range(1, agents + 1)]
        else:
            parts = list(partitions)
        return cls(agents, tuple(atoms), tuple(worlds),
                   tuple(tuple(frozenset(b) for b in p) for p in parts),
                   {w: frozenset(v) for w, v in valuation.items()})

    def block(self, agent: int, world: str) -> frozenset[str]:
        return self._block_of[agent - 1][world]

    def related(self, agent: int, u: str, v: str) -> bool:
        return v in self.block(agent, u)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return (self.agents == other.agents and set(self.atoms) == set(other.atoms)
                and set(self.worlds) == set(other.worlds)
                and all(set(a) == set(b) for a, b in zip(self.partitions, other.partitions))
                and dict(self.valuation) == dict(other.valuation))

    def __hash__(self) -> int:
        return hash((self.agents, frozenset(self.worlds)))


@dataclass(frozen=True)
class PointedModel:
    structure: KripkeStructure
    designated: str

    def __post_init__(self) -> None:
        if self.designated not in self.structure.worlds:
            raise StructureError(f"designated world {self.designated!r} not in structure")


def _signature(m: KripkeStructure, f: Formula) -> None:
    unknown = atoms_of(f) - set(m.atoms)
    if unknown:
        raise SignatureError(f"atoms {sorted(unknown)} not in model signature")
    bad = {i for i in agents_of(f) if not 1 <= i <= m.agents}
    if bad:
        raise SignatureError(f"agents {sorted(bad)} not in model (1..{m.agents})")


def extension(m: KripkeStructure, f: Formula, _memo: dict | None = None) -> frozenset[str]:
    """The set of worlds of ``m`` at which ``f`` holds."""
    if _memo is None:
        _signature(m, f)
        _memo = {}
    hit = _memo.get(f)
    if hit is not None:
        return hit
    if isinstance(f, Atom):
        out = frozenset(w for w in m.worlds if f.name in m.valuation[w])
    elif isinstance(f, Top):
        out = frozenset(m.worlds)
    elif isinstance(f, Bottom):
        out = frozenset()
    elif isinstance(f, Not):
        out = frozenset(m.worlds) - extension(m, f.arg, _memo)
    elif isinstance(f, And):
        out = extension(m, f.left, _memo) & extension(m, f.right, _memo)
    elif isinstance(f, Or):
        out = extension(m, f.left, _memo) | extension(m, f.right, _memo)
    elif isinstance(f, Implies):
        out = (frozenset(m.worlds) - extension(m, f.left, _memo)) | extension(m, f.right, _memo)
    elif isinstance(f, Iff):
        left, right = extension(m, f.left, _memo), extension(m, f.right, _memo)
        out = frozenset(w for w in m.worlds if (w in left) == (w in right))
    elif isinstance(f, Knows):
        inner = extension(m, f.arg, _memo)
        out = frozenset().union(*(b for b in m.partitions[f.agent - 1] if b <= inner))
    else:
        raise TypeError(f"not a formula: {f!r}")
    _memo[f] = out
    return out


def _locate(model: KripkeStructure | PointedModel, world: str | None) -> tuple[KripkeStructure, str]:
    if isinstance(model, PointedModel):
        return model.structure, model.designated if world is None else world
    if world is None:
        raise ValueError("a world is required for a bare structure")
    return model, world


def check(model: KripkeStructure | PointedModel, f: Formula, world: str | None = None) -> bool:
    """Truth of ``f`` at ``world`` (default: the designated world)."""
    m, w = _locate(model, world)
    if w not in m.worlds:
        raise StructureError(f"unknown world {w!r}")
    return w in extension(m, f)


def check_global(m: KripkeStructure, f: Formula) -> bool:
    return extension(m, f) == frozenset(m.worlds)


def reachable(m: KripkeStructure, world: str) -> set[str]:
    """Worlds reachable in zero or more steps of any agent's relation."""
    seen = {world}
    queue = deque([world])
    while queue:
        u = queue.popleft()
        for i in range(1, m.agents + 1):
            for v in m.block(i, u):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
    return seen


def check_ck(model: KripkeStructure | PointedModel, f: Formula, world: str | None = None) -> bool:
    """Common knowledge of ``f`` at ``world``: ``f`` holds on the reachable component."""
    m, w = _locate(model, world)
    return reachable(m, w) <= extension(m, f)


def is_model(pm: PointedModel, s: Scenario) -> bool:
    m = pm.structure
    if s.agent_count != m.agents:
        raise SignatureError(f"scenario has {s.agent_count} agents, model has {m.agents}")
    for a in s.assumptions:
        if a.mode is Mode.PLAIN:
            if not check(pm, a.formula):
                return False
        elif not check_ck(pm, a.formula):
            return False
    return True


def restrict(m: KripkeStructure, announcement: Formula) -> KripkeStructure:
    """Public announcement: keep the worlds where ``announcement`` holds."""
    keep = extension(m, announcement)
    if not keep:
        raise EmptyAnnouncementError("no world satisfies the announcement")
    return submodel(m, keep)


def submodel(m: KripkeStructure, keep: Iterable[str]) -> KripkeStructure:
    """The structure induced on ``keep``; blocks are intersected, empty ones dropped."""
    keep = frozenset(keep)
    return KripkeStructure(
        m.agents,
        m.atoms,
        tuple(w for w in m.worlds if w in keep),
        tuple(tuple(b & keep for b in blocks if b & keep) for blocks in m.partitions),
        {w: m.valuation[w] for w in m.worlds if w in keep},
    )


# -- serialisation -----------------------------------------------------------


def to_json(m: KripkeStructure, designated: str | None = None) -> dict:
    order = {w: k for k, w in enumerate(m.worlds)}

    def sort_block(b: frozenset[str]) -> list[str]:
        return sorted(b, key=order.__getitem__)

    data = {
        "agents": m.agents,
        "atoms": list(m.atoms),
        "worlds": list(m.worlds),
        "valuation": {w: [a for a in m.atoms if a in m.valuation[w]] for w in m.worlds},
        "partitions": {
            str(i): sorted((sort_block(b) for b in blocks), key=lambda b: order[b[0]])
            for i, blocks in enumerate(m.partitions, start=1)
        },
    }
    if designated is not None:
        data["designated"] = designated
    return data


def from_json(data: dict) -> tuple[KripkeStructure, str | None]:
    try:
        agents = int(data["agents"])
        parts = data["partitions"]
        m = KripkeStructure.build(
            agents,
            [str(a) for a in data["atoms"]],
            [str(w) for w in data["worlds"]],
            {int(k): v for k, v in parts.items()},
            data["valuation"],
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise StructureError(f"malformed model JSON: {exc}") from exc
    designated = data.get("designated")
    if designated is not None and designated not in m.worlds:
        raise StructureError(f"designated world {designated!r} not in worlds")
    return m, designated


def load_model(path: str) -> tuple[KripkeStructure, str | None]:
    with open(path, encoding="utf-8") as fh:
        return from_json(json.load(fh))


def dump_model(path: str, m: KripkeStructure, designated: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json(m, designated), fh, indent=2)
        fh.write("\n")


def to_dot(m: KripkeStructure, designated: str | None = None) -> str:
    """Graphviz text; one undirected edge per related pair, labelled by agent."""
    lines = ["graph kripke {"]
    for w in m.worlds:
        label = w + "\\n" + (", ".join(a for a in m.atoms if a in m.valuation[w]) or "-")
        shape = "doublecircle" if w == designated else "circle"
        lines.append(f'  "{w}" [shape={shape}, label="{label}"];')
    order = {w: k for k, w in enumerate(m.worlds)}
    for i, blocks in enumerate(m.partitions, start=1):
        for b in sorted(blocks, key=lambda b: min(order[w] for w in b)):
            members = sorted(b, key=order.__getitem__)
            for x in range(len(members)):
                for y in range(x + 1, len(members)):
                    lines.append(f'  "{members[x]}" -- "{members[y]}" [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- exact models ------------------------------------------------------------

TRUE_BUT_UNDERIVABLE = "true-but-underivable"
DERIVABLE_BUT_FALSE = "derivable-but-false"


@dataclass
class ExactReport:
    """Disagreements between derivability and truth in a pointed model.

    No witnesses means the model is exact on the fragment. Witnesses of kind
    ``true-but-underivable`` are formulas the model settles although the
    scenario leaves them open (overspecification).
    """

    is_model: bool
    checked: int = 0
    witnesses: list[tuple[Formula, str]] = field(default_factory=list)
    truncated: bool = False

    @property
    def exact(self) -> bool:
        return not self.witnesses


def exact_check(s: Scenario, pm: PointedModel, frag, ck_depth: int, **limits) -> ExactReport:
    """Compare ``s |- F`` with ``pm |= F`` for every ``F`` in the fragment.

    The model-checking side uses only :func:`check`; the prover is consulted
    only for derivability.
    """
    from .formula import enumerate_fragment, expand_ck
    from .prover import Prover

    prover = Prover(s.agent_count, s.atoms, **limits)
    hyps = expand_ck(s, ck_depth)
    formulas = enumerate_fragment(frag)
    report = ExactReport(is_model(pm, s), truncated=formulas.truncated)
    for f in formulas:
        truth = check(pm, f)
        derivable = prover.derives(hyps, f, ck_depth, minimize=False).derivable
        report.checked += 1
        if truth and not derivable:
            report.witnesses.append((f, TRUE_BUT_UNDERIVABLE))
        elif derivable and not truth:
            report.witnesses.append((f, DERIVABLE_BUT_FALSE))
    return report
