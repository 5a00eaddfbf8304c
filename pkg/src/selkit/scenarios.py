"""Generators for the worked scenarios: muddy children, coin, centipede, trio."""

from __future__ import annotations

import itertools
from typing import Sequence

from .formula import (
    And,
    Assumption,
    Atom,
    Formula,
    Implies,
    Knows,
    Mode,
    Not,
    Or,
    Scenario,
    conj,
    disj,
)
from .kripke import KripkeStructure, PointedModel

MAX_AGENTS = 4

ALICE, BOB = 1, 2


def _check_n(n: int, low: int, max_n: int) -> None:
    if n < low:
        raise ValueError(f"n must be at least {low}")
    if n > max_n:
        raise ValueError(f"n={n} exceeds the configured bound {max_n}")


def muddy(i: int) -> Atom:
    return Atom(f"m{i}")


def knows_whether(i: int, f: Formula) -> Formula:
    return Or(Knows(i, f), Knows(i, Not(f)))


def knowing_about_others(n: int) -> Formula:
    return conj(knows_whether(i, muddy(j))
                for i in range(1, n + 1) for j in range(1, n + 1) if i != j)


def not_knowing_about_themselves(n: int) -> Formula:
    return conj(And(Not(Knows(i, muddy(i))), Not(Knows(i, Not(muddy(i)))))
                for i in range(1, n + 1))


def everyone_knows_own_status(n: int) -> Formula:
    return conj(knows_whether(i, muddy(i)) for i in range(1, n + 1))


def nobody_knows_own_status(n: int) -> Formula:
    return conj(Not(knows_whether(i, muddy(i))) for i in range(1, n + 1))


def some_muddy(n: int) -> Formula:
    return disj(muddy(i) for i in range(1, n + 1))


def exactly(n: int, k: int) -> Formula:
    """Exactly ``k`` of ``m1..mn`` hold."""
    terms = []
    for chosen in itertools.combinations(range(1, n + 1), k):
        terms.append(conj(muddy(i) if i in chosen else Not(muddy(i)) for i in range(1, n + 1)))
    return disj(terms)


def muddy_atoms(n: int) -> tuple[str, ...]:
    return tuple(f"m{i}" for i in range(1, n + 1))


def muddy_children(n: int, *, max_n: int = MAX_AGENTS) -> Scenario:
    """The initial configuration: both conditions are common knowledge."""
    _check_n(n, 2, max_n)
    return Scenario(n, muddy_atoms(n), (
        Assumption(knowing_about_others(n), Mode.COMMON),
        Assumption(not_knowing_about_themselves(n), Mode.COMMON),
    ))


def world_formula(bits: Sequence[int]) -> Formula:
    """The conjunction of literals pinning down the world ``bits``."""
    if not bits or any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be a non-empty 0/1 vector")
    return conj(muddy(i) if b else Not(muddy(i)) for i, b in enumerate(bits, start=1))


def world_name(bits: Sequence[int]) -> str:
    return "".join(str(b) for b in bits)


def muddy_instance(bits: Sequence[int], *, max_n: int = MAX_AGENTS) -> Scenario:
    """The standard scenario plus the plain world formula of ``bits``."""
    return muddy_children(len(bits), max_n=max_n).with_assumptions(Assumption(world_formula(bits)))


def cube_model(n: int, *, max_n: int = MAX_AGENTS) -> KripkeStructure:
    """All 0/1 vectors; agent i cannot tell apart vectors differing at i only."""
    _check_n(n, 1, max_n)
    vectors = list(itertools.product((0, 1), repeat=n))
    names = [world_name(v) for v in vectors]
    partitions = []
    for i in range(n):
        blocks = {}
        for v in vectors:
            key = v[:i] + v[i + 1:]
            blocks.setdefault(key, []).append(world_name(v))
        partitions.append(tuple(frozenset(b) for b in blocks.values()))
    valuation = {world_name(v): {f"m{i + 1}" for i in range(n) if v[i]} for v in vectors}
    return KripkeStructure(n, muddy_atoms(n), tuple(names), tuple(partitions), valuation)


def muddy_explicit(n: int, k: int, *, announced: bool = True, max_n: int = MAX_AGENTS) -> Scenario:
    """Children see each other; with ``announced``, "exactly k are muddy" is common knowledge.

    There is deliberately no assumption about children not knowing their own
    status.
    """
    _check_n(n, 2, max_n)
    if not 0 < k <= n:
        raise ValueError("need 0 < k <= n")
    assumptions = [Assumption(knowing_about_others(n), Mode.COMMON)]
    if announced:
        assumptions.append(Assumption(exactly(n, k), Mode.COMMON))
    return Scenario(n, muddy_atoms(n), tuple(assumptions))


def coin_scenario() -> tuple[Scenario, PointedModel]:
    """Coin showing h; agent 1 (Alice) has looked at it, agent 2 (Bob) has not.

    Returned with the two-world model where only Alice tells the worlds
    apart and the real world is ``1``.
    """
    h = Atom("h")
    s = Scenario(2, ("h",), (
        Assumption(h),
        Assumption(Knows(ALICE, h)),
        Assumption(Not(Knows(BOB, h))),
        Assumption(Not(Knows(BOB, Not(h)))),
    ))
    m = KripkeStructure.build(2, ["h"], ["1", "2"],
                              {ALICE: [["1"], ["2"]], BOB: [["1", "2"]]},
                              {"1": ["h"], "2": []})
    return s, PointedModel(m, "1")


def centipede_lite() -> Scenario:
    """Backward induction for risk-averse players, with no cross-knowledge.

    ``di`` reads "down is played at node i"; nodes 1 and 3 belong to Alice,
    node 2 to Bob. A player who cannot rule out "down" at the next node
    plays down.
    """
    d1, d2, d3 = Atom("d1"), Atom("d2"), Atom("d3")
    return Scenario(2, ("d1", "d2", "d3"), (
        Assumption(d3),
        Assumption(Implies(Not(Knows(BOB, Not(d3))), d2)),
        Assumption(Implies(Not(Knows(ALICE, Not(d2))), d1)),
    ))


def trio() -> tuple[Scenario, Scenario, Scenario]:
    """``{m}``, ``{K1 m & K2 m}`` and common knowledge of ``m`` over two agents."""
    m = Atom("m")
    return (
        Scenario(2, ("m",), (Assumption(m),)),
        Scenario(2, ("m",), (Assumption(And(Knows(1, m), Knows(2, m))),)),
        Scenario(2, ("m",), (Assumption(m, Mode.COMMON),)),
    )
