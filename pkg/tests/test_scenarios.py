from __future__ import annotations

import itertools

import pytest

from selkit.formula import (
    And, Atom, FragmentSpec, Knows, Mode, Not, Or, Shape, expand_ck, size,
)
from selkit.kripke import check, check_ck, is_model, restrict
from selkit.prover import Pass, completeness_check, derives_scenario, necessitation_check
from selkit.scenarios import (
    ALICE,
    BOB,
    centipede_lite,
    coin_scenario,
    cube_model,
    everyone_knows_own_status,
    exactly,
    muddy,
    muddy_children,
    muddy_explicit,
    muddy_instance,
    nobody_knows_own_status,
    some_muddy,
    trio,
    world_formula,
    world_name,
)

m1, m2 = muddy(1), muddy(2)
h = Atom("h")


def test_muddy_children_shape():
    s = muddy_children(2)
    assert s.atoms == ("m1", "m2")
    assert [a.mode for a in s.assumptions] == [Mode.COMMON, Mode.COMMON]
    assert len(expand_ck(s, 1)) == 6
    with pytest.raises(ValueError):
        muddy_children(1)
    with pytest.raises(ValueError):
        muddy_children(5)


def test_assumption_sizes_quadratic():
    sizes = [size(muddy_children(n).assumptions[0].formula) for n in (2, 3, 4)]
    # n(n-1) knows-whether blocks of equal size, joined by n(n-1)-1 ands
    per = [n * (n - 1) for n in (2, 3, 4)]
    assert all((s + 1) % p == 0 for s, p in zip(sizes, per))
    assert len({(s + 1) // p for s, p in zip(sizes, per)}) == 1


def test_world_formula_examples():
    assert world_formula((1, 0)) == And(m1, Not(m2))
    assert world_formula((1, 1)) == And(m1, m2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_world_formula_pins_world(n):
    q = cube_model(n)
    vectors = list(itertools.product((0, 1), repeat=n))
    for u in vectors:
        for v in vectors:
            assert check(q, world_formula(u), world_name(v)) == (u == v)


def test_cube_model_shape():
    q2 = cube_model(2)
    assert len(q2.worlds) == 4
    assert set(q2.partitions[0]) == {frozenset({"00", "10"}), frozenset({"01", "11"})}
    assert set(q2.partitions[1]) == {frozenset({"00", "01"}), frozenset({"10", "11"})}
    q1 = cube_model(1)
    assert q1.partitions == ((frozenset({"0", "1"}),),)
    s = muddy_children(2)
    for w in q2.worlds:
        assert all(check_ck(q2, a.formula, w) for a in s.assumptions)


@pytest.mark.parametrize("n", [2, 3])
def test_muddy_children_necessitation(n):
    assert isinstance(necessitation_check(muddy_children(n), 1), Pass)


def test_cube_is_model_of_every_instance():
    for n in (2, 3):
        q = cube_model(n)
        for u in itertools.product((0, 1), repeat=n):
            assert is_model(_pointed(q, u), muddy_instance(u))


def _pointed(q, u):
    from selkit.kripke import PointedModel
    return PointedModel(q, world_name(u))


def test_announcement_chain():
    q2 = cube_model(2)
    step1 = restrict(q2, some_muddy(2))
    step2 = restrict(step1, nobody_knows_own_status(2))
    assert [len(x.worlds) for x in (q2, step1, step2)] == [4, 3, 1]
    assert step2.worlds == ("11",)
    assert check(step2, Knows(1, m1), "11") and check(step2, Knows(2, m2), "11")


def test_muddy_explicit():
    assert derives_scenario(muddy_explicit(2, 2), Knows(1, m1), 1).derivable
    assert derives_scenario(muddy_explicit(3, 2), everyone_knows_own_status(3), 1).derivable
    open_ = muddy_explicit(2, 2, announced=False)
    assert not derives_scenario(open_, Knows(1, m1), 3).derivable
    assert not derives_scenario(open_, Not(Knows(1, m1)), 3).derivable
    rep = completeness_check(open_, FragmentSpec(("m1", "m2"), 2, 1, Shape.LITERALS), 2)
    assert not rep.complete
    with pytest.raises(ValueError):
        muddy_explicit(2, 0)
    with pytest.raises(ValueError):
        muddy_explicit(2, 3)


def test_exactly_counts():
    q = cube_model(3)
    for w in q.worlds:
        for k in range(4):
            assert check(q, exactly(3, k), w) == (w.count("1") == k)


def test_coin():
    s, pm = coin_scenario()
    assert is_model(pm, s)
    assert not derives_scenario(s, Knows(ALICE, Not(Knows(BOB, h))), 0).derivable
    assert not derives_scenario(s, Knows(BOB, Or(Knows(ALICE, h), Knows(ALICE, Not(h)))), 0).derivable
    assert check(pm, Knows(BOB, Or(Knows(ALICE, h), Knows(ALICE, Not(h)))))


def test_centipede():
    s = centipede_lite()
    d1, d2, d3 = Atom("d1"), Atom("d2"), Atom("d3")
    assert derives_scenario(s, And(d1, And(d2, d3)), 0).derivable
    assert not derives_scenario(s, Knows(BOB, d3), 0).derivable
    assert not derives_scenario(s, Not(Knows(BOB, d3)), 0).derivable
    rep = completeness_check(s, FragmentSpec(("d3",), 2, 1), 0)
    assert not rep.complete


def test_trio():
    g1, g2, g3 = trio()
    assert g1.assumptions[0].mode is Mode.PLAIN
    assert g2.assumptions[0].formula == And(Knows(1, Atom("m")), Knows(2, Atom("m")))
    assert g3.assumptions[0].mode is Mode.COMMON
