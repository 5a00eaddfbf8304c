from __future__ import annotations

import itertools
import json

import pytest
from conftest import formulas, structures
from hypothesis import given
from hypothesis import strategies as st
from oracle import RelModel

from selkit.formula import (
    And, Atom, FragmentSpec, Knows, Not, Or, SignatureError, Top, expand_ck,
)
from selkit.kripke import (
    DERIVABLE_BUT_FALSE,
    TRUE_BUT_UNDERIVABLE,
    EmptyAnnouncementError,
    KripkeStructure,
    PointedModel,
    StructureError,
    check,
    check_ck,
    dump_model,
    exact_check,
    from_json,
    is_model,
    load_model,
    restrict,
    to_dot,
    to_json,
)
from selkit.prover import completeness_check
from selkit.scenarios import (
    coin_scenario,
    cube_model,
    knowing_about_others,
    muddy_children,
    nobody_knows_own_status,
    trio,
)

h, m = Atom("h"), Atom("m")
A, B = 1, 2


@pytest.fixture
def coin():
    return coin_scenario()


def test_coin_model_checks(coin):
    _, pm = coin
    m1 = pm.structure
    assert check(m1, Knows(A, h), "1")
    assert check(m1, Knows(A, Not(Knows(B, h))), "1")
    assert not check(m1, h, "2")
    assert not check(m1, Knows(B, h), "1")


def test_check_ck_examples(coin):
    _, pm = coin
    assert not check_ck(pm.structure, h, "1")
    one = KripkeStructure.build(2, ["m"], ["w"], {1: [["w"]], 2: [["w"]]}, {"w": ["m"]})
    assert check_ck(one, m, "w")
    q2 = cube_model(2)
    assert check_ck(q2, knowing_about_others(2), "11")


def test_is_model_examples(coin):
    s, pm = coin
    assert is_model(pm, s)
    assert not is_model(PointedModel(pm.structure, "2"), s)
    assert is_model(PointedModel(cube_model(2), "11"), muddy_children(2))


def test_signature_errors(coin):
    _, pm = coin
    with pytest.raises(SignatureError):
        check(pm, Knows(3, h))
    with pytest.raises(SignatureError):
        check(pm, Atom("zz"))


def test_validator_rejects_bad_partitions():
    with pytest.raises(StructureError):
        KripkeStructure.build(1, ["m"], ["a", "b"], {1: [["a", "b"], ["b"]]}, {"a": [], "b": []})
    with pytest.raises(StructureError):
        KripkeStructure.build(1, ["m"], ["a", "b"], {1: [["a"]]}, {"a": [], "b": []})
    with pytest.raises(StructureError):
        KripkeStructure.build(1, ["m"], ["a", "b"], {1: [["a"], ["b"]]}, {"a": ["zz"], "b": []})
    with pytest.raises(StructureError):
        KripkeStructure.build(1, ["m"], [], {1: []}, {})
    with pytest.raises(ValueError):
        PointedModel(cube_model(1), "nope")


def _as_relations(mdl: KripkeStructure) -> RelModel:
    rel = {i + 1: {(u, v) for blk in blocks for u in blk for v in blk}
           for i, blocks in enumerate(mdl.partitions)}
    return RelModel(list(mdl.worlds), rel, {w: set(mdl.valuation[w]) for w in mdl.worlds})


@given(formulas(max_leaves=10), structures())
def test_check_agrees_with_relation_semantics(f, mdl):
    oracle = _as_relations(mdl)
    for w in mdl.worlds:
        assert check(mdl, f, w) == oracle.holds(w, f)


@given(formulas(max_leaves=6), formulas(max_leaves=6), structures())
def test_check_respects_booleans(f, g, mdl):
    for w in mdl.worlds:
        assert check(mdl, Not(f), w) == (not check(mdl, f, w))
        assert check(mdl, And(f, g), w) == (check(mdl, f, w) and check(mdl, g, w))


def _prefix_formulas(f, agents, max_len):
    for j in range(max_len + 1):
        for seq in itertools.product(range(1, agents + 1), repeat=j):
            g = f
            for i in reversed(seq):
                g = Knows(i, g)
            yield g


@given(formulas(max_depth=1, max_leaves=5), structures())
def test_check_ck_matches_prefixes(f, mdl):
    for w in mdl.worlds:
        expected = all(check(mdl, g, w) for g in _prefix_formulas(f, 2, len(mdl.worlds)))
        assert check_ck(mdl, f, w) == expected


def test_restrict_examples():
    q2 = cube_model(2)
    m2 = restrict(q2, Or(Atom("m1"), Atom("m2")))
    assert sorted(m2.worlds) == ["01", "10", "11"]
    m3 = restrict(m2, nobody_knows_own_status(2))
    assert list(m3.worlds) == ["11"]
    assert check(m3, And(Knows(1, Atom("m1")), Knows(2, Atom("m2"))), "11")
    assert restrict(q2, Top()) == q2
    with pytest.raises(EmptyAnnouncementError):
        restrict(q2, And(Atom("m1"), Not(Atom("m1"))))


@given(formulas(max_depth=0, max_leaves=6), structures())
def test_restrict_boolean_properties(phi, mdl):
    survivors = {w for w in mdl.worlds if check(mdl, phi, w)}
    if not survivors:
        with pytest.raises(EmptyAnnouncementError):
            restrict(mdl, phi)
        return
    r = restrict(mdl, phi)
    r.validate()
    assert set(r.worlds) == survivors
    assert restrict(r, phi) == r


@given(formulas(max_leaves=6), structures())
def test_restrict_world_set_is_truth_set(phi, mdl):
    survivors = {w for w in mdl.worlds if check(mdl, phi, w)}
    if survivors:
        r = restrict(mdl, phi)
        r.validate()
        assert set(r.worlds) == survivors


@given(structures(), st.booleans())
def test_json_round_trip(mdl, with_designated):
    designated = mdl.worlds[0] if with_designated else None
    data = json.loads(json.dumps(to_json(mdl, designated)))
    assert set(data) >= {"agents", "atoms", "worlds", "valuation", "partitions"}
    assert all(isinstance(k, str) for k in data["partitions"])
    back, d = from_json(data)
    assert back == mdl and d == designated


def test_dump_and_load(tmp_path, coin):
    _, pm = coin
    path = tmp_path / "m1.json"
    dump_model(str(path), pm.structure, "1")
    back, d = load_model(str(path))
    assert back == pm.structure and d == "1"


def test_from_json_rejects_non_partition():
    data = {"agents": 1, "atoms": ["m"], "worlds": ["a", "b"], "valuation": {"a": [], "b": []},
            "partitions": {"1": [["a", "b"], ["a"]]}}
    with pytest.raises(StructureError):
        from_json(data)


def test_dot_export(coin):
    _, pm = coin
    dot = to_dot(pm.structure, "1")
    assert "doublecircle" in dot
    assert 'label="2"' in dot
    assert dot.count("doublecircle") == 1


# exact models ----------------------------------------------------------------


def test_exact_single_world_common_knowledge():
    _, _, g3 = trio()
    one = KripkeStructure.build(2, ["m"], ["w"], {1: [["w"]], 2: [["w"]]}, {"w": ["m"]})
    rep = exact_check(g3, PointedModel(one, "w"), FragmentSpec(("m",), 2, 2), 4)
    assert rep.is_model and rep.exact and rep.checked > 0


def test_exact_detects_overspecification(coin):
    s, pm = coin
    rep = exact_check(s, pm, FragmentSpec(("h",), 2, 2), 0)
    kinds = dict(rep.witnesses)
    assert kinds[Knows(A, Not(Knows(B, h)))] == TRUE_BUT_UNDERIVABLE
    assert DERIVABLE_BUT_FALSE not in kinds.values()


def test_exact_reports_derivable_but_false(coin):
    s, pm = coin
    wrong = PointedModel(pm.structure, "2")
    rep = exact_check(s, wrong, FragmentSpec(("h",), 2, 0), 0)
    assert not rep.is_model
    assert (h, DERIVABLE_BUT_FALSE) in rep.witnesses


def test_exact_implies_complete():
    # a model exact on a fragment forces the scenario to settle every fragment formula
    _, _, g3 = trio()
    one = KripkeStructure.build(2, ["m"], ["w"], {1: [["w"]], 2: [["w"]]}, {"w": ["m"]})
    frag = FragmentSpec(("m",), 2, 2)
    assert exact_check(g3, PointedModel(one, "w"), frag, 4).exact
    assert completeness_check(g3, frag, 4).complete

    from selkit.scenarios import muddy_instance
    s = muddy_instance((1, 0))
    frag = FragmentSpec(("m1", "m2"), 2, 1)
    assert exact_check(s, PointedModel(cube_model(2), "10"), frag, 3).exact
    assert completeness_check(s, frag, 3).complete


def test_model_of_expansion_hyps_checks_true():
    s = muddy_children(2)
    q2 = cube_model(2)
    for w in q2.worlds:
        assert all(check(q2, f, w) for f in expand_ck(s, 3))
