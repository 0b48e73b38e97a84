import itertools

import pytest

from arity_lab.arity import (JOHNSON_TRIPLES, Witness, arity_witness_search, build_set_systems, canned_witness,
                             make_witness, naive_witness_exists, set_system_levels, verify_set_systems,
                             verify_witness)
from arity_lab.errors import InputError, StaleWitnessError
from arity_lab.generators import JohnsonStructure, gen_kaygraph
from arity_lab.structures import RelationSymbol, Structure, TableRelation, up_to_k


def test_johnson_triples_witness():
    J = JohnsonStructure(4, 2)
    t1, t2 = (J.elements(x) for x in JOHNSON_TRIPLES)
    w = make_witness(J, t1, t2)
    rep = verify_witness(J, w)
    assert rep["passed"] and rep["profiles_equal"] and rep["types_differ"]
    assert rep["recorded_digests_match"]
    assert any("E_3_0" in a for a in rep["full_type_difference"]["only_first"])
    assert any("E_3_1" in a for a in rep["full_type_difference"]["only_second"])


def test_witness_json_round_trip_and_staleness():
    J = JohnsonStructure(4, 2)
    w = make_witness(J, *(J.elements(x) for x in JOHNSON_TRIPLES))
    back = Witness.from_json(w.to_json())
    assert verify_witness(J, back)["passed"]
    with pytest.raises(StaleWitnessError):
        verify_witness(JohnsonStructure(5, 2), back)


def test_non_witness_fails_verification():
    J = JohnsonStructure(5, 2)
    t = J.elements([(0, 1), (0, 2), (1, 2)])
    rep = verify_witness(J, make_witness(J, t, t))
    assert not rep["passed"] and rep["profiles_equal"] and not rep["types_differ"]


def test_search_statuses():
    J2 = JohnsonStructure(4, 2)
    res = arity_witness_search(J2, 3, "drop-one")
    assert res.status == "witness"
    assert verify_witness(J2, res.witness)["passed"]
    assert arity_witness_search(J2, 3, "drop-one", budget=1).status == "budget_exhausted"
    with pytest.raises(InputError):
        arity_witness_search(J2, 1)
    with pytest.raises(InputError):
        arity_witness_search(J2, 3, budget=0)
    with pytest.raises(InputError):
        arity_witness_search(J2, 3, symmetry="mirror")


def test_symmetry_reduction_agrees_with_full_enumeration():
    for n, k, l in [(5, 2, 3), (6, 3, 3), (5, 2, 4)]:
        J = JohnsonStructure(n, k)
        a = arity_witness_search(J, l, symmetry="ground").status
        b = arity_witness_search(J, l, symmetry="none").status
        assert a == b, (n, k, l)


def test_search_matches_naive_oracle():
    line = Structure(4, [TableRelation(RelationSymbol("E", 2), [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)])])
    cases = [(JohnsonStructure(4, 2), 3), (gen_kaygraph(5, 2, seed=1).reduct, 3), (line, 3)]
    for s, l in cases:
        found = arity_witness_search(s, l, symmetry="none").status == "witness"
        assert found == naive_witness_exists(s, l)


def test_binary_structures_have_no_drop_one_witness_at_length_three():
    line = Structure(4, [TableRelation(RelationSymbol("E", 2), [(0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2)])])
    assert arity_witness_search(line, 3, symmetry="none").status == "exhausted_no_witness"


def test_up_to_k_mode():
    J = JohnsonStructure(4, 2)
    assert arity_witness_search(J, 3, up_to_k(2)).status == "witness"
    with pytest.raises(InputError):
        arity_witness_search(J, 3, up_to_k(4))


def test_johnson3_has_no_witness_of_length_four():
    res = arity_witness_search(JohnsonStructure(9, 3), 4, "drop-one", symmetry="ground")
    assert res.status == "exhausted_no_witness"
    assert res.examined == 830


# --- set systems -----------------------------------------------------------------


def uniform(system, j):
    sizes = {len(frozenset.intersection(*(system[i] for i in I)))
             for I in itertools.combinations(range(len(system)), j)}
    return sizes.pop() if len(sizes) == 1 else None


def test_set_systems_small_levels_pinned():
    p3 = build_set_systems(3)
    assert [sorted(x) for x in p3.X] == [[0, 4], [0, 5], [0, 6]]
    assert [sorted(y) for y in p3.Y] == [[1, 2], [1, 3], [2, 3]]
    assert [build_set_systems(l).k for l in (1, 2, 3, 4, 5)] == [None, 1, 2, 7, 56]


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_set_systems_invariants_by_direct_computation(l):
    p = build_set_systems(l)
    X, Y = list(p.X), list(p.Y)
    assert len(frozenset.intersection(*X)) == 1
    assert len(frozenset.intersection(*Y)) == 0
    for j in range(1, l):
        assert uniform(X, j) is not None and uniform(X, j) == uniform(Y, j)


@pytest.mark.parametrize("l", [2, 3, 4])
def test_set_systems_every_level_verifies(l):
    for pair in set_system_levels(l):
        assert verify_set_systems(pair, embed=False)["passed"], pair.level
    final = verify_set_systems(build_set_systems(l))
    assert final["passed"] and final["witness"]["passed"]


def test_set_systems_reject_bad_l():
    with pytest.raises(InputError):
        build_set_systems(0)


def test_tampered_set_system_is_caught():
    p = build_set_systems(3)
    p.X = (p.X[0] | {99},) + p.X[1:]
    assert not verify_set_systems(p, embed=False)["passed"]


# --- canned witnesses ----------------------------------------------------------


@pytest.mark.parametrize("family,param", [("johnson2", None), ("cherlin_lachlan", 2), ("cherlin_lachlan", 3),
                                          ("kaygraph", 2), ("kaygraph", 3), ("kaygraph", 4), ("goode", 1),
                                          ("goode", 2)])
def test_canned_witnesses_verify(family, param):
    s, w, notes = canned_witness(family, param)
    assert verify_witness(s, w)["passed"]
    if family == "goode":
        assert notes["agreement_ok"]


def test_canned_unknown_family():
    with pytest.raises(InputError):
        canned_witness("nope")
