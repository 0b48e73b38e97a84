import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arity_lab.errors import InputError
from arity_lab.structures import (DROP_ONE, Mode, PredicateRelation, RelationSymbol, Structure, TableRelation,
                                  find_partial_iso, is_qf_indiscernible, qf_type, subtype_profile, up_to_k)


def diagram(s, t):
    """Oracle: one bit per equality and per relation atom R(t o f), f: [r] -> [l]."""
    l = len(t)
    eq = tuple(t[i] == t[j] for i in range(l) for j in range(l))
    atoms = []
    for name in sorted(s.relations):
        rel = s.relations[name]
        for f in itertools.product(range(l), repeat=rel.arity):
            atoms.append(rel.holds(tuple(t[i] for i in f)))
    return eq, tuple(atoms)


def path_graph(n):
    rows = [(i, i + 1) for i in range(n - 1)] + [(i + 1, i) for i in range(n - 1)]
    return Structure(n, [TableRelation(RelationSymbol("E", 2), rows)])


@st.composite
def small_structures(draw):
    n = draw(st.integers(2, 5))
    rels = []
    for idx, arity in enumerate(draw(st.lists(st.integers(1, 3), min_size=1, max_size=3))):
        space = list(itertools.product(range(n), repeat=arity))
        rows = draw(st.lists(st.sampled_from(space), max_size=12, unique=True))
        rels.append(TableRelation(RelationSymbol(f"R{idx}", arity), rows))
    return Structure(n, rels)


@settings(max_examples=60, deadline=None)
@given(small_structures(), st.data())
def test_qf_type_matches_atomic_diagram(s, data):
    l = data.draw(st.integers(1, 3))
    t1 = data.draw(st.tuples(*[st.integers(0, s.universe - 1)] * l))
    t2 = data.draw(st.tuples(*[st.integers(0, s.universe - 1)] * l))
    same = qf_type(s, t1).digest == qf_type(s, t2).digest
    assert same == (diagram(s, t1) == diagram(s, t2))


@settings(max_examples=40, deadline=None)
@given(small_structures(), st.data())
def test_qf_type_invariant_under_automorphic_relabelling(s, data):
    perm = data.draw(st.permutations(range(s.universe)))
    moved = Structure(s.universe, [TableRelation(r.symbol, [tuple(perm[x] for x in row) for row in r.iter_rows(s.universe)])
                                   for r in s.relations.values()])
    t = data.draw(st.tuples(st.integers(0, s.universe - 1), st.integers(0, s.universe - 1)))
    assert qf_type(s, t).digest == qf_type(moved, tuple(perm[x] for x in t)).digest


def test_symmetric_table_stored_once():
    r = TableRelation(RelationSymbol("S", 2), [(0, 1), (1, 0)], closed=True)
    assert r.holds((1, 0)) and r.holds((0, 1))
    assert len(r.stored) == 1 and r.row_count() == 2


def test_equality_pattern_and_listing():
    s = path_graph(4)
    q = qf_type(s, (0, 1, 0))
    assert q.equality_pattern == ((0, 2), (1,))
    assert any("E" in a for a in q.listing())
    assert qf_type(s, (0, 1)) != qf_type(s, (0, 2))
    assert qf_type(s, (1, 2)).digest == qf_type(s, (2, 1)).digest


def test_profile_modes():
    s = path_graph(5)
    assert Mode.parse("drop-one") == DROP_ONE
    assert Mode.parse("up-to-2") == up_to_k(2)
    with pytest.raises(InputError):
        Mode.parse("sideways")
    p = subtype_profile(s, (0, 1, 2), DROP_ONE)
    assert [I for I, _ in p.entries] == [(0, 1), (0, 2), (1, 2)]
    p2 = subtype_profile(s, (0, 1, 2), up_to_k(1))
    assert [I for I, _ in p2.entries] == [(), (0,), (1,), (2,)]
    with pytest.raises(InputError):
        subtype_profile(s, (0, 1), up_to_k(3))


def test_tuple_validation():
    s = path_graph(3)
    with pytest.raises(InputError):
        qf_type(s, (0, 3))
    with pytest.raises(InputError):
        Structure(2, [TableRelation(RelationSymbol("E", 2), [(0, 5)])])
    with pytest.raises(InputError):
        RelationSymbol("R", 0)


def test_sorts_are_enforced():
    sym = RelationSymbol("P", 2, ("a", "b"))
    with pytest.raises(InputError):
        Structure(2, [TableRelation(sym, [(1, 0)])], sort_of=["a", "b"])
    Structure(2, [TableRelation(sym, [(0, 1)])], sort_of=["a", "b"])


def test_json_round_trip(tmp_path):
    s = Structure(4, [TableRelation(RelationSymbol("E", 2), [(2, 3), (0, 1)]),
                      TableRelation(RelationSymbol("U", 1), [(3,)])])
    data = s.to_json()
    assert data["relations"]["E"] == [[0, 1], [2, 3]]
    assert [e["name"] for e in data["signature"]] == ["E", "U"]
    path = tmp_path / "s.json"
    s.dump(path)
    back = Structure.load(path)
    assert back.digest == s.digest
    assert json.loads(path.read_text()) == data


def test_load_errors(tmp_path):
    with pytest.raises(InputError, match="not found"):
        Structure.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(InputError):
        Structure.load(bad)
    bad.write_text(json.dumps({"universe": 2}))
    with pytest.raises(InputError):
        Structure.load(bad)


def test_predicate_relation_agrees_with_table():
    pred = PredicateRelation(RelationSymbol("Lt", 2), lambda r: r[0] < r[1], describe=["lt"])
    table = TableRelation(RelationSymbol("Lt", 2), [(a, b) for a in range(4) for b in range(4) if a < b])
    s1, s2 = Structure(4, [pred], validate=False), Structure(4, [table])
    for t in itertools.product(range(4), repeat=3):
        assert diagram(s1, t) == diagram(s2, t)
        assert (qf_type(s1, t).digest == qf_type(s1, (0, 1, 2)).digest) == (
            qf_type(s2, t).digest == qf_type(s2, (0, 1, 2)).digest)


def indiscernible_oracle(s, seq, over=()):
    seq = [x if isinstance(x, tuple) else (x,) for x in seq]
    for m in range(1, len(seq) + 1):
        diags = {diagram(s, tuple(v for i in idx for v in seq[i]) + tuple(over))
                 for idx in itertools.combinations(range(len(seq)), m)}
        if len(diags) > 1:
            return False
    return True


def test_indiscernibility_on_orders():
    lt = TableRelation(RelationSymbol("Lt", 2), [(a, b) for a in range(6) for b in range(6) if a < b])
    s = Structure(6, [lt])
    assert is_qf_indiscernible(s, [0, 2, 3, 5]).ok
    res = is_qf_indiscernible(s, [0, 2, 1])
    assert not res.ok
    assert res.counterexample == (2, (0, 1), (1, 2))


@settings(max_examples=60, deadline=None)
@given(small_structures(), st.data())
def test_indiscernibility_matches_oracle(s, data):
    seq = data.draw(st.lists(st.integers(0, s.universe - 1), min_size=2, max_size=4))
    over = data.draw(st.lists(st.integers(0, s.universe - 1), max_size=1))
    assert is_qf_indiscernible(s, seq, over, max_m=len(seq)).ok == indiscernible_oracle(s, seq, over)
    # the default cut-off never changes the verdict
    assert is_qf_indiscernible(s, seq, over).ok == indiscernible_oracle(s, seq, over)


def test_indiscernibility_rejects_short_or_ragged():
    s = path_graph(3)
    with pytest.raises(InputError):
        is_qf_indiscernible(s, [0])
    with pytest.raises(InputError):
        is_qf_indiscernible(s, [(0, 1), (2,)])


def test_partial_iso_on_path():
    s = path_graph(7)
    m = find_partial_iso(s, (2,), (4,), 1)
    assert m is not None and m[2] == 4 and sorted(m.values()) == [3, 4, 5]
    assert find_partial_iso(s, (0,), (3,), 1) is None
    full = find_partial_iso(s, (0,), (6,), 6)
    assert full == {i: 6 - i for i in range(7)}
