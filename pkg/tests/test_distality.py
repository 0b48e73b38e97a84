import itertools
import random

import pytest

from arity_lab.distality import (DistalityInstance, applicable_theorem, build_nondistal_witness, nondistal_report,
                                 pinned_h2_instance, random_kaygraph_instance, soundness_sweep,
                                 strong_distality_check, verify_parity_identity)
from arity_lab.errors import InputError
from arity_lab.generators import KayGraphPair, gen_hypergraph, gen_kaygraph, parity_reduct
from arity_lab.structures import RelationSymbol, Structure, TableRelation, is_qf_indiscernible


@pytest.mark.parametrize("n,k", [(4, 2), (5, 2), (6, 2), (5, 3), (6, 3), (6, 4)])
def test_parity_identity_exhaustive(n, k):
    rep = verify_parity_identity(gen_kaygraph(n, k, seed=n * 10 + k), mode="exhaustive")
    assert rep["violations"] == 0 and rep["mode"] == "exhaustive"


def test_parity_identity_sampled_is_seeded():
    pair = gen_kaygraph(12, 3, seed=9)
    a = verify_parity_identity(pair, samples=2000, seed=1, mode="sampled")
    b = verify_parity_identity(pair, samples=2000, seed=1, mode="sampled")
    assert a == b and a["violations"] == 0 and a["checked"] == 2000


def test_parity_identity_needs_k_plus_two_vertices():
    # x, y and k parameters: k + 2 distinct vertices are enough
    verify_parity_identity(gen_kaygraph(4, 2, seed=0), mode="exhaustive")
    with pytest.raises(InputError):
        verify_parity_identity(gen_kaygraph(3, 2, seed=0))
    with pytest.raises(InputError):
        verify_parity_identity(gen_kaygraph(6, 2, seed=0), mode="sometimes")


def test_parity_identity_detects_a_non_parity_relation():
    base = gen_hypergraph(7, 2, seed=3)
    rng = random.Random(0)
    rows = [S for S in itertools.combinations(range(7), 3) if rng.random() < 0.5]
    fake = Structure(7, [TableRelation(RelationSymbol("R", 3), rows, closed=True)], meta={"family": "kaygraph"})
    rep = verify_parity_identity(KayGraphPair(base, fake, 2), mode="exhaustive")
    assert rep["violations"] > 0 and rep["examples"]


@pytest.mark.parametrize("k,len_each", [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2)])
def test_nondistal_witness(k, len_each):
    w = build_nondistal_witness(k, len_each)
    assert len(w.sequence) == (k + 1) * len_each + k
    rep = nondistal_report(w, max_m=len(w.sequence))
    assert rep["ok"]
    assert not rep["full"]["indiscernible"]
    assert all(d["indiscernible"] for d in rep["drop_one"])
    # the full sequence fails exactly on the (k+1)-subsets
    assert rep["full"]["counterexample"]["m"] == k + 1


def test_nondistal_witness_arguments():
    with pytest.raises(InputError):
        build_nondistal_witness(1, 3)
    with pytest.raises(InputError):
        build_nondistal_witness(3, 1)


def test_pinned_h2_instance():
    # H1 holds, H2 fails, conclusion fails; no finite argument applies
    inst = pinned_h2_instance()
    rep = strong_distality_check(inst, 3)
    assert rep["theorem"] is None
    assert rep["h1"] and not rep["h2"] and not rep["conclusion"]
    assert not rep["theorem_violation"]
    assert rep["counterexample"] == {"m": 2, "first": [0, 1], "second": [1, 2]}


def test_applicable_theorem_regimes():
    pair = gen_kaygraph(7, 2, seed=2)
    s = pair.reduct
    two = DistalityInstance(s, [0, 1], 2, [3, 4], [(5,), (6,)], 2)
    assert applicable_theorem(two, 3) == "kaygraph"
    three = DistalityInstance(s, [0], 1, [2, 3], [(4,), (5,), (6,)], 2)
    assert applicable_theorem(three, 3) == "k_ary"
    one = DistalityInstance(s, [0, 1], 2, [3, 4], [(5,)], 2)
    assert applicable_theorem(one, 3) is None
    no_j = DistalityInstance(s, [0, 1, 2], 3, [], [(5,), (6,)], 2)
    assert applicable_theorem(no_j, 3) is None


def test_strong_check_input_errors():
    s = gen_kaygraph(6, 2, seed=1).reduct
    with pytest.raises(InputError):
        strong_distality_check(DistalityInstance(s, [0], 1, [2], [(3,)], 2), 2)
    with pytest.raises(InputError):
        DistalityInstance(s, [0], (1, 2), [3], [(4,)], 2)


def test_hypotheses_force_conclusion_in_regime_by_direct_check():
    rng = random.Random(11)
    checked = 0
    for _ in range(300):
        inst = random_kaygraph_instance(rng, 2, params=2)
        rep = strong_distality_check(inst, 3)
        if rep["theorem"] and rep["h1"] and rep["h2"]:
            checked += 1
            full = is_qf_indiscernible(inst.structure, inst.sequence, inst.params(), max_m=len(inst.sequence))
            assert full.ok
    assert checked > 0


def test_soundness_sweep_small():
    rep = soundness_sweep(300, seed=4)
    assert rep["theorem_violations"] == 0
    assert rep["hypotheses_held"] > 0
    assert set(rep["by_theorem"]) <= {"k_ary", "kaygraph", "none"}
    assert soundness_sweep(300, seed=4) == rep


def test_random_instance_is_a_parity_reduct():
    inst = random_kaygraph_instance(random.Random(1), 3)
    R = inst.structure.relations["R"]
    assert R.arity == 4 and inst.structure.meta["family"] == "kaygraph"
    assert len(inst.b) == 3 and inst.I and inst.J
    assert parity_reduct(gen_hypergraph(5, 2, edges=[])).R.row_count() == 0
