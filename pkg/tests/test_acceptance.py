"""The ten acceptance criteria, each at its stated scale and time limit.

Each test prints one PASS/FAIL line; the terminal summary repeats them.
"""
import json
import os
import random
import subprocess
import sys
import time
from contextlib import contextmanager

import pytest

from arity_lab.arity import (JOHNSON_TRIPLES, arity_witness_search, build_set_systems, canned_witness,
                             set_system_levels, verify_set_systems, verify_witness)
from arity_lab.distality import build_nondistal_witness, nondistal_report, soundness_sweep, verify_parity_identity
from arity_lab.generators import CLStructure, JohnsonStructure, gen_kaygraph, orbit_equal
from arity_lab.generators.cherlin_lachlan import compare_with_bruteforce, cycle_witness, normalize, orbit_code_of
from arity_lab.generators.johnson import intersection_sizes
from arity_lab.johnson_homogeneity import (adversarial_instances, extend_to_injection, induction_failure,
                                           random_instance)
from arity_lab.pseudoplane import build_fragment, build_goode_witness, check_drop_one_agreement, eval_phi


@contextmanager
def within(label, seconds):
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        ok = ok and (seconds is None or elapsed < seconds)
        limit = "no limit" if seconds is None else f"limit {seconds:g}s"
        print(f"{'PASS' if ok else 'FAIL'} {label} in {elapsed:.2f}s ({limit})")
    if seconds is not None:
        assert elapsed < seconds, f"{label} took {elapsed:.1f}s, limit {seconds}s"


@pytest.mark.criterion("C1 Johnson triples witness")
def test_c1_johnson_triples():
    with within("C1 Johnson triples witness", 1):
        sizes = [intersection_sizes([frozenset(x) for x in t], 3) for t in JOHNSON_TRIPLES]
        for sz in sizes:
            assert [sz[I] for I in [(0, 1), (0, 2), (1, 2)]] == [1, 1, 1]
        assert [sz[(0, 1, 2)] for sz in sizes] == [0, 1]
        s, w, _ = canned_witness("johnson2")
        assert verify_witness(s, w)["passed"]


@pytest.mark.criterion("C2 J(3) over [9] exhausted, J(2) over [4] witness")
def test_c2_johnson_arity_three():
    with within("C2 J(3) over [9] exhausted, J(2) over [4] witness", 300):
        r3 = arity_witness_search(JohnsonStructure(9, 3), 4, "drop-one", symmetry="ground")
        assert r3.status == "exhausted_no_witness"
        r2 = arity_witness_search(JohnsonStructure(4, 2), 3, "drop-one", symmetry="ground")
        assert r2.status == "witness"


@pytest.mark.criterion("C3 set systems l=2,3,4")
def test_c3_set_systems():
    with within("C3 set systems l=2,3,4", 1):
        for l in (2, 3, 4):
            for pair in set_system_levels(l):
                assert verify_set_systems(pair, embed=False)["passed"]
            final = verify_set_systems(build_set_systems(l))
            assert final["passed"]
            assert final["full_intersections"] == [1, 0]
            assert final["witness"]["passed"] and final["witness"]["k"] == build_set_systems(l).k


@pytest.mark.criterion("C4 kay-graph parity identity")
def test_c4_parity_identity():
    with within("C4 kay-graph parity identity", 30):
        for n in (4, 5, 6):
            for seed in range(5):
                rep = verify_parity_identity(gen_kaygraph(n, 2, seed=seed), mode="exhaustive")
                assert rep["violations"] == 0
        rep = verify_parity_identity(gen_kaygraph(12, 3, seed=0), samples=100_000, seed=0, mode="sampled")
        assert rep["checked"] == 100_000 and rep["violations"] == 0


@pytest.mark.criterion("C5 non-(k-1)-distality witnesses k=2,3,4")
def test_c5_nondistal_witness():
    with within("C5 non-(k-1)-distality witnesses k=2,3,4", 30):
        for k, len_each in ((2, 3), (3, 3), (4, 2)):
            w = build_nondistal_witness(k, len_each)
            rep = nondistal_report(w, max_m=len(w.sequence))
            assert not rep["full"]["indiscernible"]
            assert all(d["indiscernible"] for d in rep["drop_one"])
            assert all(d["checked_up_to"] == len(w.sequence) - 1 for d in rep["drop_one"])


@pytest.mark.criterion("C6 strong distality soundness, 10^4 instances")
def test_c6_strong_distality_sweep():
    with within("C6 strong distality soundness, 10^4 instances", 120):
        rep = soundness_sweep(10_000, seed=0)
        assert rep["instances"] == 10_000
        assert rep["theorem_violations"] == 0


@pytest.mark.criterion("C7 Johnson homogeneity extension")
def test_c7_johnson_extension():
    with within("C7 Johnson homogeneity extension", 60):
        rng = random.Random(0)
        for _ in range(100):
            c, _pi = random_instance(20, 3, rng.randint(2, 10), rng)
            sigma, _ = extend_to_injection(c)
            assert len(set(sigma.values())) == len(sigma)
            assert induction_failure(c, sigma) is None
        adv = adversarial_instances(12, n=10, k=3, seed=0)
        assert len(adv) >= 10
        for c in adv:
            sigma, _ = extend_to_injection(c)
            assert induction_failure(c, sigma) is None


@pytest.mark.criterion("C8 Goode witnesses n=1,2")
def test_c8_goode():
    with within("C8 Goode witnesses n=1,2", 10):
        for n, depths, radius in ((1, 2, 1), (2, [2, 3], 2)):
            f = build_fragment(n + 1, 2, depths)
            w = build_goode_witness(n, f)
            assert eval_phi(n + 1, f, w.b) is True
            assert eval_phi(n + 1, f, w.b_prime) is False
            rep = check_drop_one_agreement(w, f, radius)
            assert rep.ok and rep.max_radius >= radius
            assert len(rep.per_drop) == 2 ** (n + 1)


@pytest.mark.criterion("C9 Cherlin-Lachlan witnesses and orbit codes")
def test_c9_cherlin_lachlan():
    with within("C9 Cherlin-Lachlan witnesses and orbit codes", 120):
        for k in (2, 3, 4):
            m, m2, points = cycle_witness(k)
            assert orbit_code_of(m) != orbit_code_of(m2)
            for j in range(k + 1):
                drop = [e for i, e in enumerate(m) if i != j]
                drop2 = [e for i, e in enumerate(m2) if i != j]
                assert orbit_code_of(drop) == orbit_code_of(drop2)
            s, w, _ = canned_witness("cherlin_lachlan", k)
            assert verify_witness(s, w)["passed"]
        # every tuple of arity <= 2 for n <= 8, arity 3 for n <= 6
        for n in range(4, 9):
            for m_ in (1, 2):
                assert compare_with_bruteforce(n, m_)["agree"]
        for n in (4, 5, 6):
            assert compare_with_bruteforce(n, 3)["agree"]
        # arity 3 at n = 8: explicit relabellings stay in the orbit
        cl = CLStructure(8, 3)
        rng = random.Random(0)
        for _ in range(500):
            t = tuple(rng.randrange(cl.universe) for _ in range(3))
            pi = list(range(8))
            rng.shuffle(pi)
            moved = tuple(cl.element(normalize(((pi[a], pi[b]), (pi[c], pi[d]))))
                          for (a, b), (c, d) in (cl.element_list[x] for x in t))
            assert orbit_equal(cl, t, moved)


@pytest.mark.criterion("C10 reproduce --all is byte-identical")
def test_c10_reproduce_determinism(tmp_path):
    with within("C10 reproduce --all is byte-identical", None):
        outputs = []
        env = dict(os.environ, ARITY_LAB_SEED="0")
        for run in ("first", "second"):
            d = tmp_path / run
            d.mkdir()
            proc = subprocess.run([sys.executable, "-m", "arity_lab.cli", "reproduce", "--all", "-o", "report.json"],
                                  cwd=d, env=env, capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            outputs.append((d / "report.json").read_bytes())
        assert outputs[0] == outputs[1]
        report = json.loads(outputs[0])
        assert report["result"]["summary"]["failed"] == []
        assert report["config"]["seed"] == 0
