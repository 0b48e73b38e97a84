"""Parity reducts of random k-hypergraphs, and what they say about distality.

R(x, y, c1..ck) holds when E(x, c) and E(y, c) disagree in an odd number of
ways. The script checks that identity, then builds a sequence that is
indiscernible after dropping any one parameter but not over all of them.
"""
from arity_lab.distality import (build_nondistal_witness, nondistal_report, pinned_h2_instance,
                                 soundness_sweep, strong_distality_check, verify_parity_identity)
from arity_lab.generators import gen_kaygraph


def main():
    pair = gen_kaygraph(8, 3, seed=0)
    rep = verify_parity_identity(pair, mode="exhaustive")
    print(f"parity identity on n=8, k=3: {rep['checked']} checks, {rep['violations']} violations")

    for k in (2, 3):
        w = build_nondistal_witness(k, 3)
        rep = nondistal_report(w, max_m=len(w.sequence))
        drops = [d["indiscernible"] for d in rep["drop_one"]]
        print(f"k={k}: full sequence indiscernible? {rep['full']['indiscernible']}; drop-one: {drops}")

    inst = pinned_h2_instance()
    rep = strong_distality_check(inst, 3)
    print("\nA small instance outside the finite arguments:")
    print(f"  H1={rep['h1']} H2={rep['h2']} conclusion={rep['conclusion']} theorem={rep['theorem']}")

    sweep = soundness_sweep(500, seed=0)
    print(f"\n500 random instances: {sweep['hypotheses_held']} met the hypotheses, "
          f"{sweep['theorem_violations']} violations")


if __name__ == "__main__":
    main()
