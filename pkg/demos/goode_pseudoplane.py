"""Goode's labelled pseudoplanes on a truncated fragment.

phi separates b from b', yet with any one entry removed the two tuples have
matching neighbourhoods up to the radius shown.
"""
from arity_lab.pseudoplane import build_fragment, build_goode_witness, check_drop_one_agreement, eval_phi

for n, depths, radius in ((1, 2, 1), (2, [2, 3], 2)):
    f = build_fragment(n + 1, 2, depths)
    w = build_goode_witness(n, f)
    print(f"n={n}: phi(b)={eval_phi(n + 1, f, w.b)}, phi(b')={eval_phi(n + 1, f, w.b_prime)}")
    rep = check_drop_one_agreement(w, f, radius)
    print(f"  drop-one agreement at radius {radius}: {rep.ok} over {len(rep.per_drop)} drops"
          f" (largest radius verified: {rep.max_radius})")
