"""Orbits of tuples of pair-of-pairs under relabelling the points.

A cycle of k+1 elements is told apart from a broken cycle only by looking at
all of them at once. The orbit codes are checked against a brute-force
union-find over the symmetric group.
"""
from arity_lab.generators.cherlin_lachlan import compare_with_bruteforce, cycle_witness, orbit_code_of

for k in (2, 3, 4):
    m, m2, points = cycle_witness(k)
    same = all(orbit_code_of(m[:j] + m[j + 1:]) == orbit_code_of(m2[:j] + m2[j + 1:]) for j in range(k + 1))
    print(f"k={k} on {points} points: full codes differ {orbit_code_of(m) != orbit_code_of(m2)},"
          f" every drop-one agrees {same}")

for n, m in ((6, 2), (6, 3)):
    rep = compare_with_bruteforce(n, m)
    print(f"n={n}, arity {m}: {rep['tuples']} tuples, {rep['orbits']} orbits, agree={rep['agree']}")
