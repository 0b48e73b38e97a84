"""Arity lower bounds in Johnson graphs.

Two triples of 2-sets agree on every pair but not as triples, which is all an
arity-3 witness needs. For 3-sets over a 9-point ground set the search then
comes up empty at length 4.
"""
from arity_lab.arity import JOHNSON_TRIPLES, arity_witness_search, canned_witness, verify_witness
from arity_lab.generators import JohnsonStructure
from arity_lab.generators.johnson import intersection_sizes


def show_triples():
    for triple in JOHNSON_TRIPLES:
        sets = [frozenset(x) for x in triple]
        sizes = intersection_sizes(sets, 3)
        pairs = [sizes[I] for I in [(0, 1), (0, 2), (1, 2)]]
        print(f"  {[sorted(x) for x in sets]}: pairwise {pairs}, all three {sizes[(0, 1, 2)]}")


def main():
    print("The canned triples:")
    show_triples()
    s, w, _ = canned_witness("johnson2")
    print("verify_witness on J(2):", verify_witness(s, w)["passed"])

    print("\nSearching J(2) over [4] for a length-3 drop-one witness ...")
    r = arity_witness_search(JohnsonStructure(4, 2), 3, "drop-one", symmetry="ground")
    print("  status:", r.status)

    print("Searching J(3) over [9] at length 4 (takes a second) ...")
    r = arity_witness_search(JohnsonStructure(9, 3), 4, "drop-one", symmetry="ground")
    print("  status:", r.status, "- no length-4 witness at this size")


if __name__ == "__main__":
    main()
