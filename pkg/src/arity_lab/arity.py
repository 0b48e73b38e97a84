"""Arity lower-bound witnesses: search, verification and canned examples.

A witness is a pair of l-tuples whose sub-tuple types agree (all drop-one
sub-tuples, or all sub-tuples of size at most k) while their full types
differ.  The inductive set-system construction lives here too, since its
only purpose is to produce such witnesses inside Johnson structures.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import InputError, StaleWitnessError
from .generators.cherlin_lachlan import CLStructure, cycle_witness
from .generators.hypergraph import gen_hypergraph, parity_reduct
from .generators.johnson import JohnsonStructure
from .structures import (DROP_ONE, Mode, RelationSymbol, Structure, TableRelation, qf_type,
                         subtype_profile)

PROVISO = ("A finite structure's witness certifies a theory-level lower bound only when the structure "
           "embeds in the intended model with qf-types preserved.")


@dataclass(frozen=True)
class Symmetry:
    name: str
    description: str

    def to_json(self):
        return {"name": self.name, "description": self.description}


NO_SYMMETRY = Symmetry("none", "every l-tuple of the universe enumerated")
GROUND_PERMUTATIONS = Symmetry(
    "ground-permutations",
    "one tuple per orbit of the ground-set symmetric group; qf-types are invariant under it")


@dataclass
class Witness:
    structure_digest: str
    t1: tuple
    t2: tuple
    mode: Mode
    profile_digest: str
    type_digests: tuple[str, str]
    transcript: list = field(default_factory=list)

    @property
    def l(self) -> int:
        return len(self.t1)

    def to_json(self) -> dict:
        return {"structure_digest": self.structure_digest, "t1": list(self.t1), "t2": list(self.t2),
                "mode": str(self.mode), "profile_digest": self.profile_digest,
                "type_digests": list(self.type_digests), "transcript": self.transcript,
                "proviso": PROVISO}

    @classmethod
    def from_json(cls, data: dict) -> "Witness":
        return cls(data["structure_digest"], tuple(data["t1"]), tuple(data["t2"]), Mode.parse(data["mode"]),
                   data["profile_digest"], tuple(data["type_digests"]), list(data.get("transcript", [])))


def make_witness(s: Structure, t1, t2, mode=DROP_ONE) -> Witness:
    mode = Mode.parse(mode)
    p1 = subtype_profile(s, t1, mode)
    q1, q2 = qf_type(s, t1), qf_type(s, t2)
    return Witness(s.digest, tuple(t1), tuple(t2), mode, p1.digest, (q1.digest, q2.digest))


def verify_witness(s: Structure, w: Witness) -> dict:
    """Recompute both profiles and both full types from scratch."""
    if w.structure_digest != s.digest:
        raise StaleWitnessError(f"witness was built for structure {w.structure_digest[:12]}, "
                                f"not {s.digest[:12]}")
    if len(w.t1) != len(w.t2):
        raise InputError("witness tuples differ in length")
    p1 = subtype_profile(s, w.t1, w.mode)
    p2 = subtype_profile(s, w.t2, w.mode)
    q1, q2 = qf_type(s, w.t1), qf_type(s, w.t2)
    compared = []
    for (I, a), (_, b) in zip(p1.entries, p2.entries):
        compared.append({"index_set": list(I), "equal": a.digest == b.digest,
                         "atoms_first": a.listing(), "atoms_second": b.listing()})
    only1 = sorted(set(q1.listing()) - set(q2.listing()))
    only2 = sorted(set(q2.listing()) - set(q1.listing()))
    profiles_equal = p1.digest == p2.digest
    types_differ = q1.digest != q2.digest
    return {
        "passed": profiles_equal and types_differ,
        "profiles_equal": profiles_equal,
        "types_differ": types_differ,
        "mode": str(w.mode),
        "profile_digests": [p1.digest, p2.digest],
        "type_digests": [q1.digest, q2.digest],
        "recorded_digests_match": [p1.digest, q1.digest, q2.digest] == [w.profile_digest, *w.type_digests],
        "subtuples": compared,
        "full_type_difference": {"only_first": only1, "only_second": only2},
        "proviso": PROVISO,
    }


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass
class SearchResult:
    status: str  # witness | exhausted_no_witness | budget_exhausted
    witness: Witness | None
    examined: int
    symmetry: Symmetry
    l: int
    mode: Mode
    buckets: int = 0

    def to_json(self) -> dict:
        return {"status": self.status, "l": self.l, "mode": str(self.mode), "examined": self.examined,
                "profile_buckets": self.buckets, "symmetry": self.symmetry.to_json(),
                "witness": self.witness.to_json() if self.witness else None, "proviso": PROVISO}


def _candidates(s: Structure, l: int, symmetry: str):
    if symmetry == "auto":
        symmetry = "ground" if hasattr(s, "orbit_representatives") else "none"
    if symmetry == "ground":
        if not hasattr(s, "orbit_representatives"):
            raise InputError(f"{type(s).__name__} declares no ground-set symmetry")
        return s.orbit_representatives(l), GROUND_PERMUTATIONS
    if symmetry == "none":
        return itertools.product(range(s.universe), repeat=l), NO_SYMMETRY
    raise InputError(f"unknown symmetry {symmetry!r}")


def arity_witness_search(s: Structure, l: int, mode=DROP_ONE, budget: int | None = None,
                         symmetry: str = "auto") -> SearchResult:
    """Hash-join l-tuples on their profile digest; a bucket holding two full
    types yields a witness.

    ``budget`` caps the number of tuples examined (None means exhaustive).
    Under ground-set symmetry one tuple per orbit suffices because profiles
    and types are orbit invariants.
    """
    if l < 2:
        raise InputError("witness length l must be at least 2")
    if budget is not None and budget <= 0:
        raise InputError("budget must be positive")
    mode = Mode.parse(mode)
    if mode.kind == "up_to_k" and mode.k > l:
        raise InputError(f"profile bound k={mode.k} exceeds l={l}")
    cands, sym = _candidates(s, l, symmetry)
    buckets: dict[str, tuple[str, tuple]] = {}
    examined = 0
    for t in cands:
        if budget is not None and examined >= budget:
            return SearchResult("budget_exhausted", None, examined, sym, l, mode, len(buckets))
        examined += 1
        t = tuple(t)
        p = subtype_profile(s, t, mode).digest
        q = qf_type(s, t).digest
        seen = buckets.get(p)
        if seen is None:
            buckets[p] = (q, t)
        elif seen[0] != q:
            w = make_witness(s, seen[1], t, mode)
            report = verify_witness(s, w)
            if not report["passed"]:
                raise AssertionError("search produced a witness that fails verification")
            w.transcript = [f"bucket {p[:16]}: {list(seen[1])} has type {seen[0][:16]}, "
                            f"{list(t)} has type {q[:16]}"]
            return SearchResult("witness", w, examined, sym, l, mode, len(buckets))
    return SearchResult("exhausted_no_witness", None, examined, sym, l, mode, len(buckets))


def naive_witness_exists(s: Structure, l: int, mode=DROP_ONE) -> bool:
    """Oracle: compare every pair of l-tuples directly."""
    mode = Mode.parse(mode)
    tuples = list(itertools.product(range(s.universe), repeat=l))
    data = [(subtype_profile(s, t, mode).as_dict(), qf_type(s, t)) for t in tuples]
    for (p1, q1), (p2, q2) in itertools.combinations(data, 2):
        if p1 == p2 and q1 != q2:
            return True
    return False


# ---------------------------------------------------------------------------
# set systems
# ---------------------------------------------------------------------------


@dataclass
class SetSystemPair:
    level: int
    l: int
    X: tuple[frozenset, ...]
    Y: tuple[frozenset, ...]
    r: dict[int, int]

    @property
    def k(self) -> int | None:
        sizes = {len(x) for x in self.X + self.Y}
        return sizes.pop() if len(sizes) == 1 else None

    def to_json(self) -> dict:
        return {"level": self.level, "l": self.l, "k": self.k,
                "X": [sorted(x) for x in self.X], "Y": [sorted(y) for y in self.Y],
                "r": {str(j): v for j, v in sorted(self.r.items())}}


def set_system_levels(l: int) -> list[SetSystemPair]:
    """Every level p = 1..l of the construction.

    Going from p to p+1, each (l-p)-fold intersection is padded with fresh
    points (from one counter shared by both systems) up to the largest set
    size found at level p.
    """
    if not isinstance(l, int) or l < 1:
        raise InputError("l must be a positive integer")
    X = [set([0]) for _ in range(l)]
    Y = [set() for _ in range(l)]
    fresh = 1
    r: dict[int, int] = {}
    levels = [SetSystemPair(1, l, tuple(map(frozenset, X)), tuple(map(frozenset, Y)), dict(r))]
    for p in range(1, l):
        j = l - p
        target = max(len(z) for z in X + Y)
        for I in itertools.combinations(range(l), j):
            for system in (X, Y):
                have = len(set.intersection(*(system[i] for i in I)))
                for _ in range(target - have):
                    for i in I:
                        system[i].add(fresh)
                    fresh += 1
        r[j] = target
        levels.append(SetSystemPair(p + 1, l, tuple(map(frozenset, X)), tuple(map(frozenset, Y)), dict(r)))
    return levels


def build_set_systems(l: int) -> SetSystemPair:
    return set_system_levels(l)[-1]


def verify_set_systems(pair: SetSystemPair, *, embed: bool = True) -> dict:
    """Check both invariants exhaustively; on a completed pair with a common
    set size k, also verify the Johnson-structure witness they form."""
    report: dict = {"level": pair.level, "l": pair.l, "violations": []}
    X, Y = list(pair.X), list(pair.Y)
    full_x = frozenset.intersection(*X) if X else frozenset()
    full_y = frozenset.intersection(*Y) if Y else frozenset()
    report["full_intersections"] = [len(full_x), len(full_y)]
    if len(full_x) != 1:
        report["violations"].append({"condition": "full", "system": "X", "size": len(full_x)})
    if len(full_y) != 0:
        report["violations"].append({"condition": "full", "system": "Y", "size": len(full_y)})
    for j in range(max(1, pair.l - pair.level + 1), pair.l):
        want = pair.r.get(j)
        for name, system in (("X", X), ("Y", Y)):
            for I in itertools.combinations(range(pair.l), j):
                size = len(frozenset.intersection(*(system[i] for i in I)))
                if want is None:
                    want = size
                if size != want:
                    report["violations"].append(
                        {"condition": "uniform", "j": j, "system": name, "index_set": list(I),
                         "size": size, "expected": want})
    report["passed"] = not report["violations"]
    report["witness"] = None
    if embed and pair.level == pair.l and pair.l >= 2:
        k = pair.k
        if k is None:
            report["passed"] = False
            report["violations"].append({"condition": "common size", "sizes": sorted({len(z) for z in X + Y})})
            return report
        n = max(max(z) for z in X + Y) + 1
        J = JohnsonStructure(n, k)
        t1, t2 = J.elements(X), J.elements(Y)
        w = make_witness(J, t1, t2, DROP_ONE)
        v = verify_witness(J, w)
        report["witness"] = {"k": k, "ground": n, "t1": list(t1), "t2": list(t2), "passed": v["passed"],
                             "profiles_equal": v["profiles_equal"], "types_differ": v["types_differ"]}
        report["passed"] = report["passed"] and v["passed"]
    return report


# ---------------------------------------------------------------------------
# canned witnesses
# ---------------------------------------------------------------------------


JOHNSON_TRIPLES = (((0, 1), (0, 2), (1, 2)), ((0, 1), (0, 2), (0, 3)))


def _goode_structure(n: int, radius: int | None = None):
    """Entries of both Goode tuples as a small structure.

    Relations: ``Phi`` (the full tuples satisfying phi), ``SameOrbit`` and
    ``Dist_d`` (tree distance d, d <= 2r).  Drop-one agreement of these atoms
    is the finite shadow of the ball isomorphisms.
    """
    from .pseudoplane import build_fragment, build_goode_witness, check_drop_one_agreement, eval_phi

    depths = {1: [2], 2: [2, 3]}.get(n, [2] * (n - 1) + [3])
    f = build_fragment(n + 1, 2, depths)
    gw = build_goode_witness(n, f)
    radius = radius if radius is not None else (1 if n == 1 else 2)
    agreement = check_drop_one_agreement(gw, f, radius)
    entries = sorted(set(gw.b) | set(gw.b_prime), key=lambda v: (v[0], len(v[1]), repr(v[1])))
    index = {v: i for i, v in enumerate(entries)}
    sort = n + 1

    def dist(v, w):
        if v[0] != w[0]:
            return None
        a, b = v[1][::-1], w[1][::-1]
        c = 0
        while c < min(len(a), len(b)) and a[c] == b[c]:
            c += 1
        return len(a) + len(b) - 2 * c

    same = [(index[v], index[w]) for v in entries for w in entries if v[0] == w[0]]
    rels = [TableRelation(RelationSymbol("SameOrbit", 2), same)]
    for d in range(1, 2 * radius + 1):
        rows = [(index[v], index[w]) for v in entries for w in entries if dist(v, w) == d]
        rels.append(TableRelation(RelationSymbol(f"Dist{d}", 2), rows))
    phi_rows = [tuple(index[v] for v in t) for t in (gw.b, gw.b_prime) if eval_phi(sort, f, t)]
    rels.append(TableRelation(RelationSymbol("Phi", 2 ** sort), phi_rows))
    s = Structure(len(entries), rels, meta={"family": "goode", "n": n, "radius": agreement.max_radius})
    t1 = tuple(index[v] for v in gw.b)
    t2 = tuple(index[v] for v in gw.b_prime)
    return s, t1, t2, {"agreement_ok": agreement.ok, "radius": agreement.max_radius}


def canned_witness(family: str, param: int | None = None):
    """(structure, witness, notes) for one of the standard examples."""
    notes: dict = {}
    if family == "johnson2":
        s = JohnsonStructure(4, 2)
        t1, t2 = (s.elements(x) for x in JOHNSON_TRIPLES)
    elif family == "cherlin_lachlan":
        k = 2 if param is None else param
        m, m2, points = cycle_witness(k)
        s = CLStructure(points, k + 1)
        t1, t2 = s.elements(m), s.elements(m2)
        notes = {"k": k, "ground_points": points}
    elif family == "kaygraph":
        k = 2 if param is None else param
        if k < 2:
            raise InputError("kay-graph witnesses need k >= 2")
        h = gen_hypergraph(k + 2, k, edges=[tuple(range(1, k + 1))])
        s = parity_reduct(h).reduct
        t1 = tuple(range(k + 1))
        t2 = tuple(range(k)) + (k + 1,)
        notes = {"k": k, "edges": [list(range(1, k + 1))]}
    elif family == "goode":
        n = 1 if param is None else param
        s, t1, t2, notes = _goode_structure(n)
    else:
        raise InputError(f"unknown witness family {family!r}")
    w = make_witness(s, t1, t2, DROP_ONE)
    report = verify_witness(s, w)
    w.transcript = [f"{family}: profiles equal={report['profiles_equal']}, types differ={report['types_differ']}"]
    return s, w, notes
