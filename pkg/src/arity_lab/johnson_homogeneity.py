"""Extending intersection-preserving maps between set systems to point maps.

Given k-subsets ``S`` and ``T`` of a ground set and a bijection ``alpha``
preserving every intersection size of up to k+1 members, ``extend_to_injection``
builds an injection ``sigma`` on the points of ``S`` with
``sigma(x) = alpha(x)`` for every member ``x``.  Also here: the bound N used
to define the higher intersection relations, and a randomized check of the
pigeonhole step behind it.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from math import comb
from pathlib import Path

import networkx as nx

from .errors import ConsistencyError, InputError


@dataclass
class LkIso:
    n: int
    k: int
    S: list[frozenset]
    T: list[frozenset]
    alpha: list[int]  # alpha[i] is the index in T of the image of S[i]

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise InputError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")
        self.S = [_subset(x, self.n, self.k, "S") for x in self.S]
        self.T = [_subset(x, self.n, self.k, "T") for x in self.T]
        if len(set(self.S)) != len(self.S) or len(set(self.T)) != len(self.T):
            raise InputError("set systems must not repeat members")
        if len(self.S) != len(self.T):
            raise InputError(f"|S|={len(self.S)} but |T|={len(self.T)}")
        if sorted(self.alpha) != list(range(len(self.T))):
            raise InputError("alpha must be a bijection given as an index map onto T")
        self.alpha = [int(a) for a in self.alpha]

    def image(self, i: int) -> frozenset:
        return self.T[self.alpha[i]]

    @classmethod
    def from_json(cls, data: dict, n: int | None = None, k: int | None = None) -> "LkIso":
        try:
            S, T, alpha = data["S"], data["T"], data["alpha"]
        except (KeyError, TypeError) as exc:
            raise InputError(f"instance JSON lacks field {exc}") from None
        if k is None:
            sizes = {len(x) for x in S + T}
            if len(sizes) != 1:
                raise InputError("cannot infer k: members have different sizes")
            k = sizes.pop()
        if n is None:
            n = max((max(x) for x in S + T if x), default=-1) + 1
        return cls(n, k, [frozenset(x) for x in S], [frozenset(x) for x in T], list(alpha))

    @classmethod
    def load(cls, path, n=None, k=None) -> "LkIso":
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise InputError(f"instance file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_json(data, n, k)

    def to_json(self) -> dict:
        return {"S": [sorted(x) for x in self.S], "T": [sorted(x) for x in self.T], "alpha": self.alpha}


def _subset(x, n, k, name) -> frozenset:
    x = list(x)
    fs = frozenset(int(v) for v in x)
    if len(fs) != len(x) or len(fs) != k:
        raise InputError(f"member {sorted(x)} of {name} is not a {k}-subset")
    if any(not 0 <= v < n for v in fs):
        raise InputError(f"member {sorted(x)} of {name} leaves the ground set 0..{n - 1}")
    return fs


@dataclass(frozen=True)
class Violation:
    i: int
    j: int
    index_set: tuple[int, ...]
    image_size: int

    def to_json(self):
        return {"i": self.i, "j": self.j, "index_set": list(self.index_set), "image_size": self.image_size}


def check_lk_iso(c: LkIso, max_fold: int | None = None) -> Violation | None:
    """First index set (by size, then lexicographically) whose intersection
    size is not preserved, or None.  Sizes 2..k+1 are checked."""
    top = c.k + 1 if max_fold is None else max_fold
    for size in range(2, min(top, len(c.S)) + 1):
        for I in itertools.combinations(range(len(c.S)), size):
            a = len(frozenset.intersection(*(c.S[i] for i in I)))
            b = len(frozenset.intersection(*(c.image(i) for i in I)))
            if a != b:
                return Violation(size, a, I, b)
    return None


class NotAnIsomorphism(InputError):
    def __init__(self, violation: Violation):
        super().__init__(f"alpha does not preserve the intersection of members {list(violation.index_set)}: "
                         f"size {violation.j} becomes {violation.image_size}")
        self.violation = violation


@dataclass
class ClassPiece:
    members: frozenset  # indices of S containing the class
    points: tuple[int, ...]
    P: tuple[int, ...]
    Q: tuple[int, ...]
    image: tuple[int, ...]


def _express(c: LkIso, cls: frozenset, members: frozenset) -> tuple[list[int], list[int]]:
    """Greedy (P, Q) with cls = (meet of S[P]) minus (union of S[Q])."""
    first = min(members)
    P, Q = [first], []
    current = set(c.S[first])
    while current != cls:
        for idx, x in enumerate(c.S):
            if idx in members and not current <= x:
                P.append(idx)
                current &= x
                break
            if idx not in members and current & x:
                Q.append(idx)
                current -= x
                break
        else:
            raise ConsistencyError(f"no member separates the class {sorted(cls)}")
    return P, Q


def extend_to_injection(c: LkIso, *, check: bool = True) -> tuple[dict[int, int], list[ClassPiece]]:
    """sigma on the points of S inducing alpha, plus the class decomposition."""
    if check:
        v = check_lk_iso(c)
        if v is not None:
            raise NotAnIsomorphism(v)
    membership: dict[int, set] = {}
    for idx, x in enumerate(c.S):
        for p in x:
            membership.setdefault(p, set()).add(idx)
    classes: dict[frozenset, list[int]] = {}
    for p in sorted(membership):
        classes.setdefault(frozenset(membership[p]), []).append(p)
    sigma: dict[int, int] = {}
    pieces = []
    for members, pts in sorted(classes.items(), key=lambda kv: kv[1][0]):
        cls = frozenset(pts)
        P, Q = _express(c, cls, members)
        if len(Q) + len(P) > c.k:
            raise ConsistencyError(f"class {pts} needed {len(P) + len(Q)} > k={c.k} sets to isolate")
        D = frozenset.intersection(*(c.image(i) for i in P))
        for i in Q:
            D = D - c.image(i)
        if len(D) != len(cls):
            raise ConsistencyError(f"class {pts} has {len(cls)} points but its image region has {len(D)}")
        image = tuple(sorted(D))
        sigma.update(zip(pts, image))
        pieces.append(ClassPiece(members, tuple(pts), tuple(P), tuple(Q), image))
    problem = induction_failure(c, sigma)
    if problem is not None:
        raise ConsistencyError(problem)
    return sigma, pieces


def induction_failure(c: LkIso, sigma: dict[int, int]) -> str | None:
    """None if sigma is injective and sends every member of S onto its image."""
    if len(set(sigma.values())) != len(sigma):
        return "sigma is not injective"
    for i, x in enumerate(c.S):
        if frozenset(sigma[p] for p in x) != c.image(i):
            return f"sigma sends member {sorted(x)} to {sorted(sigma[p] for p in x)}, not {sorted(c.image(i))}"
    return None


# ---------------------------------------------------------------------------
# instance generators
# ---------------------------------------------------------------------------


def random_instance(n: int, k: int, members: int, rng: random.Random) -> tuple[LkIso, list[int]]:
    """S random; T and alpha induced by a hidden permutation, T shuffled."""
    pool = list(itertools.combinations(range(n), k))
    S = [frozenset(x) for x in rng.sample(pool, members)]
    pi = list(range(n))
    rng.shuffle(pi)
    images = [frozenset(pi[p] for p in x) for x in S]
    order = list(range(members))
    rng.shuffle(order)
    T = [images[o] for o in order]
    alpha = [order.index(i) for i in range(members)]
    return LkIso(n, k, S, T, alpha), pi


def find_isomorphic_system(S: list[frozenset], n: int, k: int, rng: random.Random,
                           max_nodes: int = 200_000) -> list[frozenset] | None:
    """Backtracking search for T != S with the same intersection sizes,
    member by member, trying candidate subsets in shuffled order."""
    pool = [frozenset(x) for x in itertools.combinations(range(n), k)]
    rng.shuffle(pool)
    m = len(S)
    chosen: list[frozenset] = []
    nodes = 0

    def consistent(y) -> bool:
        idx = len(chosen)
        # every intersection that involves the new member, up to k+1 members
        for size in range(1, min(k, idx) + 1):
            for I in itertools.combinations(range(idx), size):
                want = len(frozenset.intersection(S[idx], *(S[i] for i in I)))
                got = len(frozenset.intersection(y, *(chosen[i] for i in I)))
                if want != got:
                    return False
        return True

    def rec() -> bool:
        nonlocal nodes
        if len(chosen) == m:
            return chosen != S
        for y in pool:
            nodes += 1
            if nodes > max_nodes:
                return False
            if y in chosen or not consistent(y):
                continue
            chosen.append(y)
            if rec():
                return True
            chosen.pop()
        return False

    return list(chosen) if rec() else None


def adversarial_instances(count: int, *, n: int = 10, k: int = 3, members: int = 6,
                          seed: int = 0) -> list[LkIso]:
    """Isomorphisms found by search rather than built from a permutation."""
    rng = random.Random(seed)
    out = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 50 * count:
            raise ConsistencyError("adversarial search keeps failing; homogeneity would predict otherwise")
        S = [frozenset(x) for x in rng.sample(list(itertools.combinations(range(n), k)), members)]
        T = find_isomorphic_system(S, n, k, rng)
        if T is None:
            continue
        out.append(LkIso(n, k, S, T, list(range(members))))
    return out


# ---------------------------------------------------------------------------
# the bound N
# ---------------------------------------------------------------------------


def definability_bound_N(k: int, i: int, j: int) -> int:
    if k < 2:
        raise InputError("the bound is stated for k >= 2")
    if i < 3:
        raise InputError("the bound is stated for i >= 3")
    if not 0 <= j <= k - 1:
        raise InputError(f"j must lie in 0..{k - 1}")
    return comb(k * i, j + 1) + 1


def _candidates(xs, n, k, j):
    out = []
    for y in itertools.combinations(range(n), k):
        y = frozenset(y)
        if all(len(y & x) == j for x in xs):
            out.append(y)
    return out


def max_pairwise_family(cands, j) -> int:
    """Largest family of candidates with all pairwise intersections of size j."""
    if not cands:
        return 0
    G = nx.Graph()
    G.add_nodes_from(range(len(cands)))
    for a, b in itertools.combinations(range(len(cands)), 2):
        if len(cands[a] & cands[b]) == j:
            G.add_edge(a, b)
    _, size = nx.max_weight_clique(G, weight=None)
    return size


def forward_witnesses(xs, k: int, j: int, N: int) -> tuple[list[frozenset], int]:
    """y_1..y_N when the x's meet in exactly j points: the common part plus
    k-j fresh points each.  Returns the family and the ground size it needs."""
    common = frozenset.intersection(*xs)
    if len(common) != j:
        raise InputError("forward construction needs |x_1 ∩ ... ∩ x_i| = j")
    base = max(max(x) for x in xs) + 1
    ys = []
    for p in range(N):
        fresh = range(base + p * (k - j), base + (p + 1) * (k - j))
        ys.append(common | frozenset(fresh))
    return ys, base + N * (k - j)


def pigeonhole_check(n: int, k: int, i: int, j: int, trials: int, seed: int = 0) -> dict:
    """Randomized search for tuples breaking the defining equivalence.

    Backward direction: x's with fewer than j common points must not admit N
    candidates y meeting each x in j points and each other in j points; the
    largest such family is computed exactly.  A trial with fewer than N
    candidates in total is labelled inconclusive.  Forward direction: tuples
    with exactly j common points get N witnesses by construction.
    """
    N = definability_bound_N(k, i, j)
    rng = random.Random(seed)
    pool = list(itertools.combinations(range(n), k))
    report = {"n": n, "k": k, "i": i, "j": j, "N": N, "trials": trials, "backward": [],
              "counterexamples": 0, "inconclusive": 0, "forward_ok": 0}
    if trials == 0:
        return report
    if j == 0:
        report["note"] = "backward direction vacuous: no tuple has fewer than 0 common points"
    for _ in range(trials):
        if j > 0:
            for _attempt in range(1000):
                xs = [frozenset(x) for x in rng.sample(pool, i)]
                if len(frozenset.intersection(*xs)) < j:
                    break
            else:
                xs = None
            if xs is not None:
                cands = _candidates(xs, n, k, j)
                best = max_pairwise_family(cands, j)
                conclusive = len(cands) >= N
                report["inconclusive"] += not conclusive
                if best >= N:
                    report["counterexamples"] += 1
                report["backward"].append({"x": [sorted(x) for x in xs], "candidates": len(cands),
                                           "largest_family": best, "conclusive": conclusive})
        # forward: build x's sharing exactly j points, then the y's
        common = list(range(j))
        xs = []
        nxt = j
        for _ in range(i):
            extra = list(range(nxt, nxt + k - j))
            nxt += k - j
            xs.append(frozenset(common + extra))
        perm = list(range(nxt))
        rng.shuffle(perm)
        xs = [frozenset(perm[p] for p in x) for x in xs]
        ys, _ground = forward_witnesses(xs, k, j, N)
        ok = all(len(a & b) == j for a, b in itertools.combinations(ys, 2)) and all(
            len(x & y) == j for x in xs for y in ys)
        report["forward_ok"] += ok
    return report
