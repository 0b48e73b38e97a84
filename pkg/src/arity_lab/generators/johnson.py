"""Johnson structures: k-subsets of [n] with intersection-size relations.

Elements are k-subsets in colexicographic order, so element ``r`` is the
subset with colex rank ``r``.  Nothing is materialised; relations are
evaluated on demand from the ranks.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from math import comb

from ..errors import InputError, ResourceError
from ..structures import PredicateRelation, RelationSymbol, Structure

DEFAULT_MAX_UNIVERSE = 5_000_000


def colex_rank(subset) -> int:
    return sum(comb(c, i) for i, c in enumerate(sorted(subset), start=1))


def colex_unrank(rank: int, k: int) -> tuple[int, ...]:
    out = []
    for i in range(k, 0, -1):
        c = i - 1
        while comb(c + 1, i) <= rank:
            c += 1
        out.append(c)
        rank -= comb(c, i)
    return tuple(reversed(out))


def relation_name(i: int, j: int) -> str:
    return f"E_{i}_{j}"


class JohnsonStructure(Structure):
    """J(k) restricted to the ground set ``[n]``, in the language of the
    relations ``E_i_j`` (2 <= i <= k+1, 0 <= j <= k-1)."""

    def __init__(self, n: int, k: int, *, max_universe: int = DEFAULT_MAX_UNIVERSE):
        if not 1 <= k <= n:
            raise InputError(f"need 1 <= k <= n, got n={n}, k={k}")
        size = comb(n, k)
        if size > max_universe:
            raise ResourceError(f"J({k}) over [{n}] has {size} elements, above the universe cap of {max_universe}",
                                cap=max_universe, required=size)
        self.n, self.k = n, k
        self.subset = lru_cache(maxsize=1 << 16)(lambda r: frozenset(colex_unrank(r, k)))
        rels = []
        for i in range(2, k + 2):
            for j in range(k):
                rels.append(PredicateRelation(
                    RelationSymbol(relation_name(i, j), i), self._intersects_in(j),
                    describe=["johnson", n, k, i, j], set_like=True))
        super().__init__(size, rels, meta={"family": "johnson", "n": n, "k": k}, validate=False)

    def _intersects_in(self, j: int):
        subset = self.subset

        def pred(row):
            common = subset(row[0])
            for r in row[1:]:
                common = common & subset(r)
            return len(common) == j
        return pred

    def element(self, subset) -> int:
        subset = tuple(sorted(subset))
        if len(subset) != self.k or len(set(subset)) != self.k:
            raise InputError(f"{subset} is not a {self.k}-subset")
        if subset[0] < 0 or subset[-1] >= self.n:
            raise InputError(f"{subset} is not contained in the ground set 0..{self.n - 1}")
        return colex_rank(subset)

    def elements(self, subsets) -> tuple[int, ...]:
        return tuple(self.element(x) for x in subsets)

    def census(self, t) -> tuple[tuple[int, int], ...]:
        """Venn-region sizes of the tuple: ``(mask, count)`` for each nonempty
        region, ``mask`` recording which positions contain the points."""
        regions: dict[int, int] = {}
        for pos, e in enumerate(t):
            for p in self.subset(e):
                regions[p] = regions.get(p, 0) | (1 << pos)
        counts: dict[int, int] = {}
        for mask in regions.values():
            counts[mask] = counts.get(mask, 0) + 1
        return tuple(sorted(counts.items()))

    def type_cache_key(self, t):
        # the census is a complete invariant for Sym(n) acting on tuples
        return self.census(t)

    def orbit_representatives(self, l: int):
        """One l-tuple per Sym(n)-orbit, in a deterministic order."""
        k, n = self.k, self.n
        masks = list(range(1, 1 << l))
        load = [0] * l

        def rec(idx: int, total: int, counts: list):
            if idx == len(masks):
                if all(x == k for x in load):
                    yield list(counts)
                return
            mask = masks[idx]
            members = [p for p in range(l) if mask >> p & 1]
            room = min([k - load[p] for p in members] + [n - total])
            # the last mask containing a position must complete it
            for c in range(room, -1, -1):
                for p in members:
                    load[p] += c
                if all(load[p] == k or any(mask2 >> p & 1 for mask2 in masks[idx + 1:]) for p in range(l)):
                    counts.append((mask, c))
                    yield from rec(idx + 1, total + c, counts)
                    counts.pop()
                for p in members:
                    load[p] -= c

        for counts in rec(0, 0, []):
            sets = [[] for _ in range(l)]
            point = 0
            for mask, c in counts:
                for _ in range(c):
                    for p in range(l):
                        if mask >> p & 1:
                            sets[p].append(point)
                    point += 1
            yield tuple(self.element(s) for s in sets)

    def __repr__(self):
        return f"JohnsonStructure(n={self.n}, k={self.k}, universe={self.universe})"


def gen_johnson(n: int, k: int, *, max_universe: int = DEFAULT_MAX_UNIVERSE) -> JohnsonStructure:
    return JohnsonStructure(n, k, max_universe=max_universe)


def intersection_sizes(sets, max_fold: int) -> dict[tuple[int, ...], int]:
    """|x_I intersection| for every index set I with 2 <= |I| <= max_fold."""
    sets = [frozenset(x) for x in sets]
    out = {}
    for size in range(2, max_fold + 1):
        for I in itertools.combinations(range(len(sets)), size):
            out[I] = len(frozenset.intersection(*(sets[i] for i in I)))
    return out
