"""Uniform hypergraphs and their parity reducts (kay-graphs)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..structures import RelationSymbol, Structure, TableRelation


@dataclass(frozen=True)
class KayGraphPair:
    base: Structure
    reduct: Structure
    k: int

    @property
    def E(self) -> TableRelation:
        return self.base.relations["E"]

    @property
    def R(self) -> TableRelation:
        return self.reduct.relations["R"]


def gen_hypergraph(n: int, k: int, *, seed: int | None = None, edge_prob: float = 0.5,
                   edges=None) -> Structure:
    """k-uniform hypergraph on ``n`` vertices, stored as a symmetric ``E``.

    With ``edges`` given the graph is explicit; otherwise every k-subset is an
    edge independently with probability ``edge_prob``, drawn in lexicographic
    order from ``numpy.random.default_rng(seed)``.
    """
    if k < 2:
        raise InputError("hypergraph uniformity k must be at least 2")
    if k > n:
        raise InputError(f"k={k} exceeds the number of vertices n={n}")
    if edges is not None:
        keys = set()
        for e in edges:
            e = tuple(int(v) for v in e)
            if len(e) != k:
                raise InputError(f"edge {e} does not have {k} vertices")
            if len(set(e)) != k:
                raise InputError(f"edge {e} has repeated vertices")
            if not all(0 <= v < n for v in e):
                raise InputError(f"edge {e} leaves the vertex set 0..{n - 1}")
            keys.add(tuple(sorted(e)))
        meta = {"family": "hypergraph", "n": n, "k": k, "mode": "explicit"}
    else:
        if seed is None:
            raise InputError("random hypergraphs need a seed")
        if not 0.0 <= edge_prob <= 1.0:
            raise InputError("edge probability must lie in [0, 1]")
        subsets = list(itertools.combinations(range(n), k))
        coins = np.random.default_rng(seed).random(len(subsets)) < edge_prob
        keys = {e for e, c in zip(subsets, coins) if c}
        meta = {"family": "hypergraph", "n": n, "k": k, "mode": "random", "seed": seed, "edge_prob": edge_prob}
    E = TableRelation(RelationSymbol("E", k), keys, closed=True)
    return Structure(n, [E], meta=meta)


def extension_deficiency(h: Structure) -> int:
    """Count (A, pattern) pairs with |A| = k that no outside vertex realises.

    A pattern says which (k-1)-subsets B of A have ``B + {v}`` as an edge.
    The random hypergraph's theory asks for every pattern to be realised, so
    this measures how far a finite sample is from the extension axioms.
    """
    E = _single_symmetric(h)
    k = E.arity
    n = h.universe
    missing = 0
    for A in itertools.combinations(range(n), k):
        faces = list(itertools.combinations(A, k - 1))
        seen = set()
        for v in range(n):
            if v in A:
                continue
            seen.add(tuple(tuple(sorted(B + (v,))) in E.stored for B in faces))
        missing += 2**len(faces) - len(seen)
    return missing


def _single_symmetric(h: Structure) -> TableRelation:
    if len(h.relations) != 1:
        raise InputError("expected a structure with exactly one relation")
    (E,) = h.relations.values()
    if not isinstance(E, TableRelation) or not E.symmetric:
        raise InputError(f"relation {E.name!r} is not closed under coordinate permutations")
    if not E.injective:
        raise InputError(f"relation {E.name!r} contains a tuple with repeated entries")
    return E


def parity_reduct(h: Structure) -> KayGraphPair:
    """(k+1)-ary R: a set of k+1 distinct vertices is in R iff an odd number
    of its k-subsets are edges."""
    E = _single_symmetric(h)
    k = E.arity
    edges = E.stored
    # every R-set with a nonzero count contains an edge; grow edges by one vertex
    counts: dict[tuple, int] = {}
    for e in edges:
        for v in range(h.universe):
            if v in e:
                continue
            key = tuple(sorted(e + (v,)))
            counts[key] = counts.get(key, 0) + 1
    rows = [key for key, c in counts.items() if c % 2 == 1]
    R = TableRelation(RelationSymbol("R", k + 1), rows, closed=True)
    meta = dict(h.meta, family="kaygraph")
    reduct = Structure(h.universe, [R], meta=meta)
    return KayGraphPair(h, reduct, k)


def gen_kaygraph(n: int, k: int, *, seed: int, edge_prob: float = 0.5) -> KayGraphPair:
    return parity_reduct(gen_hypergraph(n, k, seed=seed, edge_prob=edge_prob))
