"""The pairs-of-pairs structure with one relation per Sym(n)-orbit of tuples.

An element is ``{{a, b}, {c, d}}`` with ``a, b, c, d`` distinct points.  The
orbit of a tuple of elements is named by a canonical code: the least
relabelling of the points it mentions, taken over all ways of writing each
element as an ordered quadruple.
"""
from __future__ import annotations

import csv
import io
import itertools
from functools import lru_cache
from math import comb

from ..errors import InputError, ResourceError
from ..structures import PartitionFamily, Structure

DEFAULT_ORBIT_BUDGET = 200_000

Element = tuple[tuple[int, int], tuple[int, int]]


def normalize(element) -> Element:
    """Canonical form of a pair of pairs; validates distinctness."""
    try:
        (a, b), (c, d) = element
    except (TypeError, ValueError):
        raise InputError(f"{element!r} is not a pair of pairs") from None
    if len({a, b, c, d}) != 4:
        raise InputError(f"{element!r} does not consist of four distinct points")
    p, q = tuple(sorted((a, b))), tuple(sorted((c, d)))
    return (p, q) if p <= q else (q, p)


def _orderings(element: Element):
    (a, b), (c, d) = element
    for p, q in (((a, b), (c, d)), ((c, d), (a, b))):
        for x, y in (p, p[::-1]):
            for z, w in (q, q[::-1]):
                yield (x, y, z, w)


def _components(elements: list[Element]) -> list[list[int]]:
    """Positions grouped by shared points, each group sorted, groups ordered
    by their first position."""
    parent = list(range(len(elements)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[int, int] = {}
    for pos, e in enumerate(elements):
        for p in (*e[0], *e[1]):
            if p in owner:
                parent[find(pos)] = find(owner[p])
            else:
                owner[p] = pos
    groups: dict[int, list[int]] = {}
    for pos in range(len(elements)):
        groups.setdefault(find(pos), []).append(pos)
    return sorted(groups.values())


def _component_code(elements: list[Element]) -> tuple:
    states = [{}]
    code = []
    for e in elements:
        best = None
        nxt = {}
        for labels in states:
            for quad in _orderings(e):
                lab = dict(labels)
                word = []
                for p in quad:
                    if p not in lab:
                        lab[p] = len(lab)
                    word.append(lab[p])
                word = tuple(word)
                if best is None or word < best:
                    best, nxt = word, {}
                if word == best:
                    nxt[tuple(sorted(lab.items()))] = lab
        code.append(best)
        states = list(nxt.values())
    return tuple(code)


def orbit_code_of(elements) -> str:
    """Canonical orbit code of a tuple of (normalised) elements.

    Two tuples share a code iff a permutation of the points maps one onto the
    other.  Distinct connected components use disjoint points, so they are
    coded independently and tagged with their positions.
    """
    elements = [normalize(e) for e in elements]
    parts = []
    for comp in _components(elements):
        words = _component_code([elements[i] for i in comp])
        parts.append(",".join(map(str, comp)) + ":" + ".".join("".join(_digit(x) for x in w) for w in words))
    return "m%d|" % len(elements) + "|".join(parts)


def _digit(x: int) -> str:
    # labels inside a component stay below 4 * arity; base 36 keeps codes short
    return "0123456789abcdefghijklmnopqrstuvwxyz"[x] if x < 36 else f"({x})"


class CLStructure(Structure):
    """Elements ``{{a,b},{c,d}}`` over ``[n]`` in lexicographic order of their
    normal forms, with orbit relations of every arity up to ``max_arity``."""

    def __init__(self, n: int, max_arity: int):
        if n < 4:
            raise InputError(f"the ground set needs at least 4 points, got n={n}")
        if max_arity < 1:
            raise InputError("max_arity must be at least 1")
        self.n, self.max_arity_bound = n, max_arity
        self.points = list(range(n))
        elems = []
        for quad in itertools.combinations(range(n), 4):
            a, b, c, d = quad
            elems.extend([((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))])
        self.element_list: list[Element] = sorted(elems)
        self._index = {e: i for i, e in enumerate(self.element_list)}
        self._label = lru_cache(maxsize=1 << 16)(self._label_uncached)
        fams = [PartitionFamily(f"O{m}_", m, self._label, describe=["cherlin-lachlan", n, m])
                for m in range(1, max_arity + 1)]
        super().__init__(len(self.element_list), families=fams,
                         meta={"family": "cherlin-lachlan", "n": n, "max_arity": max_arity}, validate=False)

    def _label_uncached(self, row) -> str:
        return orbit_code_of([self.element_list[i] for i in row]).split("|", 1)[1]

    def element(self, e) -> int:
        e = normalize(e)
        if e not in self._index:
            raise InputError(f"{e} uses points outside the ground set 0..{self.n - 1}")
        return self._index[e]

    def elements(self, es) -> tuple[int, ...]:
        return tuple(self.element(e) for e in es)

    def orbit_code(self, t) -> str:
        t = self.check_tuple(t)
        return orbit_code_of([self.element_list[i] for i in t])

    def type_cache_key(self, t):
        # within the language the qf-type of a short tuple is its orbit
        if len(t) <= self.max_arity_bound:
            return self.orbit_code(t)
        return None

    def __repr__(self):
        return f"CLStructure(n={self.n}, max_arity={self.max_arity_bound}, universe={self.universe})"


def gen_cherlin_lachlan(n: int, max_arity: int) -> CLStructure:
    return CLStructure(n, max_arity)


def orbit_equal(cl: CLStructure, t1, t2) -> bool:
    t1, t2 = tuple(t1), tuple(t2)
    if len(t1) != len(t2):
        raise InputError("tuples of different lengths are never in one orbit; lengths must match")
    if len(t1) > cl.max_arity_bound:
        raise InputError(f"arity {len(t1)} exceeds max_arity {cl.max_arity_bound}")
    return cl.orbit_code(t1) == cl.orbit_code(t2)


def orbit_inventory(n: int, max_arity: int, budget: int = DEFAULT_ORBIT_BUDGET) -> list[tuple[str, int, tuple]]:
    """(code, arity, representative) for every orbit of m-tuples, m <= max_arity.

    Orbits are grown one position at a time; the new element may reuse any
    point already mentioned or take fresh ones, so every orbit is reached
    while only O(orbits * choices) codes are computed.
    """
    if n < 4:
        raise InputError(f"the ground set needs at least 4 points, got n={n}")
    out = []
    frontier = {(): ()}
    examined = 0
    for m in range(1, max_arity + 1):
        nxt: dict[str, tuple] = {}
        for rep in frontier.values():
            used = len({p for e in rep for pair in e for p in pair})
            pool = range(min(n, used + 4))
            for quad in itertools.combinations(pool, 4):
                fresh = [q for q in quad if q >= used]
                if fresh != list(range(used, used + len(fresh))):
                    continue
                a, b, c, d = quad
                for e in (((a, b), (c, d)), ((a, c), (b, d)), ((a, d), (b, c))):
                    examined += 1
                    if examined > budget:
                        raise ResourceError(f"orbit enumeration exceeded the budget of {budget} candidates",
                                            cap=budget)
                    t = rep + (e,)
                    code = orbit_code_of(t)
                    if code not in nxt:
                        nxt[code] = t
        for code in sorted(nxt):
            out.append((code, m, nxt[code]))
        frontier = nxt
    return out


def inventory_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["code", "arity", "representative"])
    for code, m, rep in rows:
        w.writerow([code, m, " ".join(f"{{{{{a},{b}}},{{{c},{d}}}}}" for (a, b), (c, d) in rep)])
    return buf.getvalue()


def universe_size(n: int) -> int:
    return 3 * comb(n, 4)


def cycle_witness(k: int) -> tuple[list[Element], list[Element], int]:
    """The cycle tuples (m_1..m_{k+1}) and (m_1..m_k, m'_{k+1}).

    Points ``a_i = 2(i-1)`` and ``b_i = 2(i-1) + 1``; returns both tuples and
    the number of ground points used.
    """
    if k < 1:
        raise InputError("k must be positive")
    a = [2 * i for i in range(k + 1)]
    b = [2 * i + 1 for i in range(k + 1)]
    m = []
    for i in range(k + 1):
        j = (i + 1) % (k + 1)
        m.append(normalize(((a[i], a[j]), (b[i], b[j]))))
    twisted = normalize(((a[0], b[k]), (b[0], a[k])))
    return m, m[:k] + [twisted], 2 * (k + 1)


def orbit_partition_bruteforce(n: int, m: int) -> list[int]:
    """Oracle: Sym(n)-orbits on m-tuples of elements by closing under a
    transposition and an n-cycle with union-find.  Returns, for every m-tuple
    in lexicographic index order, the index of its orbit's least tuple."""
    cl_elements = CLStructure(n, 1).element_list
    index = {e: i for i, e in enumerate(cl_elements)}
    size = len(cl_elements)
    gens = [
        {0: 1, 1: 0},
        {p: (p + 1) % n for p in range(n)},
    ]
    moves = []
    for g in gens:
        img = []
        for e in cl_elements:
            (a, b), (c, d) = e
            img.append(index[normalize(((g.get(a, a), g.get(b, b)), (g.get(c, c), g.get(d, d))))])
        moves.append(img)
    total = size**m
    parent = list(range(total))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for t in itertools.product(range(size), repeat=m):
        code = 0
        for x in t:
            code = code * size + x
        for img in moves:
            code2 = 0
            for x in t:
                code2 = code2 * size + img[x]
            ra, rb = find(code), find(code2)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(i) for i in range(total)]


def compare_with_bruteforce(n: int, m: int) -> dict:
    """Check that orbit codes and brute-force orbits induce the same partition."""
    cl = CLStructure(n, m)
    oracle = orbit_partition_bruteforce(n, m)
    code_to_orbit: dict[str, int] = {}
    orbit_to_code: dict[int, str] = {}
    mismatches = 0
    for idx, t in enumerate(itertools.product(range(cl.universe), repeat=m)):
        code = orbit_code_of([cl.element_list[i] for i in t])
        orb = oracle[idx]
        if code_to_orbit.setdefault(code, orb) != orb or orbit_to_code.setdefault(orb, code) != code:
            mismatches += 1
    return {"n": n, "m": m, "tuples": cl.universe**m, "orbits": len(orbit_to_code),
            "codes": len(code_to_orbit), "mismatches": mismatches, "agree": mismatches == 0}
