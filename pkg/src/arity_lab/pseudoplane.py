"""Finite fragments of labelled free pseudoplanes and the phi_n witnesses.

Sort ``X_1`` is a plain label set ``0..L-1``.  For ``i >= 2`` the free group
on ``X_{i-1}`` acts on ``X_i``; a fragment keeps a few orbits, each truncated
to the words of length at most ``depth``.  A vertex of ``X_i`` is stored as
``(root, word)`` and stands for ``word * root``; ``word`` is a reduced tuple of
letters ``(x, s)`` with ``x`` a vertex of ``X_{i-1}`` and ``s = +1 / -1``,
leftmost letter acting last.  Nothing above ``X_2`` is ever materialised in
full: balls are explored on demand.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InputError, ResourceError

DEFAULT_MAX_VERTICES = 200_000
DEFAULT_MAX_BALL = 5_000_000
DEFAULT_MAX_AGREEMENT_BALL = 1_000_000


class SchreierFragment:
    def __init__(self, n: int, labels: int, depth, *, trees: Sequence[int] | None = None,
                 max_vertices: int = DEFAULT_MAX_VERTICES):
        if n < 1:
            raise InputError("need at least one sort")
        if labels < 1:
            raise InputError("need at least one label")
        if isinstance(depth, int):
            depth = [depth] * (n + 1)
        else:
            depth = [0, 0] + list(depth)
            if len(depth) != n + 1:
                raise InputError(f"per-sort depths must cover sorts 2..{n}")
        if any(d < 0 for d in depth[2:]):
            raise InputError("depth must be non-negative")
        if trees is None:
            trees = [0, labels] + [2 ** (i - 1) for i in range(2, n + 1)]
        else:
            trees = [0, labels] + list(trees)
            if len(trees) != n + 1:
                raise InputError(f"tree counts must cover sorts 2..{n}")
        self.n = n
        self.labels = labels
        self.depth = depth
        self.trees = trees
        self.max_vertices = max_vertices
        self._sorted: dict[int, list] = {1: list(range(labels))}
        self._gen_set: dict[int, frozenset] = {}

    # -- counting and enumeration -------------------------------------------

    def degree(self, i: int) -> int:
        """Number of neighbours of an interior vertex of X_i."""
        return 2 * self.size(i - 1)

    def tree_size(self, i: int) -> int:
        deg = self.degree(i)
        total, layer = 1, 1
        for d in range(1, self.depth[i] + 1):
            layer = deg if d == 1 else layer * (deg - 1)
            total += layer
        return total

    def size(self, i: int) -> int:
        self._check_sort(i)
        if i == 1:
            return self.labels
        return self.trees[i] * self.tree_size(i)

    def _check_sort(self, i: int):
        if not 1 <= i <= self.n:
            raise InputError(f"sort X_{i} does not exist in a fragment with {self.n} sorts")

    def generators(self, i: int) -> list:
        """The vertices of X_{i-1}, which label the edges of X_i."""
        return self.vertices(i - 1)

    def vertices(self, i: int) -> list:
        self._check_sort(i)
        if i in self._sorted:
            return self._sorted[i]
        size = self.size(i)
        if size > self.max_vertices:
            raise ResourceError(f"sort X_{i} has {size} vertices, above the cap of {self.max_vertices}",
                                cap=self.max_vertices, required=size)
        out = []
        for root in range(self.trees[i]):
            for v, _ in self.ball_from([(root, ())], i, self.depth[i]):
                out.append(v)
        out.sort(key=vertex_key)
        self._sorted[i] = out
        return out

    def _generator_set(self, i: int) -> frozenset:
        if i not in self._gen_set:
            self._gen_set[i] = frozenset(self.generators(i))
        return self._gen_set[i]

    # -- membership and action ------------------------------------------------

    def contains(self, i: int, v) -> bool:
        if not 1 <= i <= self.n:
            return False
        if i == 1:
            return isinstance(v, int) and 0 <= v < self.labels
        try:
            root, word = v
        except (TypeError, ValueError):
            return False
        if not (isinstance(root, int) and 0 <= root < self.trees[i]) or len(word) > self.depth[i]:
            return False
        gens = self._generator_set(i)
        prev = None
        for letter in word:
            x, s = letter
            if s not in (1, -1) or x not in gens:
                return False
            if prev is not None and prev[0] == x and prev[1] == -s:
                return False
            prev = letter
        return True

    def check_vertex(self, i: int, v):
        if not self.contains(i, v):
            raise InputError(f"{v!r} is not a vertex of sort X_{i} in this fragment")
        return v

    def act(self, i: int, x, v, sign: int = 1):
        """``x^sign * v`` in X_i, or None when it leaves the fragment."""
        root, word = v
        if word and word[0][0] == x and word[0][1] == -sign:
            return (root, word[1:])
        if len(word) >= self.depth[i]:
            return None
        return (root, ((x, sign),) + word)

    def neighbours(self, i: int, v):
        """(letter, neighbour) pairs inside the fragment."""
        root, word = v
        out = []
        if word:
            x, s = word[0]
            out.append(((x, -s), (root, word[1:])))
        if len(word) < self.depth[i]:
            head = word[0] if word else None
            for x in self.generators(i):
                for s in (1, -1):
                    if head is not None and head[0] == x and head[1] == -s:
                        continue
                    out.append(((x, s), (root, ((x, s),) + word)))
        return out

    def ball_from(self, sources, i: int, radius: int, max_size: int = DEFAULT_MAX_BALL):
        """BFS over X_i from ``sources``; yields (vertex, distance)."""
        dist = {}
        queue = deque()
        for v in sources:
            if v not in dist:
                dist[v] = 0
                queue.append(v)
        while queue:
            v = queue.popleft()
            yield v, dist[v]
            if dist[v] == radius:
                continue
            for _, w in self.neighbours(i, v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    if len(dist) > max_size:
                        raise ResourceError(f"ball in X_{i} exceeds {max_size} vertices", cap=max_size)
                    queue.append(w)

    def label_between(self, i: int, v, w):
        """The unique ``x`` with ``x * v = w``, or None."""
        if v[0] != w[0]:
            return None
        vw, ww = v[1], w[1]
        if len(ww) == len(vw) + 1 and ww[1:] == vw and ww[0][1] == 1:
            return ww[0][0]
        if len(vw) == len(ww) + 1 and vw[1:] == ww and vw[0][1] == -1:
            return vw[0][0]
        return None

    # -- sanity and export -----------------------------------------------------

    def check_freeness(self, i: int) -> dict:
        """Forest test on a materialised sort: edges = vertices - trees and no
        vertex carries the same letter twice."""
        verts = self.vertices(i)
        index = set(verts)
        edges = set()
        for v in verts:
            seen = set()
            for letter, w in self.neighbours(i, v):
                if letter in seen or w not in index:
                    return {"sort": i, "free": False, "vertex": v}
                seen.add(letter)
                edges.add(frozenset((v, w)))
        ok = len(edges) == len(verts) - self.trees[i]
        return {"sort": i, "free": ok, "vertices": len(verts), "edges": len(edges)}

    def describe(self) -> dict:
        return {"n": self.n, "labels": self.labels, "depth": self.depth[2:], "trees": self.trees[2:],
                "sizes": {f"X{i}": self.size(i) for i in range(1, self.n + 1)}}

    def to_structure(self, max_rows: int = 2_000_000):
        """Sorted structure with ternary ``act_i`` tables {(label, v, x*v)}."""
        from .structures import RelationSymbol, Structure, TableRelation

        elements = []
        sort_of = []
        for i in range(1, self.n + 1):
            for v in self.vertices(i):
                elements.append((i, v))
                sort_of.append(f"X{i}")
        index = {e: k for k, e in enumerate(elements)}
        rels = []
        for i in range(2, self.n + 1):
            rows = []
            for v in self.vertices(i):
                for x in self.generators(i):
                    w = self.act(i, x, v)
                    if w is not None:
                        rows.append((index[(i - 1, x)], index[(i, v)], index[(i, w)]))
                        if len(rows) > max_rows:
                            raise ResourceError("action table too large", cap=max_rows)
            rels.append(TableRelation(RelationSymbol(f"act{i}", 3, (f"X{i - 1}", f"X{i}", f"X{i}")), rows))
        s = Structure(len(elements), rels, sort_of=sort_of, meta={"family": "pseudoplane", **self.describe()})
        return s, index


def vertex_key(v):
    """Total order on vertices of one sort: root, word length, then word."""
    if isinstance(v, int):
        return (v,)
    root, word = v
    return (root, len(word), tuple((vertex_key(x), s) for x, s in word))


def build_fragment(n: int, labels: int, depth, **kw) -> SchreierFragment:
    return SchreierFragment(n, labels, depth, **kw)


# ---------------------------------------------------------------------------
# phi_n
# ---------------------------------------------------------------------------


@dataclass
class PhiEvaluation:
    value: bool
    truncated: bool = False
    labels: tuple | None = None


def _eval(level: int, f: SchreierFragment, t: tuple) -> PhiEvaluation:
    if level == 1:
        return PhiEvaluation(t[0] == t[1])
    half = len(t) // 2
    labels = []
    truncated = False
    for i in range(half):
        x = f.label_between(level, t[i], t[i + half])
        if x is None:
            # a missing edge is a genuine refutation unless the fragment was cut here
            truncated = truncated or len(t[i][1]) == f.depth[level]
            return PhiEvaluation(False, truncated)
        labels.append(x)
    inner = _eval(level - 1, f, tuple(labels))
    return PhiEvaluation(inner.value, inner.truncated, tuple(labels))


def eval_phi(n: int, f: SchreierFragment, t: Sequence, *, detail: bool = False):
    """phi_n on a 2^n-tuple of X_n.

    phi_1 is equality; phi_{m+1}(y) asks for labels x_i with
    ``y_{i+2^m} = x_i * y_i`` satisfying phi_m.  Such an x_i is unique when it
    exists and is read off the words directly.
    """
    if n < 1 or n > f.n:
        raise InputError(f"phi_{n} needs sort X_{n}, fragment has {f.n} sorts")
    t = tuple(t)
    if len(t) != 2**n:
        raise InputError(f"phi_{n} takes {2**n} arguments, got {len(t)}")
    for v in t:
        f.check_vertex(n, v)
    out = _eval(n, f, t)
    return out if detail else out.value


def eval_phi_bruteforce(n: int, f: SchreierFragment, t: Sequence) -> bool:
    """Oracle: scan every label of X_{n-1} for each coordinate."""
    t = tuple(t)
    if n == 1:
        return t[0] == t[1]
    half = len(t) // 2
    labels = []
    for i in range(half):
        hits = [x for x in f.generators(n) if f.act(n, x, t[i]) == t[i + half]]
        if len(hits) > 1:
            raise AssertionError(f"freeness violated: labels {hits} all move {t[i]} to {t[i + half]}")
        if not hits:
            return False
        labels.append(hits[0])
    return eval_phi_bruteforce(n - 1, f, tuple(labels))


# ---------------------------------------------------------------------------
# witnesses
# ---------------------------------------------------------------------------


@dataclass
class GoodeWitness:
    n: int
    a: tuple
    a_prime: tuple
    b: tuple
    b_prime: tuple
    lower: "GoodeWitness | None" = None
    radius: int | None = None

    def to_json(self) -> dict:
        return {"n": self.n, "a": encode_tuple(self.a), "a_prime": encode_tuple(self.a_prime),
                "b": encode_tuple(self.b), "b_prime": encode_tuple(self.b_prime), "radius": self.radius}


def encode_vertex(v):
    if isinstance(v, int):
        return v
    root, word = v
    return {"root": root, "word": [[encode_vertex(x), s] for x, s in word]}


def encode_tuple(t):
    return [encode_vertex(v) for v in t]


def build_goode_witness(n: int, f: SchreierFragment) -> GoodeWitness:
    """Tuples of X_{n+1} with phi_{n+1} true on ``b`` and false on ``b_prime``."""
    if n < 1:
        raise InputError("n must be at least 1")
    if f.n < n + 1:
        raise ResourceError(f"witness for n={n} needs {n + 1} sorts, fragment has {f.n}",
                            cap=f.n, required=n + 1)
    if f.labels < 2:
        raise ResourceError("witnesses need at least 2 labels in X_1", cap=f.labels, required=2)
    for i in range(2, n + 2):
        if f.trees[i] < 2 ** (i - 1):
            raise ResourceError(f"sort X_{i} needs {2 ** (i - 1)} orbits, fragment has {f.trees[i]}",
                                cap=f.trees[i], required=2 ** (i - 1))
        if f.depth[i] < 1:
            raise ResourceError(f"sort X_{i} needs depth at least 1", cap=f.depth[i], required=1)
    if n == 1:
        lower = None
        a, a_prime = (0, 0), (0, 1)
    else:
        lower = build_goode_witness(n - 1, f)
        a, a_prime = lower.b, lower.b_prime
    half = 2**n
    roots = tuple((r, ()) for r in range(half))
    b = roots + tuple(f.act(n + 1, a[i], roots[i]) for i in range(half))
    b_prime = roots + tuple(f.act(n + 1, a_prime[i], roots[i]) for i in range(half))
    w = GoodeWitness(n, a, a_prime, b, b_prime, lower)
    if not eval_phi(n + 1, f, b) or eval_phi(n + 1, f, b_prime):
        raise AssertionError("witness tuples do not separate phi")
    return w


# ---------------------------------------------------------------------------
# drop-one agreement
# ---------------------------------------------------------------------------


@dataclass
class Transport:
    """Result of moving a drop-one tuple onto its partner."""

    ok: bool
    radius: int
    mapping: dict = field(default_factory=dict)
    reason: str | None = None
    ball_sizes: list = field(default_factory=list)


def _transport(f: SchreierFragment, sort: int, src: tuple, dst: tuple, tau: dict, radius: int,
               max_size: int = DEFAULT_MAX_BALL) -> Transport:
    """Map the radius-``radius`` ball around ``src`` by ``u * o -> tau(u) * o'``.

    ``o`` is the first entry of ``src`` in each orbit and ``o'`` its partner in
    ``dst``.  The ball is a union of subtrees through the entries, so BFS from
    the origins inside it reaches every vertex, and the map preserves each
    labelled edge it crosses.  The largest radius at which the map is an
    injective, layer-preserving bijection onto the ball around ``dst`` that
    matches the entries is returned.
    """
    ball = dict(f.ball_from(src, sort, radius, max_size))
    target = dict(f.ball_from(dst, sort, radius, max_size))
    sigma: dict = {}
    image_of: dict = {}
    queue = deque()
    orbit_image: dict = {}
    for o, o2 in zip(src, dst):
        if o[0] in orbit_image:
            continue
        if o2[0] in orbit_image.values():
            return Transport(False, -1, reason=f"two orbits sent to orbit {o2[0]}")
        orbit_image[o[0]] = o2[0]
        sigma[o] = o2
        image_of[o2] = o
        queue.append(o)
    bad = radius + 1
    reason = None

    def fail(layer, why):
        nonlocal bad, reason
        if layer < bad:
            bad, reason = layer, why

    while queue:
        v = queue.popleft()
        if ball[v] == radius:
            # boundary: anything inside the ball is reached by a shorter path
            continue
        for (x, s), w in f.neighbours(sort, v):
            if w not in ball or w in sigma:
                continue
            w2 = f.act(sort, tau[x], sigma[v], s)
            if w2 is None:
                fail(ball[w], "image leaves the fragment")
                continue
            if w2 in image_of:
                fail(ball[w], "map is not injective")
                continue
            sigma[w] = w2
            image_of[w2] = w
            queue.append(w)
    for o, o2 in zip(src, dst):
        if sigma.get(o) != o2:
            return Transport(False, -1, reason="an entry is not sent to its partner")
    for v, d in ball.items():
        if v in sigma and target.get(sigma[v]) != d:
            fail(d, "distances to the entries are not preserved")
    sizes = [0] * (radius + 1)
    tsizes = [0] * (radius + 1)
    for d in ball.values():
        sizes[d] += 1
    for d in target.values():
        tsizes[d] += 1
    for d in range(radius + 1):
        if sizes[d] != tsizes[d]:
            fail(d, "balls have different sizes")
            break
    achieved = bad - 1
    if achieved < 0:
        return Transport(False, -1, reason=reason)
    mapping = {v: sigma[v] for v, d in ball.items() if d <= achieved}
    return Transport(achieved == radius, achieved, mapping, reason, sizes[: achieved + 1])


def _complete_bijection(partial: dict, domain: list, codomain: list) -> dict:
    """Extend an injective partial map to a bijection, leftovers in sorted order."""
    used = set(partial.values())
    rest_src = [v for v in domain if v not in partial]
    rest_dst = [v for v in codomain if v not in used]
    out = dict(partial)
    out.update(zip(rest_src, rest_dst))
    return out


def _base_label_map(f: SchreierFragment, a, a_prime, i: int) -> dict | None:
    partial = {}
    for pos, (x, y) in enumerate(zip(a, a_prime)):
        if pos == i:
            continue
        if partial.get(x, y) != y:
            return None
        partial[x] = y
    if len(set(partial.values())) != len(partial):
        return None
    return _complete_bijection(partial, f.vertices(1), f.vertices(1))


def label_map(w: GoodeWitness, f: SchreierFragment, i: int) -> dict | None:
    """A bijection of X_n sending ``a`` to ``a_prime`` off position ``i``."""
    if w.n == 1:
        return _base_label_map(f, w.a, w.a_prime, i)
    lower = w.lower
    half = 2 ** lower.n
    tau = label_map(lower, f, i % half)
    if tau is None:
        return None
    src = tuple(v for p, v in enumerate(lower.b) if p != i)
    dst = tuple(v for p, v in enumerate(lower.b_prime) if p != i)
    moved = _transport_whole(f, lower.n + 1, src, dst, tau)
    if moved is None:
        return None
    verts = f.vertices(lower.n + 1)
    return _complete_bijection(moved, verts, verts)


def _transport_whole(f, sort, src, dst, tau) -> dict | None:
    """Transport over the whole orbits of ``src``, dropping images that leave
    the fragment; None if the entries are not matched."""
    sigma = {}
    used = set()
    queue = deque()
    seen_root = {}
    for o, o2 in zip(src, dst):
        if o[0] in seen_root:
            continue
        seen_root[o[0]] = o2[0]
        sigma[o] = o2
        used.add(o2)
        queue.append(o)
    visited = set(sigma)
    while queue:
        v = queue.popleft()
        for (x, s), w in f.neighbours(sort, v):
            if w in visited:
                continue
            visited.add(w)
            w2 = f.act(sort, tau[x], sigma[v], s)
            if w2 is None or w2 in used:
                continue
            sigma[w] = w2
            used.add(w2)
            queue.append(w)
    if any(sigma.get(o) != o2 for o, o2 in zip(src, dst)):
        return None
    return sigma


@dataclass
class AgreementReport:
    n: int
    requested_radius: int
    per_drop: list
    ok: bool
    max_radius: int

    def to_json(self) -> dict:
        return {"n": self.n, "requested_radius": self.requested_radius, "ok": self.ok,
                "max_radius": self.max_radius, "per_drop": self.per_drop}


def ball_size_bound(f: SchreierFragment, sort: int, centres: int, radius: int) -> int:
    """Upper bound on the vertices within ``radius`` of ``centres`` vertices."""
    deg = f.degree(sort)
    per = 1 + sum(deg * (deg - 1) ** (d - 1) for d in range(1, radius + 1))
    return centres * per


def check_drop_one_agreement(w: GoodeWitness, f: SchreierFragment, radius: int, *,
                             tables: bool = False, max_ball: int = DEFAULT_MAX_AGREEMENT_BALL) -> AgreementReport:
    """For each drop index j, move ``b`` minus ``b_j`` onto ``b_prime`` minus
    ``b_prime_j`` by a labelled ball isomorphism of the given radius."""
    sort = w.n + 1
    if radius < 0:
        raise InputError("radius must be non-negative")
    if radius > f.depth[sort]:
        raise InputError(f"radius {radius} exceeds the fragment depth {f.depth[sort]} of X_{sort}")
    bound = ball_size_bound(f, sort, len(w.b), radius)
    if bound > max_ball:
        raise ResourceError(f"balls of radius {radius} in X_{sort} may hold {bound} vertices, above {max_ball}",
                            cap=max_ball, required=bound)
    half = 2**w.n
    per_drop = []
    for j in range(2 * half):
        i = j % half
        tau = label_map(w, f, i)
        entry = {"drop": j, "label_index": i}
        if tau is None:
            entry.update(ok=False, radius=-1, reason="no label bijection at the level below")
            per_drop.append(entry)
            continue
        src = tuple(v for p, v in enumerate(w.b) if p != j)
        dst = tuple(v for p, v in enumerate(w.b_prime) if p != j)
        moved = _transport(f, sort, src, dst, tau, radius)
        entry.update(ok=moved.ok and moved.radius >= radius, radius=moved.radius, reason=moved.reason,
                     ball_sizes=moved.ball_sizes)
        entry["moved_labels"] = sorted(
            ([encode_vertex(x), encode_vertex(y)] for x, y in tau.items() if x != y), key=repr)
        if tables:
            entry["table"] = [[encode_vertex(v), encode_vertex(u)] for v, u in
                              sorted(moved.mapping.items(), key=lambda kv: vertex_key(kv[0]))]
        per_drop.append(entry)
    ok = all(e["ok"] for e in per_drop)
    achieved = min(e["radius"] for e in per_drop)
    w.radius = achieved if achieved >= 0 else None
    return AgreementReport(w.n, radius, per_drop, ok, achieved)
