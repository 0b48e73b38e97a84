"""Finite relational structures, quantifier-free types and partial isomorphisms.

A :class:`Structure` is a finite universe ``0..n-1`` with named relations.
Relations come in three storage flavours:

* :class:`TableRelation` -- an explicit set of rows.  Relations closed under
  coordinate permutations are stored once per multiset of entries.
* :class:`PredicateRelation` -- membership decided by a function.  Used where
  the table would be astronomically large (Johnson structures) but the
  relation is still exact.
* :class:`PartitionFamily` -- an open family of same-arity relations that
  partition all tuples, each tuple carrying the name of the one relation it
  belongs to (orbit relations of a group action).

Quantifier-free types are computed over *class maps*: a tuple is first cut
into equality classes, and every atom ``R(t o f)`` with ``f: [r] -> [l]`` is
recorded through the map ``g: [r] -> classes`` it factors through.  That is
the same information as one bit per ``f``, without the ``l**r`` blow-up.
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

from ._util import canonical_json, map_count, multiset_permutations, restricted_growth, sha256_hex
from .errors import InputError, ResourceError

DEFAULT_MAX_ROWS = 2_000_000


# --------------------------------------------------------------------------
# signatures and relations
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class RelationSymbol:
    name: str
    arity: int
    sorts: tuple[str, ...] | None = None

    def __post_init__(self):
        if not isinstance(self.arity, int) or self.arity < 1:
            raise InputError(f"relation {self.name!r}: arity must be a positive integer")
        if self.sorts is not None and len(self.sorts) != self.arity:
            raise InputError(f"relation {self.name!r}: {len(self.sorts)} sorts for arity {self.arity}")

    def to_json(self) -> dict:
        out = {"name": self.name, "arity": self.arity}
        if self.sorts is not None:
            out["sorts"] = list(self.sorts)
        return out


class Signature:
    """Relation symbols in canonical (name) order."""

    def __init__(self, symbols: Iterable[RelationSymbol]):
        symbols = sorted(symbols, key=lambda s: s.name)
        names = [s.name for s in symbols]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate relation names in signature: {names}")
        self.symbols: tuple[RelationSymbol, ...] = tuple(symbols)
        self._by_name = {s.name: s for s in self.symbols}

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, name: str) -> RelationSymbol:
        return self._by_name[name]

    def __contains__(self, name):
        return name in self._by_name

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._by_name)

    @property
    def max_arity(self) -> int:
        return max((s.arity for s in self.symbols), default=0)

    def to_json(self) -> list:
        return [s.to_json() for s in self.symbols]

    def __eq__(self, other):
        return isinstance(other, Signature) and self.symbols == other.symbols

    def __repr__(self):
        return f"Signature({', '.join(f'{s.name}/{s.arity}' for s in self.symbols)})"


class Relation:
    """Common interface.  ``symmetric`` means closed under coordinate
    permutations; ``injective`` means no member has a repeated entry."""

    symbol: RelationSymbol
    symmetric: bool = False
    injective: bool = False
    set_like: bool = False

    @property
    def name(self) -> str:
        return self.symbol.name

    @property
    def arity(self) -> int:
        return self.symbol.arity

    def holds(self, row: tuple) -> bool:
        raise NotImplementedError

    def __contains__(self, row) -> bool:
        return self.holds(tuple(row))

    def iter_rows(self, universe: int, max_rows: int = DEFAULT_MAX_ROWS) -> Iterator[tuple]:
        raise NotImplementedError

    def content_digest(self) -> str:
        raise NotImplementedError

    # row-scan hooks; table relations override
    def scan_cost(self, values) -> int | None:
        return None

    def scan(self, cls: dict) -> set:
        raise NotImplementedError


class TableRelation(Relation):
    """Explicit relation table.

    ``rows`` are exact tuples unless ``closed=True``, in which case each row
    stands for all of its orderings and is stored as a sorted key.  Symmetry
    of exact tables is detected, so both constructions of the same relation
    compare and hash identically.
    """

    def __init__(self, symbol: RelationSymbol, rows: Iterable[Sequence[int]], *, closed: bool = False):
        self.symbol = symbol
        r = symbol.arity
        if closed:
            keys = {tuple(sorted(row)) for row in rows}
            for k in keys:
                if len(k) != r:
                    raise InputError(f"relation {symbol.name!r}: row {k} has wrong length")
            self.symmetric = True
            self._store = frozenset(keys)
        else:
            rows = {tuple(row) for row in rows}
            for row in rows:
                if len(row) != r:
                    raise InputError(f"relation {symbol.name!r}: row {row} has wrong length")
            groups: dict[tuple, int] = defaultdict(int)
            for row in rows:
                groups[tuple(sorted(row))] += 1
            self.symmetric = r > 1 and all(multiset_permutations(k) == c for k, c in groups.items())
            if r == 1:
                self.symmetric = True
            self._store = frozenset(groups) if self.symmetric else frozenset(rows)
        self.injective = all(len(set(k)) == len(k) for k in self._store)
        self._index: dict[int, list[tuple]] | None = None

    def holds(self, row: tuple) -> bool:
        if self.symmetric:
            return tuple(sorted(row)) in self._store
        return row in self._store

    @property
    def stored(self) -> frozenset:
        """Sorted keys for symmetric relations, exact rows otherwise."""
        return self._store

    def row_count(self) -> int:
        if self.symmetric:
            return sum(multiset_permutations(k) for k in self._store)
        return len(self._store)

    def iter_rows(self, universe: int = 0, max_rows: int = DEFAULT_MAX_ROWS) -> Iterator[tuple]:
        if self.row_count() > max_rows:
            raise ResourceError(
                f"relation {self.name!r} has {self.row_count()} rows, above the cap of {max_rows}",
                cap=max_rows, required=self.row_count())
        if not self.symmetric:
            yield from sorted(self._store)
            return
        rows = set()
        for k in self._store:
            rows.update(itertools.permutations(k))
        yield from sorted(rows)

    def content_digest(self) -> str:
        return sha256_hex(["table", self.symbol.to_json(), self.symmetric, sorted(self._store)])

    def _build_index(self):
        index: dict[int, list[tuple]] = defaultdict(list)
        for k in self._store:
            for v in set(k):
                index[v].append(k)
        self._index = dict(index)

    def scan_cost(self, values) -> int:
        if self._index is None:
            self._build_index()
        return sum(len(self._index.get(v, ())) for v in values)

    def scan(self, cls: dict) -> set:
        """Class maps g with ``t o g`` in the table, for the classes ``cls``."""
        out = set()
        seen = set()
        for v in cls:
            for k in self._index.get(v, ()):
                if k in seen:
                    continue
                seen.add(k)
                if all(x in cls for x in k):
                    g = tuple(cls[x] for x in k)
                    out.add(tuple(sorted(g)) if self.symmetric else g)
        return out


class PredicateRelation(Relation):
    """Relation decided by ``predicate(row) -> bool``.

    The caller declares the closure flags; they are trusted by the type
    computation, and tests check them against materialised tables on small
    instances.  ``set_like`` means membership depends only on the set of
    entries.  ``describe`` must identify the relation for hashing.
    """

    def __init__(self, symbol: RelationSymbol, predicate: Callable[[tuple], bool], *,
                 describe, symmetric=False, injective=False, set_like=False):
        self.symbol = symbol
        self.predicate = predicate
        self.symmetric = symmetric or set_like
        self.injective = injective
        self.set_like = set_like
        self.describe = describe

    def holds(self, row: tuple) -> bool:
        return bool(self.predicate(row))

    def iter_rows(self, universe: int, max_rows: int = DEFAULT_MAX_ROWS) -> Iterator[tuple]:
        total = universe**self.arity
        if total > max_rows:
            raise ResourceError(
                f"relation {self.name!r}: enumerating {total} candidate rows exceeds the cap of {max_rows}",
                cap=max_rows, required=total)
        for row in itertools.product(range(universe), repeat=self.arity):
            if self.predicate(row):
                yield row

    def content_digest(self) -> str:
        return sha256_hex(["predicate", self.symbol.to_json(), self.describe])


class PartitionFamily:
    """Same-arity relations partitioning all ``arity``-tuples.

    ``label(row)`` names the unique member relation containing ``row``; the
    relation's full name is ``prefix + label``.  The inventory of labels is
    open-ended, so the family appears in the signature as a single entry.
    """

    def __init__(self, prefix: str, arity: int, label: Callable[[tuple], str], *, describe):
        if arity < 1:
            raise InputError("partition family arity must be positive")
        self.prefix = prefix
        self.arity = arity
        self.label = label
        self.describe = describe

    def relation_name(self, row: tuple) -> str:
        return self.prefix + self.label(row)

    def content_digest(self) -> str:
        return sha256_hex(["family", self.prefix, self.arity, self.describe])

    def iter_tables(self, universe: int, max_rows: int = DEFAULT_MAX_ROWS) -> dict[str, list[tuple]]:
        total = universe**self.arity
        if total > max_rows:
            raise ResourceError(
                f"family {self.prefix!r}: {total} tuples exceed the cap of {max_rows}",
                cap=max_rows, required=total)
        tables: dict[str, list[tuple]] = defaultdict(list)
        for row in itertools.product(range(universe), repeat=self.arity):
            tables[self.relation_name(row)].append(row)
        return dict(tables)


# --------------------------------------------------------------------------
# structures
# --------------------------------------------------------------------------


class Structure:
    """Immutable finite relational structure on the universe ``0..universe-1``."""

    def __init__(self, universe: int, relations: Iterable[Relation] = (), *,
                 sort_of: Sequence[str] | None = None, families: Iterable[PartitionFamily] = (),
                 meta: dict | None = None, validate: bool = True):
        if not isinstance(universe, int) or universe < 0:
            raise InputError("universe size must be a non-negative integer")
        self.universe = universe
        relations = list(relations)
        self.signature = Signature(r.symbol for r in relations)
        self.relations: dict[str, Relation] = {r.name: r for r in sorted(relations, key=lambda r: r.name)}
        self.families: tuple[PartitionFamily, ...] = tuple(sorted(families, key=lambda f: f.prefix))
        for fam in self.families:
            for name in self.signature.names:
                if name.startswith(fam.prefix):
                    raise InputError(f"relation {name!r} collides with family prefix {fam.prefix!r}")
        if sort_of is not None:
            sort_of = tuple(sort_of)
            if len(sort_of) != universe:
                raise InputError(f"sort_of has {len(sort_of)} entries for a universe of {universe}")
        self.sort_of: tuple[str, ...] | None = sort_of
        self.meta = dict(meta or {})
        self._type_cache: dict = {}
        self._gaifman: dict[int, frozenset] = {}
        if validate:
            self._validate()

    def _validate(self):
        n = self.universe
        for rel in self.relations.values():
            if not isinstance(rel, TableRelation):
                continue
            sorts = rel.symbol.sorts
            for row in rel.stored:
                for pos, v in enumerate(row):
                    if not (isinstance(v, int) and 0 <= v < n):
                        raise InputError(f"relation {rel.name!r}: element {v} outside universe of size {n}")
                    if sorts is not None and not rel.symmetric and self.sort(v) != sorts[pos]:
                        raise InputError(f"relation {rel.name!r}: element {v} at position {pos} has "
                                         f"sort {self.sort(v)!r}, expected {sorts[pos]!r}")
                if sorts is not None and rel.symmetric and any(self.sort(v) != sorts[0] for v in row):
                    raise InputError(f"relation {rel.name!r}: symmetric relation with mixed sorts")

    # -- basics -----------------------------------------------------------

    @property
    def max_arity(self) -> int:
        return max([self.signature.max_arity] + [f.arity for f in self.families])

    def sort(self, e: int) -> str | None:
        return None if self.sort_of is None else self.sort_of[e]

    def check_tuple(self, t: Sequence[int], sorts: Sequence[str] | None = None) -> tuple:
        t = tuple(t)
        for pos, e in enumerate(t):
            if not isinstance(e, int) or isinstance(e, bool) or not 0 <= e < self.universe:
                raise InputError(f"element {e!r} at position {pos} is outside the universe 0..{self.universe - 1}")
            if sorts is not None and self.sort(e) != sorts[pos]:
                raise InputError(f"element {e} at position {pos} has sort {self.sort(e)!r}, expected {sorts[pos]!r}")
        return t

    def type_cache_key(self, t: tuple):
        """Key with ``key(t1) == key(t2)`` implying equal qf-types, or None.

        Subclasses with a known transitive group action override this.
        """
        return None

    def all_relation_names(self, max_rows: int = DEFAULT_MAX_ROWS) -> list[str]:
        names = list(self.signature.names)
        for fam in self.families:
            names.extend(fam.iter_tables(self.universe, max_rows))
        return sorted(names)

    @cached_property
    def digest(self) -> str:
        return sha256_hex({
            "universe": self.universe,
            "sort_of": list(self.sort_of) if self.sort_of is not None else None,
            "relations": {name: rel.content_digest() for name, rel in self.relations.items()},
            "families": [f.content_digest() for f in self.families],
        })

    def __repr__(self):
        fams = "".join(f", {f.prefix}*/{f.arity}" for f in self.families)
        return f"Structure(universe={self.universe}, {self.signature!r}{fams})"

    # -- Gaifman graph ----------------------------------------------------

    def gaifman_neighbours(self, e: int, max_rows: int = DEFAULT_MAX_ROWS) -> frozenset:
        if e in self._gaifman:
            return self._gaifman[e]
        if self.families:
            nb = frozenset(range(self.universe)) - {e}
        else:
            nb = set()
            for rel in self.relations.values():
                if isinstance(rel, TableRelation):
                    if rel._index is None:
                        rel._build_index()
                    for row in rel._index.get(e, ()):
                        nb.update(row)
                else:
                    r = rel.arity
                    if self.universe ** (r - 1) * r > max_rows:
                        raise ResourceError(f"Gaifman neighbourhood of {e} in {rel.name!r} is too expensive",
                                            cap=max_rows)
                    for pos in range(r):
                        for rest in itertools.product(range(self.universe), repeat=r - 1):
                            row = rest[:pos] + (e,) + rest[pos:]
                            if rel.holds(row):
                                nb.update(row)
            nb.discard(e)
            nb = frozenset(nb)
        self._gaifman[e] = nb
        return nb

    def ball(self, centre: Iterable[int], radius: int) -> list[list[int]]:
        """BFS layers of the Gaifman ball; layer 0 is the sorted centre."""
        layer = sorted(set(centre))
        seen = set(layer)
        layers = [layer]
        for _ in range(radius):
            nxt = set()
            for e in layer:
                nxt.update(self.gaifman_neighbours(e))
            nxt -= seen
            if not nxt:
                break
            layer = sorted(nxt)
            seen.update(layer)
            layers.append(layer)
        return layers

    # -- serialisation ----------------------------------------------------

    def to_json(self, max_rows: int = DEFAULT_MAX_ROWS) -> dict:
        sig = self.signature.to_json()
        tables = {name: [list(r) for r in rel.iter_rows(self.universe, max_rows)]
                  for name, rel in self.relations.items()}
        for fam in self.families:
            for name, rows in sorted(fam.iter_tables(self.universe, max_rows).items()):
                sig.append({"name": name, "arity": fam.arity})
                tables[name] = [list(r) for r in sorted(rows)]
        sig.sort(key=lambda s: s["name"])
        out = {"signature": sig, "universe": self.universe, "relations": tables}
        if self.sort_of is not None:
            out["sort_of"] = list(self.sort_of)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Structure":
        try:
            universe = data["universe"]
            sig = data["signature"]
            tables = data.get("relations", {})
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed structure JSON: missing {exc}") from None
        rels = []
        for entry in sig:
            sym = RelationSymbol(entry["name"], entry["arity"], tuple(entry["sorts"]) if entry.get("sorts") else None)
            rows = tables.get(sym.name, [])
            rels.append(TableRelation(sym, (tuple(r) for r in rows)))
        unknown = set(tables) - {e["name"] for e in sig}
        if unknown:
            raise InputError(f"relations without signature entries: {sorted(unknown)}")
        return cls(universe, rels, sort_of=data.get("sort_of"))

    def dump(self, path, max_rows: int = DEFAULT_MAX_ROWS):
        Path(path).write_text(canonical_json(self.to_json(max_rows)) + "\n")

    @classmethod
    def load(cls, path) -> "Structure":
        try:
            text = Path(path).read_text()
        except FileNotFoundError:
            raise InputError(f"structure file not found: {path}") from None
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from None


# --------------------------------------------------------------------------
# quantifier-free types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class QfType:
    """Canonical quantifier-free type of a tuple.

    ``classes[p]`` is the equality class of position ``p`` (numbered by first
    occurrence).  ``atoms`` lists the true atoms as ``(relation, g)`` with
    ``g`` a map from argument places to classes; for relations closed under
    coordinate permutations only non-decreasing ``g`` are listed, the rest
    following by symmetry.
    """

    arity: int
    sorts: tuple
    classes: tuple[int, ...]
    atoms: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def equality_pattern(self) -> tuple[tuple[int, ...], ...]:
        parts: dict[int, list[int]] = defaultdict(list)
        for pos, c in enumerate(self.classes):
            parts[c].append(pos)
        return tuple(tuple(parts[c]) for c in sorted(parts))

    def to_json(self) -> dict:
        return {"arity": self.arity, "sorts": list(self.sorts), "classes": list(self.classes),
                "atoms": [[name, list(g)] for name, g in self.atoms]}

    @cached_property
    def digest(self) -> str:
        return sha256_hex(self.to_json())

    def listing(self) -> list[str]:
        """Human-readable atoms, naming each class by its first position."""
        first = [p for _, p in sorted({c: p for p, c in reversed(list(enumerate(self.classes)))}.items())]
        lines = []
        for part in self.equality_pattern:
            if len(part) > 1:
                lines.append(" = ".join(f"x{p}" for p in part))
        for name, g in self.atoms:
            lines.append(f"{name}({', '.join(f'x{first[c]}' for c in g)})")
        return lines


def _class_maps(rel: Relation, d: int, allowed: list[list[int]] | None) -> Iterator[tuple]:
    r = rel.arity
    if allowed is not None:
        gen = itertools.product(*allowed)
        for g in gen:
            if rel.injective and len(set(g)) < r:
                continue
            if rel.symmetric and list(g) != sorted(g):
                continue
            yield g
        return
    if rel.symmetric:
        yield from (itertools.combinations(range(d), r) if rel.injective
                    else itertools.combinations_with_replacement(range(d), r))
    else:
        yield from (itertools.permutations(range(d), r) if rel.injective
                    else itertools.product(range(d), repeat=r))


def _relation_atoms(s: Structure, rel: Relation, reps: tuple, class_sorts: tuple | None) -> list[tuple]:
    d, r = len(reps), rel.arity
    if rel.injective and d < r:
        return []
    allowed = None
    if rel.symbol.sorts is not None and class_sorts is not None:
        allowed = [[c for c in range(d) if class_sorts[c] == srt] for srt in rel.symbol.sorts]
        if any(not a for a in allowed):
            return []
    enum_cost = map_count(d, r, rel.symmetric, rel.injective)
    scan_cost = rel.scan_cost(reps)
    if scan_cost is not None and scan_cost < enum_cost:
        cls = {v: i for i, v in enumerate(reps)}
        return sorted(rel.scan(cls))
    out = []
    if rel.set_like:
        memo: dict[frozenset, bool] = {}
        for g in _class_maps(rel, d, allowed):
            key = frozenset(g)
            if key not in memo:
                memo[key] = rel.holds(tuple(reps[c] for c in g))
            if memo[key]:
                out.append(g)
    else:
        for g in _class_maps(rel, d, allowed):
            if rel.holds(tuple(reps[c] for c in g)):
                out.append(g)
    return out


def qf_type(s: Structure, t: Sequence[int]) -> QfType:
    """Canonical qf-type of ``t`` in ``s``."""
    t = s.check_tuple(t)
    key = s.type_cache_key(t)
    if key is not None and key in s._type_cache:
        return s._type_cache[key]
    classes, reps = restricted_growth(t)
    d = len(reps)
    sorts = tuple(s.sort(e) for e in t) if s.sort_of is not None else ()
    class_sorts = tuple(s.sort(v) for v in reps) if s.sort_of is not None else None
    atoms: list[tuple[str, tuple]] = []
    for name, rel in s.relations.items():
        atoms.extend((name, tuple(g)) for g in _relation_atoms(s, rel, reps, class_sorts))
    for fam in s.families:
        for g in itertools.product(range(d), repeat=fam.arity):
            atoms.append((fam.relation_name(tuple(reps[c] for c in g)), g))
    atoms.sort()
    out = QfType(len(t), sorts, classes, tuple(atoms))
    if key is not None:
        s._type_cache[key] = out
    return out


# --------------------------------------------------------------------------
# profiles
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Mode:
    """Which index sets a profile records: ``drop_one`` or ``up_to_k``."""

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in ("drop_one", "up_to_k"):
            raise InputError(f"unknown profile mode {self.kind!r}")
        if self.kind == "up_to_k" and (self.k is None or self.k < 0):
            raise InputError("up_to_k mode needs a non-negative k")

    @classmethod
    def parse(cls, text) -> "Mode":
        if isinstance(text, Mode):
            return text
        text = str(text).replace("-", "_")
        if text == "drop_one":
            return cls("drop_one")
        if text.startswith("up_to_"):
            try:
                return cls("up_to_k", int(text[len("up_to_"):]))
            except ValueError:
                pass
        raise InputError(f"cannot parse profile mode {text!r} (use drop-one or up-to-K)")

    def index_sets(self, length: int) -> list[tuple[int, ...]]:
        if self.kind == "drop_one":
            return sorted(tuple(i for i in range(length) if i != j) for j in range(length))
        if self.k > length:
            raise InputError(f"profile bound k={self.k} exceeds tuple length {length}")
        return sorted(I for size in range(self.k + 1) for I in itertools.combinations(range(length), size))

    def __str__(self):
        return "drop-one" if self.kind == "drop_one" else f"up-to-{self.k}"


DROP_ONE = Mode("drop_one")


def up_to_k(k: int) -> Mode:
    return Mode("up_to_k", k)


@dataclass(frozen=True)
class SubtypeProfile:
    arity: int
    mode: Mode
    entries: tuple[tuple[tuple[int, ...], QfType], ...]

    @property
    def bound(self) -> int:
        return self.arity - 1 if self.mode.kind == "drop_one" else self.mode.k

    def as_dict(self) -> dict:
        return dict(self.entries)

    @cached_property
    def digest(self) -> str:
        return sha256_hex([self.arity, str(self.mode), [[list(I), q.digest] for I, q in self.entries]])


def subtype_profile(s: Structure, t: Sequence[int], mode=DROP_ONE) -> SubtypeProfile:
    t = s.check_tuple(t)
    mode = Mode.parse(mode)
    entries = tuple((I, qf_type(s, tuple(t[i] for i in I))) for I in mode.index_sets(len(t)))
    return SubtypeProfile(len(t), mode, entries)


# --------------------------------------------------------------------------
# indiscernibility
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Indiscernibility:
    ok: bool
    counterexample: tuple[int, tuple[int, ...], tuple[int, ...]] | None = None
    checked_up_to: int = 0

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        ce = None
        if self.counterexample is not None:
            m, a, b = self.counterexample
            ce = {"m": m, "first": list(a), "second": list(b)}
        return {"indiscernible": self.ok, "counterexample": ce, "checked_up_to": self.checked_up_to}


def _flatten(seq, idx, over):
    out = []
    for i in idx:
        out.extend(seq[i])
    out.extend(over)
    return tuple(out)


def is_qf_indiscernible(s: Structure, seq: Sequence, over: Sequence[int] = (), *,
                        max_m: int | None = None) -> Indiscernibility:
    """Do all increasing m-subsequences (joined with ``over``) share a qf-type?

    Entries may be elements or tuples.  An atom mentions at most ``max_arity``
    coordinates and an equality two, so subsequences longer than
    ``max(2, max_arity)`` cannot disagree unless a shorter one already does;
    the search stops there unless ``max_m`` says otherwise.  The reported
    counterexample is the least pair in (m, first, second) order.
    """
    seq = [tuple(x) if isinstance(x, (tuple, list)) else (x,) for x in seq]
    if len(seq) < 2:
        raise InputError("indiscernibility needs a sequence of length at least 2")
    widths = {len(x) for x in seq}
    if len(widths) != 1:
        raise InputError(f"ragged sequence: entry lengths {sorted(widths)}")
    over = s.check_tuple(over)
    for x in seq:
        s.check_tuple(x)
    top = len(seq) if max_m is None else min(max_m, len(seq))
    if max_m is None:
        top = min(top, max(2, s.max_arity))
    for m in range(1, top + 1):
        combos = itertools.combinations(range(len(seq)), m)
        first = next(combos)
        ref = qf_type(s, _flatten(seq, first, over)).digest
        for idx in combos:
            if qf_type(s, _flatten(seq, idx, over)).digest != ref:
                return Indiscernibility(False, (m, first, idx), m)
    return Indiscernibility(True, None, top)


# --------------------------------------------------------------------------
# partial isomorphisms
# --------------------------------------------------------------------------


def _atoms_agree(s: Structure, src: list, dst: list) -> bool:
    """Do src and dst agree on every atom that mentions their last entry?"""
    m = len(src)
    last = m - 1
    for rel in s.relations.values():
        for g in itertools.product(range(m), repeat=rel.arity):
            if last not in g:
                continue
            if rel.holds(tuple(src[i] for i in g)) != rel.holds(tuple(dst[i] for i in g)):
                return False
    for fam in s.families:
        for g in itertools.product(range(m), repeat=fam.arity):
            if last not in g:
                continue
            if fam.relation_name(tuple(src[i] for i in g)) != fam.relation_name(tuple(dst[i] for i in g)):
                return False
    return True


def find_partial_iso(s: Structure, src: Sequence[int], dst: Sequence[int], radius: int) -> dict[int, int] | None:
    """Bijection of radius-``radius`` Gaifman balls extending ``src -> dst``.

    The map preserves every relation in both directions, sorts, and the
    distance of each element from the centre tuple.  Candidates are tried in
    increasing order, so the answer is deterministic.
    """
    src, dst = s.check_tuple(src), s.check_tuple(dst)
    if len(src) != len(dst):
        raise InputError("src and dst must have the same length")
    if radius < 0:
        raise InputError("radius must be non-negative")
    fixed: dict[int, int] = {}
    for a, b in zip(src, dst):
        if fixed.get(a, b) != b:
            return None
        fixed[a] = b
    if len(set(fixed.values())) != len(fixed):
        return None
    src_layers = s.ball(src, radius)
    dst_layers = s.ball(dst, radius)
    if [len(L) for L in src_layers] != [len(L) for L in dst_layers]:
        return None
    # centre first, in tuple order, then the outer layers
    order = list(dict.fromkeys(src))
    depth = {e: 0 for e in order}
    for d, layer in enumerate(src_layers[1:], start=1):
        for e in layer:
            order.append(e)
            depth[e] = d
    dst_depth = {e: d for d, layer in enumerate(dst_layers) for e in layer}

    dom: list[int] = []
    img: list[int] = []
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        e = order[i]
        cands = [fixed[e]] if e in fixed else [
            c for c in dst_layers[depth[e]] if c not in used and dst_depth[c] == depth[e]]
        for c in cands:
            if c in used or s.sort(c) != s.sort(e):
                continue
            dom.append(e)
            img.append(c)
            if _atoms_agree(s, dom, img):
                used.add(c)
                if extend(i + 1):
                    return True
                used.discard(c)
            dom.pop()
            img.pop()
        return False

    if not extend(0):
        return None
    mapping = dict(zip(dom, img))
    if qf_type(s, src).digest != qf_type(s, dst).digest:
        raise AssertionError("partial isomorphism found between tuples of different qf-type")
    return mapping
