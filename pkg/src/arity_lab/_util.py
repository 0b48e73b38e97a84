from __future__ import annotations

import hashlib
import json
from math import comb, factorial, perm


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def sha256_hex(obj) -> str:
    if not isinstance(obj, (bytes, str)):
        obj = canonical_json(obj)
    if isinstance(obj, str):
        obj = obj.encode()
    return hashlib.sha256(obj).hexdigest()


def multiset_permutations(key: tuple) -> int:
    """Number of distinct orderings of the multiset ``key``."""
    n = factorial(len(key))
    run = 1
    for a, b in zip(key, key[1:]):
        if a == b:
            run += 1
        else:
            n //= factorial(run)
            run = 1
    return n // factorial(run)


def map_count(d: int, r: int, symmetric: bool, injective: bool) -> int:
    """How many class maps [r] -> [d] the qf-type enumerator visits."""
    if symmetric:
        return comb(d, r) if injective else comb(d + r - 1, r)
    return perm(d, r) if injective else d**r


def restricted_growth(t) -> tuple[tuple[int, ...], tuple]:
    """Class index per position (first-occurrence numbering) and class representatives."""
    seen: dict = {}
    classes = []
    for v in t:
        if v not in seen:
            seen[v] = len(seen)
        classes.append(seen[v])
    return tuple(classes), tuple(seen)
