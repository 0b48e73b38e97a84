"""Quantifier-free, finite analogues of the (strong) distality arguments.

Everything here works with qf-indiscernibility of finite sequences; nothing
is claimed about indiscernibility in the elementary sense.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import perm

from .errors import InputError
from .generators.hypergraph import KayGraphPair, gen_hypergraph, parity_reduct
from .structures import Structure, is_qf_indiscernible

SCOPE = ("All indiscernibility below is quantifier-free indiscernibility of finite sequences "
         "in a finite structure.")
EXHAUSTIVE_THRESHOLD = 20_000


# ---------------------------------------------------------------------------
# the parity identity
# ---------------------------------------------------------------------------


def verify_parity_identity(kg: KayGraphPair, samples: int = 10_000, seed: int = 0,
                           mode: str = "auto") -> dict:
    """R(x,b) + R(y,b) = sum_i R(x,y,b minus b_i)  (mod 2) on distinct tuples.

    ``mode`` is ``exhaustive``, ``sampled`` or ``auto`` (exhaustive when the
    number of ordered distinct tuples is below a threshold).
    """
    k, n = kg.k, kg.reduct.universe
    if n < k + 2:
        raise InputError(f"the identity needs k+2 = {k + 2} distinct vertices, universe has {n}")
    R = kg.R
    space = perm(n, k + 2)
    if mode == "auto":
        mode = "exhaustive" if space <= EXHAUSTIVE_THRESHOLD else "sampled"
    if mode == "exhaustive":
        tuples = itertools.permutations(range(n), k + 2)
        checked = space
    elif mode == "sampled":
        if samples < 0:
            raise InputError("samples must be non-negative")
        rng = random.Random(seed)
        tuples = (tuple(rng.sample(range(n), k + 2)) for _ in range(samples))
        checked = samples
    else:
        raise InputError(f"unknown mode {mode!r}")
    stored = R.stored
    violations = []
    for t in tuples:
        x, y, b = t[0], t[1], t[2:]
        lhs = (tuple(sorted((x,) + b)) in stored) + (tuple(sorted((y,) + b)) in stored)
        rhs = 0
        for i in range(k):
            rhs += tuple(sorted((x, y) + b[:i] + b[i + 1:])) in stored
        if (lhs - rhs) % 2:
            if len(violations) < 10:
                violations.append(list(t))
    return {"scope": SCOPE, "k": k, "n": n, "mode": mode, "seed": seed if mode == "sampled" else None,
            "checked": checked, "violations": len(violations), "examples": violations}


# ---------------------------------------------------------------------------
# the non-distality witness
# ---------------------------------------------------------------------------


@dataclass
class DistalityInstance:
    structure: Structure
    I: list[tuple]
    a: tuple
    J: list[tuple]
    b: list[tuple]
    k: int
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        self.I = [_as_tuple(x) for x in self.I]
        self.J = [_as_tuple(x) for x in self.J]
        self.a = _as_tuple(self.a)
        self.b = [_as_tuple(x) for x in self.b]
        widths = {len(x) for x in self.I + [self.a] + self.J}
        if len(widths) != 1:
            raise InputError(f"sequence entries have different lengths {sorted(widths)}")

    @property
    def sequence(self) -> list[tuple]:
        return self.I + [self.a] + self.J

    def params(self, skip: int | None = None) -> tuple:
        out = []
        for m, bm in enumerate(self.b):
            if m != skip:
                out.extend(bm)
        return tuple(out)

    def to_json(self) -> dict:
        return {"I": [list(x) for x in self.I], "a": list(self.a), "J": [list(x) for x in self.J],
                "b": [list(x) for x in self.b], "k": self.k, "structure_digest": self.structure.digest,
                **({"notes": self.notes} if self.notes else {})}


def _as_tuple(x) -> tuple:
    return tuple(x) if isinstance(x, (tuple, list)) else (x,)


@dataclass
class NondistalWitness:
    pair: KayGraphPair
    sequence: list[int]
    v_positions: list[int]
    k: int

    @property
    def reduct(self) -> Structure:
        return self.pair.reduct

    def instance(self) -> DistalityInstance:
        """b = (v_1..v_{k-1}), a = v_k, I and J the neighbouring blocks."""
        seq = self.sequence
        vk = self.v_positions[-1]
        vprev = self.v_positions[-2] if self.k >= 2 else -1
        I = [seq[p] for p in range(vprev + 1, vk)]
        J = [seq[p] for p in range(vk + 1, len(seq)) if p not in self.v_positions]
        b = [seq[p] for p in self.v_positions[:-1]]
        return DistalityInstance(self.reduct, I, seq[vk], J, b, self.k, notes={"source": "nondistal witness"})


def build_nondistal_witness(k: int, len_each: int) -> NondistalWitness:
    """J = I_0 + v_1 + I_1 + ... + v_k + I_k with every k-subset an edge
    except {v_1..v_k}; R is the parity reduct."""
    if k < 2:
        raise InputError("k must be at least 2")
    if len_each < 2:
        raise InputError("each block needs at least 2 elements")
    size = (k + 1) * len_each + k
    seq = list(range(size))
    v_positions = [(t + 1) * len_each + t for t in range(k)]
    special = tuple(v_positions)
    edges = [e for e in itertools.combinations(seq, k) if e != special]
    h = gen_hypergraph(size, k, edges=edges)
    pair = parity_reduct(h)
    # subsets containing every v see k edges among their k-subsets, others k+1
    for S in itertools.combinations(seq, k + 1):
        count = sum(1 for T in itertools.combinations(S, k) if T != special)
        expect = k if set(special) <= set(S) else k + 1
        if count != expect:
            raise AssertionError(f"edge count {count} != {expect} on {S}")
        if (tuple(S) in pair.R.stored) != (count % 2 == 1):
            raise AssertionError(f"parity reduct disagrees on {S}")
    return NondistalWitness(pair, seq, v_positions, k)


def nondistal_report(w: NondistalWitness, *, max_m: int | None = None) -> dict:
    s = w.reduct
    full = is_qf_indiscernible(s, w.sequence, max_m=max_m)
    drops = []
    for i, pos in enumerate(w.v_positions):
        seq = [x for p, x in enumerate(w.sequence) if p != pos]
        drops.append({"dropped": i + 1, "position": pos, **is_qf_indiscernible(s, seq, max_m=max_m).to_json()})
    return {"scope": SCOPE, "k": w.k, "length": len(w.sequence), "v_positions": w.v_positions,
            "full": full.to_json(), "drop_one": drops,
            "ok": (not full.ok) and all(d["indiscernible"] for d in drops)}


# ---------------------------------------------------------------------------
# strong distality
# ---------------------------------------------------------------------------


def applicable_theorem(inst: DistalityInstance, arity_bound: int) -> str | None:
    """Which finite argument forces the conclusion from the hypotheses.

    ``k_ary``: with at least max(2, arity_bound) parameter tuples every atom
    misses some b_m, so indiscernibility over each b_{!=m} already decides it.
    ``kaygraph``: in a parity reduct with (k+1)-ary R, k singleton parameters
    and nonempty I and J, the parity identity transfers R(-, b) from I+J to a.
    """
    p = len(inst.b)
    if p >= max(2, arity_bound):
        return "k_ary"
    s = inst.structure
    if (s.meta.get("family") == "kaygraph" and set(s.relations) == {"R"} and arity_bound == s.relations["R"].arity
            and p == arity_bound - 1 and all(len(x) == 1 for x in inst.b + inst.sequence)
            and inst.I and inst.J):
        return "kaygraph"
    return None


def strong_distality_check(inst: DistalityInstance, arity_bound: int) -> dict:
    """Evaluate the hypotheses and the conclusion; flag a theorem violation
    only where one of the finite arguments applies."""
    s = inst.structure
    if s.max_arity > arity_bound:
        raise InputError(f"signature has arity {s.max_arity}, above the declared bound {arity_bound}")
    seq = inst.sequence
    if len(seq) < 2:
        raise InputError("the sequence I + a + J needs at least 2 entries")
    over_each = [is_qf_indiscernible(s, seq, inst.params(m)).ok for m in range(len(inst.b))]
    h1 = all(over_each)
    h2 = is_qf_indiscernible(s, inst.I + inst.J, inst.params()).ok if len(inst.I + inst.J) >= 2 else True
    conclusion = is_qf_indiscernible(s, seq, inst.params())
    theorem = applicable_theorem(inst, arity_bound)
    violation = theorem is not None and h1 and h2 and not conclusion.ok
    return {"scope": SCOPE, "parameters": len(inst.b), "arity_bound": arity_bound, "theorem": theorem,
            "h1_over_each": over_each, "h1": h1, "h2": h2, "conclusion": conclusion.ok,
            "counterexample": conclusion.to_json()["counterexample"], "theorem_violation": violation}


def pinned_h2_instance() -> DistalityInstance:
    """Small instance with H1 true and H2 false whose conclusion fails.

    It lies outside both theorem regimes (one parameter, arity bound 3), so it
    shows that H2 is needed in general even though inside the regimes H1
    already forces the conclusion.
    """
    pair = parity_reduct(gen_hypergraph(5, 2, edges=[(0, 4)]))
    return DistalityInstance(pair.reduct, [0, 1], 2, [3], [(4,)], 2, notes={"source": "pinned H2 regression"})


def random_kaygraph_instance(rng: random.Random, k: int, *, seq_len: int = 5, params: int | None = None,
                             noise: float = 0.3) -> DistalityInstance:
    """Kay-graph instance biased towards satisfying the hypotheses.

    Vertices: the sequence (with ``a`` in the middle) followed by the
    parameters.  An edge's status depends only on which parameters it holds
    and how many sequence vertices it holds, except that sets containing
    ``a`` are re-drawn with probability ``noise``.
    """
    p = k if params is None else params
    n = seq_len + p
    seq = list(range(seq_len))
    B = list(range(seq_len, n))
    mid = seq_len // 2
    a = seq[mid]
    pattern: dict = {}
    edges = []
    for S in itertools.combinations(range(n), k):
        key = (tuple(x for x in S if x in B), sum(1 for x in S if x < seq_len))
        if key not in pattern:
            pattern[key] = rng.random() < 0.5
        on = pattern[key]
        if a in S and rng.random() < noise:
            on = rng.random() < 0.5
        if on:
            edges.append(S)
    pair = parity_reduct(gen_hypergraph(n, k, edges=edges))
    return DistalityInstance(pair.reduct, seq[:mid], a, seq[mid + 1:], [(x,) for x in B], k)


def soundness_sweep(instances: int, seed: int = 0, ks=(2, 3)) -> dict:
    """Run the check on many random kay-graph instances; any flagged
    violation means the implementation disagrees with the proposition."""
    rng = random.Random(seed)
    tally = {"instances": instances, "seed": seed, "theorem_violations": 0, "hypotheses_held": 0,
             "conclusion_held": 0, "by_theorem": {}, "violations": []}
    for idx in range(instances):
        k = ks[idx % len(ks)]
        params = k + (idx // len(ks)) % 3 - 1  # k-1, k, k+1 in turn
        inst = random_kaygraph_instance(rng, k, params=params)
        rep = strong_distality_check(inst, k + 1)
        name = rep["theorem"] or "none"
        slot = tally["by_theorem"].setdefault(name, {"instances": 0, "hypotheses_held": 0, "conclusion_failed": 0})
        slot["instances"] += 1
        if rep["h1"] and rep["h2"]:
            tally["hypotheses_held"] += 1
            slot["hypotheses_held"] += 1
            if not rep["conclusion"]:
                slot["conclusion_failed"] += 1
        tally["conclusion_held"] += rep["conclusion"]
        if rep["theorem_violation"]:
            tally["theorem_violations"] += 1
            if len(tally["violations"]) < 5:
                tally["violations"].append(inst.to_json())
    tally["scope"] = SCOPE
    return tally
