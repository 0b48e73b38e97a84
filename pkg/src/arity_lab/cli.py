"""``arity-lab``: generate structures, search and verify witnesses, reproduce.

Exit codes: 0 success or verified, 2 input error, 3 exhausted without a
witness, 4 budget or resource cap hit, 5 internal consistency failure.
Every subcommand prints a report (``--format json|csv|text``) that echoes the
full run configuration, including the seed.  Reports carry no timings, so
identical configurations give byte-identical reports.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .errors import ArityLabError, ConsistencyError, InputError, ResourceError, StaleWitnessError

EXIT_OK, EXIT_INPUT, EXIT_EXHAUSTED, EXIT_BUDGET, EXIT_CONSISTENCY = 0, 2, 3, 4, 5
SEED_ENV = "ARITY_LAB_SEED"
DEFAULT_SEED = 0
FORMATS = ("json", "csv", "text")


def default_seed() -> int:
    """``$ARITY_LAB_SEED`` if set, else 0."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise InputError(f"{SEED_ENV}: {exc}") from None


def _seed(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _positive(kind=int):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _depths(text):
    try:
        parts = [int(x) for x in str(text).split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"depth must be an integer or a comma list, got {text!r}") from None
    return parts[0] if len(parts) == 1 else parts


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    seed: int
    max_universe: int
    max_rows: int
    time_budget: float | None = None
    outputs: dict = field(default_factory=dict)
    format: str = "json"

    def __post_init__(self):
        for name in ("max_universe", "max_rows"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.time_budget is not None and self.time_budget <= 0:
            raise InputError("time budget must be positive")
        if self.format not in FORMATS:
            raise InputError(f"unknown format {self.format!r}")

    def to_json(self) -> dict:
        return asdict(self)


def make_report(cfg: RunConfig, verdict: str, exit_code: int, result: dict, digests: dict | None = None) -> dict:
    return {"tool": "arity-lab", "version": __version__, "config": cfg.to_json(), "verdict": verdict,
            "exit_code": exit_code, "digests": digests or {}, "result": result}


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for key in sorted(obj, key=str):
            yield from _flatten(obj[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(obj, (list, tuple)) and obj and any(isinstance(x, (dict, list, tuple)) for x in obj):
        for i, x in enumerate(obj):
            yield from _flatten(x, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["field", "value"])
        for key, value in _flatten(report):
            w.writerow([key, json.dumps(value, sort_keys=True) if isinstance(value, (list, dict)) else value])
        return buf.getvalue()
    lines = [f"arity-lab {report['config']['subcommand']}: {report['verdict']} (exit {report['exit_code']})"]
    for key, value in _flatten(report["result"]):
        if isinstance(value, (bool, int, float, str)) or value is None:
            lines.append(f"  {key}: {value}")
    return "\n".join(lines) + "\n"


def _write(path, text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        raise InputError(f"output directory does not exist: {path.parent}")
    path.write_text(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _structure_from_args(args, cfg):
    """Load ``--structure`` or build ``--family``; returns the structure."""
    from .generators import (gen_cherlin_lachlan, gen_hypergraph, gen_johnson, gen_kaygraph)
    from .structures import Structure

    if getattr(args, "structure", None):
        return Structure.load(args.structure)
    fam = getattr(args, "family", None)
    if fam is None:
        raise InputError("give --structure FILE or --family NAME")
    if args.n is None or (fam != "cherlin-lachlan" and args.k is None):
        raise InputError(f"--family {fam} needs --n and --k")
    if fam == "johnson":
        return gen_johnson(args.n, args.k, max_universe=cfg.max_universe)
    if fam == "cherlin-lachlan":
        from .generators.cherlin_lachlan import universe_size
        if universe_size(args.n) > cfg.max_universe:
            raise ResourceError("Cherlin-Lachlan universe above the cap", cap=cfg.max_universe,
                                required=universe_size(args.n))
        return gen_cherlin_lachlan(args.n, args.max_arity or 2)
    if fam == "hypergraph":
        return gen_hypergraph(args.n, args.k, seed=cfg.seed, edge_prob=args.edge_prob)
    if fam == "kaygraph":
        return gen_kaygraph(args.n, args.k, seed=cfg.seed, edge_prob=args.edge_prob).reduct
    raise InputError(f"unknown family {fam!r}")


def cmd_gen(args, cfg):
    from .generators import gen_cherlin_lachlan, gen_hypergraph, gen_johnson, gen_kaygraph
    from .generators.cherlin_lachlan import inventory_csv, orbit_inventory, universe_size

    fam = args.family
    result: dict = {"family": fam}
    if fam in ("hypergraph", "kaygraph", "johnson") and args.k is None:
        raise InputError(f"gen {fam} needs --k")
    if fam == "hypergraph":
        s = gen_hypergraph(args.n, args.k, seed=cfg.seed, edge_prob=args.edge_prob)
        result["edges"] = len(s.relations["E"].stored)
    elif fam == "kaygraph":
        pair = gen_kaygraph(args.n, args.k, seed=cfg.seed, edge_prob=args.edge_prob)
        s = pair.reduct
        result.update(edges=len(pair.E.stored), reduct_sets=len(pair.R.stored), base_digest=pair.base.digest)
    elif fam == "johnson":
        s = gen_johnson(args.n, args.k, max_universe=cfg.max_universe)
    else:
        if universe_size(args.n) > cfg.max_universe:
            raise ResourceError("universe above the cap", cap=cfg.max_universe, required=universe_size(args.n))
        s = gen_cherlin_lachlan(args.n, args.max_arity or 2)
        if args.orbits_csv:
            rows = orbit_inventory(args.n, args.max_arity or 2)
            _write(args.orbits_csv, inventory_csv(rows))
            result["orbits"] = len(rows)
    result["universe"] = s.universe
    if args.output:
        _write(args.output, json.dumps(s.to_json(cfg.max_rows), sort_keys=True, separators=(",", ":")) + "\n")
    return "generated", EXIT_OK, result, {"structure": s.digest}


def cmd_arity(args, cfg):
    from .arity import Witness, arity_witness_search, verify_witness

    s = _structure_from_args(args, cfg)
    digests = {"structure": s.digest}
    if args.verify:
        try:
            data = json.loads(Path(args.verify).read_text())
        except FileNotFoundError:
            raise InputError(f"witness file not found: {args.verify}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{args.verify}: invalid JSON ({exc})") from None
        w = Witness.from_json(data.get("result", {}).get("witness") or data.get("witness") or data)
        rep = verify_witness(s, w)
        code = EXIT_OK if rep["passed"] else EXIT_CONSISTENCY
        return ("verified" if rep["passed"] else "verification_failed"), code, rep, digests
    if args.l is None:
        raise InputError("--l is required for a search")
    budget = None if args.exhaustive else args.budget
    res = arity_witness_search(s, args.l, args.mode, budget=budget, symmetry=args.symmetry)
    result = res.to_json()
    if res.witness is not None:
        result["verification"] = verify_witness(s, res.witness)
    code = {"witness": EXIT_OK, "exhausted_no_witness": EXIT_EXHAUSTED, "budget_exhausted": EXIT_BUDGET}[res.status]
    return res.status, code, result, digests


def cmd_setsys(args, cfg):
    from .arity import build_set_systems, set_system_levels, verify_set_systems

    levels = [verify_set_systems(p, embed=False) for p in set_system_levels(args.l)[:-1]]
    pair = build_set_systems(args.l)
    final = verify_set_systems(pair)
    ok = final["passed"] and all(r["passed"] for r in levels)
    result = {"pair": pair.to_json(), "verification": final, "levels_passed": [r["passed"] for r in levels]}
    return ("verified" if ok else "verification_failed"), (EXIT_OK if ok else EXIT_CONSISTENCY), result, {}


def cmd_goode(args, cfg):
    from .pseudoplane import build_fragment, build_goode_witness, check_drop_one_agreement, eval_phi

    depth = args.depth
    if isinstance(depth, list) and len(depth) != args.n:
        raise InputError(f"--depth list needs {args.n} entries (sorts 2..{args.n + 1})")
    f = build_fragment(args.n + 1, args.labels, depth, max_vertices=args.max_vertices)
    w = build_goode_witness(args.n, f)
    agreement = check_drop_one_agreement(w, f, args.radius, tables=args.tables, max_ball=args.max_ball)
    phi = [eval_phi(args.n + 1, f, w.b), eval_phi(args.n + 1, f, w.b_prime)]
    ok = phi == [True, False] and agreement.ok
    result = {"fragment": f.describe(), "witness": w.to_json(), "phi_b": phi[0], "phi_b_prime": phi[1],
              "agreement": agreement.to_json()}
    return ("verified" if ok else "agreement_failed"), (EXIT_OK if ok else EXIT_CONSISTENCY), result, {}


def cmd_johnson_extend(args, cfg):
    from .johnson_homogeneity import LkIso, NotAnIsomorphism, extend_to_injection

    c = LkIso.load(args.instance, n=args.n, k=args.k)
    try:
        sigma, pieces = extend_to_injection(c)
    except NotAnIsomorphism as exc:
        return "not_an_isomorphism", EXIT_INPUT, {"violation": exc.violation.to_json()}, {}
    result = {"sigma": {str(p): v for p, v in sorted(sigma.items())},
              "pieces": [{"members": sorted(pc.members), "points": list(pc.points), "P": list(pc.P),
                          "Q": list(pc.Q), "image": list(pc.image)} for pc in pieces],
              "injective": len(set(sigma.values())) == len(sigma), "instance": c.to_json()}
    return "extended", EXIT_OK, result, {}


def cmd_distal(args, cfg):
    from . import distality
    from .generators import gen_kaygraph

    if args.what == "parity":
        n = args.n if args.n is not None else max(12, args.k + 2)
        pair = gen_kaygraph(n, args.k, seed=cfg.seed)
        rep = distality.verify_parity_identity(pair, samples=args.samples, seed=cfg.seed, mode=args.mode)
        ok = rep["violations"] == 0
        return ("identity_holds" if ok else "identity_violated"), (EXIT_OK if ok else EXIT_CONSISTENCY), rep, \
            {"reduct": pair.reduct.digest}
    if args.what == "witness":
        w = distality.build_nondistal_witness(args.k, args.len_each)
        rep = distality.nondistal_report(w)
        ok = rep["ok"]
        return ("witness_verified" if ok else "witness_failed"), (EXIT_OK if ok else EXIT_CONSISTENCY), rep, \
            {"reduct": w.reduct.digest}
    rep = distality.soundness_sweep(args.instances, seed=cfg.seed, ks=(args.k,))
    ok = rep["theorem_violations"] == 0
    return ("sound" if ok else "theorem_violation"), (EXIT_OK if ok else EXIT_CONSISTENCY), rep, {}


def _run_item_safely(name: str, seed: int) -> dict:
    from .reproduce import run_item

    try:
        return run_item(name, seed)
    except ResourceError as exc:
        return {"item": name, "passed": False, "error": "resource", "message": str(exc)}
    except ArityLabError as exc:
        return {"item": name, "passed": False, "error": type(exc).__name__, "message": str(exc)}


def cmd_reproduce(args, cfg):
    from .reproduce import REGISTRY, TOPICS

    if args.list:
        return "listed", EXIT_OK, {"items": {n: {"topic": it.topic, "summary": it.summary}
                                             for n, it in REGISTRY.items()}, "topics": TOPICS}, {}
    names = list(REGISTRY) if args.all else list(args.items)
    if not names:
        raise InputError("name at least one item, or pass --all or --list")
    for n in names:
        if n not in REGISTRY:
            raise InputError(f"unknown reproduction item {n!r}; known: {', '.join(REGISTRY)}")
    results: dict[str, dict] = {}
    start = time.monotonic()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = {n: pool.submit(_run_item_safely, n, cfg.seed) for n in names}
            for n in names:
                results[n] = futures[n].result()
    else:
        for n in names:
            if cfg.time_budget is not None and time.monotonic() - start > cfg.time_budget:
                results[n] = {"item": n, "passed": False, "error": "resource", "message": "time budget spent"}
                continue
            results[n] = _run_item_safely(n, cfg.seed)
            print(f"[{'pass' if results[n]['passed'] else 'FAIL'}] {n}", file=sys.stderr)
    ordered = [results[n] for n in names]
    failed = [r["item"] for r in ordered if not r["passed"]]
    if not failed:
        code = EXIT_OK
    elif all(r.get("error") == "resource" for r in ordered if not r["passed"]):
        code = EXIT_BUDGET
    else:
        code = EXIT_CONSISTENCY
    summary = {"items": len(ordered), "passed": len(ordered) - len(failed), "failed": failed}
    return ("all_passed" if not failed else "failures"), code, {"summary": summary, "items": ordered}, {}


COMMANDS = {"gen": cmd_gen, "arity": cmd_arity, "setsys": cmd_setsys, "goode": cmd_goode,
            "johnson-extend": cmd_johnson_extend, "distal": cmd_distal, "reproduce": cmd_reproduce}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=None,
                        help=f"64-bit seed (default ${SEED_ENV}, else {DEFAULT_SEED})")
    common.add_argument("--format", choices=FORMATS, default="json", help="report format on stdout")
    common.add_argument("-o", "--output", help="write the primary output here")
    common.add_argument("--report", help="also write the report to this file")
    common.add_argument("--max-universe", type=_positive(), default=5_000_000)
    common.add_argument("--max-rows", type=_positive(), default=2_000_000)
    common.add_argument("--time-budget", type=_positive(float), default=None, help="seconds (reproduce only)")

    p = _Parser(prog="arity-lab", description="Finite witnesses for arity and distality examples.")
    p.add_argument("--version", action="version", version=f"arity-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a structure as JSON")
    g.add_argument("family", choices=["hypergraph", "kaygraph", "johnson", "cherlin-lachlan"])
    g.add_argument("--n", type=_positive(), required=True)
    g.add_argument("--k", type=_positive())
    g.add_argument("--edge-prob", type=float, default=0.5)
    g.add_argument("--max-arity", type=_positive())
    g.add_argument("--orbits-csv", help="Cherlin-Lachlan only: write the orbit inventory as CSV")

    a = sub.add_parser("arity", parents=[common], help="search for or verify an arity witness")
    src = a.add_mutually_exclusive_group()
    src.add_argument("--structure", help="structure JSON file")
    src.add_argument("--family", choices=["hypergraph", "kaygraph", "johnson", "cherlin-lachlan"],
                     help="build the structure in memory (keeps symmetry information)")
    a.add_argument("--n", type=_positive())
    a.add_argument("--k", type=_positive())
    a.add_argument("--edge-prob", type=float, default=0.5)
    a.add_argument("--max-arity", type=_positive())
    a.add_argument("--l", type=_positive())
    a.add_argument("--mode", default="drop-one", help="drop-one or up-to-K")
    lim = a.add_mutually_exclusive_group()
    lim.add_argument("--exhaustive", action="store_true")
    lim.add_argument("--budget", type=_positive())
    a.add_argument("--symmetry", choices=["auto", "ground", "none"], default="auto")
    a.add_argument("--verify", metavar="WITNESS", help="verify a witness (or a report holding one)")

    s = sub.add_parser("setsys", parents=[common], help="build and verify the set systems")
    s.add_argument("--l", type=_positive(), required=True)

    gd = sub.add_parser("goode", parents=[common], help="phi witnesses in a pseudoplane fragment")
    gd.add_argument("--n", type=_positive(), required=True)
    gd.add_argument("--labels", type=_positive(), default=2)
    gd.add_argument("--depth", type=_depths, default=None,
                    help="tree depth, or a comma list for sorts 2..n+1 (default 2 for n=1, 2,3 for n=2)")
    gd.add_argument("--radius", type=int, default=None, help="default 1 for n=1, else 2")
    gd.add_argument("--tables", action="store_true", help="include per-drop isomorphism tables")
    gd.add_argument("--max-vertices", type=_positive(), default=200_000)
    gd.add_argument("--max-ball", type=_positive(), default=1_000_000,
                    help="cap on the estimated size of the radius balls")

    je = sub.add_parser("johnson-extend", parents=[common], help="extend an isomorphism to a point map")
    je.add_argument("--instance", required=True)
    je.add_argument("--n", type=_positive())
    je.add_argument("--k", type=_positive())

    d = sub.add_parser("distal", parents=[common], help="kay-graph distality checks")
    d.add_argument("what", choices=["parity", "witness", "strong-check"])
    d.add_argument("--k", type=_positive(), default=3)
    d.add_argument("--n", type=_positive())
    d.add_argument("--samples", type=int, default=100_000)
    d.add_argument("--mode", choices=["auto", "exhaustive", "sampled"], default="auto")
    d.add_argument("--len-each", type=_positive(), default=2)
    d.add_argument("--instances", type=_positive(), default=1000)

    r = sub.add_parser("reproduce", parents=[common], help="run pinned reproduction items")
    r.add_argument("items", nargs="*")
    r.add_argument("--all", action="store_true")
    r.add_argument("--list", action="store_true")
    r.add_argument("--jobs", type=_positive(), default=1)
    return p


def _defaults(args):
    if args.command == "goode":
        if args.depth is None:
            args.depth = 2 if args.n == 1 else [2] * (args.n - 1) + [3]
        if args.radius is None:
            args.radius = 1 if args.n == 1 else 2


_NOT_PARAMS = {"command", "seed", "format", "output", "report", "max_universe", "max_rows", "time_budget"}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _defaults(args)
        seed = args.seed if args.seed is not None else default_seed()
        params = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_PARAMS}
        outputs = {k: getattr(args, k) for k in ("output", "report") if getattr(args, k, None)}
        if getattr(args, "orbits_csv", None):
            outputs["orbits_csv"] = args.orbits_csv
        cfg = RunConfig(args.command, params, seed, args.max_universe, args.max_rows, args.time_budget,
                        outputs, args.format)
    except InputError as exc:
        print(f"arity-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        verdict, code, result, digests = COMMANDS[args.command](args, cfg)
    except (InputError, StaleWitnessError) as exc:
        verdict, code, result, digests = "input_error", EXIT_INPUT, {"error": str(exc)}, {}
        print(f"arity-lab: error: {exc}", file=sys.stderr)
    except ResourceError as exc:
        verdict, code, digests = "resource_exhausted", EXIT_BUDGET, {}
        result = {"error": str(exc), "cap": exc.cap, "required": exc.required}
        print(f"arity-lab: resource cap hit: {exc}", file=sys.stderr)
    except ConsistencyError as exc:
        verdict, code, result, digests = "consistency_error", EXIT_CONSISTENCY, {"error": str(exc)}, {}
        print(f"arity-lab: consistency failure: {exc}", file=sys.stderr)
    report = make_report(cfg, verdict, code, result, digests)
    text = render(report, cfg.format)
    try:
        if args.command != "gen" and args.output:
            _write(args.output, render(report, "json"))
        if args.report:
            _write(args.report, text)
    except InputError as exc:
        print(f"arity-lab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(text)
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
