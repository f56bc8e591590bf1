"""Command-line interface: ``pcsteiner gen|solve|reduce|verify|trace|bench``.

Exit codes: 0 success, 1 verification failure, 2 unreadable input or missing
artifact, 3 capacity exceeded, 4 infeasible configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from fractions import Fraction

from . import clustering, gadgets, oracle, reduction, treewidth
from .core import (CapacityError, DomainError, Instance, dumps, fraction_str, instance_to_json,
                   load_instance, solution_cost)

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_CAPACITY, EXIT_CONFIG = 0, 1, 2, 3, 4

log = logging.getLogger("pcsteiner")


class ParseFailure(Exception):
    pass


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


def _read(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise ParseFailure(f"cannot read {path}: {exc}") from exc


def _load(path: str) -> Instance:
    try:
        return load_instance(_read(path))
    except DomainError as exc:
        raise ParseFailure(f"{path}: {exc}") from exc


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- gen

def _gen_one(args, seed: int) -> dict:
    if args.kind == "vc-gadget":
        g = gadgets.gen_vc_gadget(gadgets.NAMED_GRAPHS[args.graph]())
        return instance_to_json(g.instance)
    if args.kind == "euclidean":
        eg = gadgets.gen_euclidean_gadget(gadgets.NAMED_GRAPHS[args.graph](), args.divisor,
                                          args.unit)
        return eg.to_json(args.max_points)
    params = {"rows": args.rows, "cols": args.cols, "n": args.n, "p": args.p,
              "demands": args.demands, "penalty": args.penalty, "max_cost": args.max_cost,
              "max_penalty": args.max_penalty, "denominator": args.denominator,
              "rooted": args.rooted}
    return instance_to_json(gadgets.gen_random(args.kind, params, seed))


def cmd_gen(args) -> int:
    if args.count > 1 or args.out_dir:
        if not args.out_dir:
            raise DomainError("--count needs --out-dir")
        os.makedirs(args.out_dir, exist_ok=True)
        for i in range(args.count):
            name = os.path.join(args.out_dir, f"{args.kind}_{args.seed + i:05d}.json")
            _emit(dumps(_gen_one(args, args.seed + i)), name)
        return EXIT_OK
    _emit(dumps(_gen_one(args, args.seed)), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- solve

def _problem(inst: Instance, problem: str) -> str:
    if problem == "auto":
        return "tree" if inst.root is not None else "forest"
    if problem in ("tree", "tour", "stroll") and inst.root is None:
        raise DomainError(f"problem {problem!r} needs a rooted instance")
    return problem


def _budget(args) -> oracle.OracleBudget:
    return oracle.OracleBudget.from_env()


def solve_instance(inst: Instance, alg: str, problem: str, epsilon: Fraction,
                   td_text: str | None = None, initial: str = "exact",
                   budget: oracle.OracleBudget | None = None) -> dict:
    """Run one algorithm; returns the JSON-ready result (without timing)."""
    budget = budget or oracle.OracleBudget.from_env()
    problem = _problem(inst, problem)
    extra: dict = {}
    if alg == "exact":
        if problem == "tour":
            sol = oracle.oracle_tour(inst, budget)
        elif problem == "stroll":
            sol = oracle.oracle_stroll(inst, budget)
        else:
            sol = oracle.oracle_spcsf(inst, "auto", budget)
    elif alg == "dp":
        if problem == "forest":
            raise DomainError("the DP solves rooted tree/tour/stroll instances only")
        td = treewidth.read_pace(td_text)[0] if td_text else None
        nice = treewidth.nice_for(inst, td)
        sol, stats = treewidth.dp_solve(inst, nice, problem)
        extra["dp"] = {"width": stats.width, "states": stats.states, "bound": stats.bound}
    elif alg == "cluster":
        out = clustering.submodular_pc_clustering(inst)
        sol = solution_cost(inst, out.forest)
        extra["dead"] = sorted(out.dead)
    elif alg == "restrict":
        r = reduction.restrict_demands(inst, epsilon, initial)
        sol = solution_cost(inst, r.forest)
        extra["dropped"] = sorted(r.dropped)
    elif alg == "pipeline":
        r, m, pieces = reduction.reduction_pipeline(inst, epsilon, initial)
        edges = sorted({e for t in m.trees for e in t})
        sol = solution_cost(inst, edges)
        extra["dropped"] = sorted(r.dropped)
        extra["pieces"] = [{"demands": list(p.demands), "tree_edges": list(p.tree)}
                           for p in pieces]
    else:
        raise DomainError(f"unknown algorithm {alg!r}")
    res = {"algorithm": alg, "problem": problem}
    res.update(sol.to_json())
    res.update(extra)
    return res


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    td_text = _read(args.td) if args.td else None
    start = time.perf_counter()
    res = solve_instance(inst, args.alg, args.problem, args.epsilon, td_text, args.initial,
                         _budget(args))
    if args.timing:
        res["wall_time"] = round(time.perf_counter() - start, 6)
    if args.artifact:
        _write_artifact(args.artifact, inst, args.alg, args.epsilon, args.initial)
    _emit(dumps(res), args.output)
    return EXIT_OK


def _write_artifact(path: str, inst: Instance, alg: str, epsilon: Fraction, initial: str):
    if alg == "cluster":
        out = clustering.submodular_pc_clustering(inst)
        art = clustering.clustering_to_json(inst, out)
    elif alg in ("restrict", "pipeline"):
        r, m, _ = reduction.reduction_pipeline(inst, epsilon, initial)
        art = _merge_artifact(inst, r, m)
    else:
        raise DomainError(f"no artifact for algorithm {alg!r}")
    art["instance"] = instance_to_json(inst)
    _emit(dumps(art), path)


def _merge_artifact(inst, r, m) -> dict:
    keep = sorted(r.satisfied)
    terminals = {x for d in keep for x in inst.demands[d]}
    forest = reduction.restrict_forest(inst.graph, r.forest, terminals)
    art = reduction.merge_to_json(inst.graph, forest, m)
    art["demands"] = [list(inst.demands[d]) for d in keep]
    art["restrict"] = reduction.restrict_to_json(r)
    return art


# ---------------------------------------------------------------- reduce

def cmd_reduce(args) -> int:
    inst = _load(args.instance)
    r, m, pieces = reduction.reduction_pipeline(inst, args.epsilon, args.initial)
    manifest = reduction.export_bundle(args.out_dir, inst, r, m, pieces)
    art = _merge_artifact(inst, r, m)
    art["instance"] = instance_to_json(inst)
    _emit(dumps(art), os.path.join(args.out_dir, "merge_artifact.json"))
    _emit(dumps({"manifest": manifest, "pieces": len(pieces), "dropped": sorted(r.dropped),
                 "epsilon": fraction_str(r.epsilon)}), None)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def verify_artifact(obj: dict) -> dict:
    """Re-check an artifact; returns ``{"ok": bool, "checks": {...}, "problems": [...]}``."""
    from .core import instance_from_json

    try:
        inst = instance_from_json(obj["instance"])
        kind = obj["kind"]
    except KeyError as exc:
        raise ParseFailure(f"artifact lacks {exc}") from exc
    checks: dict[str, bool] = {}
    problems: list[str] = []
    if kind == "clustering":
        out = clustering.clustering_from_json(obj)
        rep = clustering.check_clustering(inst, out)
        checks = {"tight_dead": rep.tight_dead, "live_satisfied": rep.live_satisfied,
                  "length_bound": rep.length_bound, "dual_feasible": not rep.feasibility,
                  "laminar": rep.laminar}
        problems = rep.feasibility
    elif kind == "merge":
        demands = [tuple(d) for d in obj["demands"]]
        rep = reduction.check_merge_parts(inst.graph, obj["input_forest"], demands,
                                          obj["trees"], obj["demand_parts"],
                                          Fraction(obj["epsilon"]))
        checks = {"coverage": rep.coverage, "spanning": rep.spanning,
                  "length_bound": rep.length_bound}
        if not rep.length_bound:
            problems.append(f"trees total {rep.total_length} > bound {rep.bound}")
    else:
        raise ParseFailure(f"unknown artifact kind {kind!r}")
    return {"ok": all(checks.values()), "checks": checks, "problems": problems}


def cmd_verify(args) -> int:
    text = _read(args.artifact)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseFailure(f"{args.artifact}: not JSON") from exc
    report = verify_artifact(obj)
    _emit(dumps(report), args.output)
    return EXIT_OK if report["ok"] else EXIT_FAIL


# ---------------------------------------------------------------- trace

def cmd_trace(args) -> int:
    inst = _load(args.instance)
    trace: list = []
    if args.alg == "cluster":
        clustering.submodular_pc_clustering(inst, trace)
    elif args.alg == "restrict":
        reduction.restrict_demands(inst, args.epsilon, args.initial, trace)
    else:
        r = reduction.restrict_demands(inst, args.epsilon, args.initial)
        keep = sorted(r.satisfied)
        terminals = {x for d in keep for x in inst.demands[d]}
        forest = reduction.restrict_forest(inst.graph, r.forest, terminals)
        reduction.pc_cluster_merge(inst.graph, forest, r.epsilon,
                                   [inst.demands[d] for d in keep], trace)
    _emit("".join(dumps(ev) for ev in trace), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- bench

def cmd_bench(args) -> int:
    if not os.path.isdir(args.corpus):
        raise ParseFailure(f"corpus directory {args.corpus} not found")
    files = sorted(f for f in os.listdir(args.corpus) if f.endswith(".json"))
    buf = io.StringIO()
    cols = ["instance", "algorithm", "value", "exact", "ratio"]
    if args.timing:
        cols.append("wall_time")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    budget = _budget(args)
    for name in files:
        inst = _load(os.path.join(args.corpus, name))
        for alg in args.alg:
            start = time.perf_counter()
            try:
                res = solve_instance(inst, alg, args.problem, args.epsilon, None, args.initial,
                                     budget)
                value = Fraction(res["total"])
            except (CapacityError, DomainError) as exc:
                log.warning("%s/%s: %s", name, alg, exc)
                value = None
            elapsed = time.perf_counter() - start
            try:
                exact = Fraction(solve_instance(inst, "exact", args.problem, args.epsilon,
                                                budget=budget)["total"])
            except CapacityError:
                exact = None
            ratio = ""
            if value is not None and exact is not None:
                ratio = fraction_str(value / exact) if exact else ("1" if value == 0 else "inf")
            row = [name, alg, "" if value is None else fraction_str(value),
                   "" if exact is None else fraction_str(exact), ratio]
            if args.timing:
                row.append(f"{elapsed:.6f}")
            writer.writerow(row)
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcsteiner", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance")
    g.add_argument("--kind", required=True,
                   choices=["grid", "series-parallel", "erdos-renyi", "vc-gadget", "euclidean"])
    g.add_argument("--graph", default="k4", choices=sorted(gadgets.NAMED_GRAPHS))
    g.add_argument("--rows", type=int, default=3)
    g.add_argument("--cols", type=int, default=3)
    g.add_argument("--n", type=int, default=8)
    g.add_argument("--p", type=float, default=0.3)
    g.add_argument("--demands", type=int, default=4)
    g.add_argument("--penalty", choices=["additive", "capped"], default="additive")
    g.add_argument("--max-cost", type=int, default=5)
    g.add_argument("--max-penalty", type=int, default=8)
    g.add_argument("--denominator", type=int, default=1)
    g.add_argument("--rooted", action="store_true")
    g.add_argument("--divisor", type=_fraction, default=Fraction(1))
    g.add_argument("--unit", type=int, default=None)
    g.add_argument("--max-points", type=int, default=200_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out-dir")
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    def common(sp):
        sp.add_argument("--epsilon", type=_fraction, default=Fraction(1, 2))
        sp.add_argument("--initial", choices=["exact", "cluster"], default="exact")
        sp.add_argument("--problem", choices=["auto", "forest", "tree", "tour", "stroll"],
                        default="auto")
        sp.add_argument("-o", "--output")

    s = sub.add_parser("solve", help="solve one instance")
    s.add_argument("instance")
    s.add_argument("--alg", choices=["exact", "dp", "cluster", "restrict", "pipeline"],
                   default="exact")
    s.add_argument("--td", help="PACE .td decomposition for --alg dp")
    s.add_argument("--artifact", help="also write a verifiable artifact here")
    s.add_argument("--timing", action="store_true", help="add wall_time (not reproducible)")
    common(s)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reduce", help="restrict demands and merge components into pieces")
    r.add_argument("instance")
    r.add_argument("--out-dir", required=True)
    common(r)
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="re-check a clustering or merge artifact")
    v.add_argument("artifact")
    v.add_argument("-o", "--output")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("trace", help="print growth events as JSON lines")
    t.add_argument("instance")
    t.add_argument("--alg", choices=["cluster", "restrict", "merge"], default="cluster")
    common(t)
    t.set_defaults(func=cmd_trace)

    b = sub.add_parser("bench", help="CSV of values and ratios over a corpus directory")
    b.add_argument("corpus")
    b.add_argument("--alg", nargs="+", default=["cluster"],
                   choices=["exact", "dp", "cluster", "restrict", "pipeline"])
    b.add_argument("--timing", action="store_true")
    common(b)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except DomainError as exc:
        print(f"infeasible configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
