"""Demand restriction and component merging.

``restrict_demands`` decides which demands are worth connecting, using an
initial solution whose edges are made free.  ``pc_cluster_merge`` then glues
the resulting tree components into a few larger trees with bounded extra
length, so that each demand lives inside one tree.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .clustering import LaminarClusterFamily, prune, submodular_pc_clustering
from .core import (AdditivePenalty, CappedPenalty, DisjointSet, DomainError, Graph,
                   Instance, PenaltyFn, RestrictedPenalty, ScaledPenalty, Solution,
                   components, dumps, fraction_str, instance_to_json,
                   satisfied_by, solution_cost)

ZERO = Fraction(0)

InitialSolver = Callable[[Instance], Solution]


def exact_initial(inst: Instance) -> Solution:
    from .oracle import oracle_spcsf

    return oracle_spcsf(inst)


def cluster_initial(inst: Instance) -> Solution:
    """Heuristic start: the clustering forest on the original instance."""
    out = submodular_pc_clustering(inst)
    return solution_cost(inst, out.forest)


INITIAL_SOLVERS = {"exact": exact_initial, "cluster": cluster_initial}


def _resolve_initial(initial) -> InitialSolver:
    if callable(initial):
        return initial
    try:
        return INITIAL_SOLVERS[initial]
    except KeyError:
        raise DomainError(f"unknown initial solver {initial!r}") from None


def _check_epsilon(epsilon) -> Fraction:
    eps = Fraction(epsilon)
    if eps <= 0:
        raise DomainError(f"epsilon must be positive, got {eps}")
    return eps


def spanning_forest(G: Graph, edge_ids: Iterable[int], key=None) -> tuple[int, ...]:
    """Kruskal over the given edges; ``key`` orders them (default cost, id)."""
    key = key or (lambda e: (G.edges[e].cost, e))
    ds = DisjointSet(G.n)
    out = [e for e in sorted(set(edge_ids), key=key) if ds.union(G.edges[e].u, G.edges[e].v)]
    return tuple(sorted(out))


def restrict_forest(G: Graph, forest: Iterable[int], keep: Iterable[int]) -> tuple[int, ...]:
    """Repeatedly drop leaf edges whose leaf is not in ``keep``."""
    keep = set(keep)
    F = set(forest)
    deg = [0] * G.n
    for e in F:
        deg[G.edges[e].u] += 1
        deg[G.edges[e].v] += 1
    changed = True
    while changed:
        changed = False
        for e in sorted(F):
            u, v, _ = G.edges[e]
            if (deg[u] == 1 and u not in keep) or (deg[v] == 1 and v not in keep):
                F.discard(e)
                deg[u] -= 1
                deg[v] -= 1
                changed = True
    return tuple(sorted(F))


# ---------------------------------------------------------------- restriction

@dataclass
class RestrictOutput:
    forest: tuple[int, ...]
    satisfied: frozenset[int]
    dropped: frozenset[int]
    initial_forest: tuple[int, ...]
    initial_satisfied: frozenset[int]
    epsilon: Fraction
    penalty: RestrictedPenalty
    clustering_forest: tuple[int, ...] = ()
    trace: list = field(default_factory=list)

    def restricted_instance(self, inst: Instance) -> tuple[Instance, Fraction]:
        """The instance on the kept demands and the constant penalty of the dropped ones.

        Its optimum plus the constant is the optimum of the restricted problem.
        """
        keep = sorted(self.satisfied)
        return (Instance(inst.graph, tuple(inst.demands[d] for d in keep),
                         _penalty_on(inst.penalty, keep, self.dropped), inst.root),
                self.penalty.offset)


def _penalty_on(pi: PenaltyFn, keep: Sequence[int], fixed: frozenset[int]) -> PenaltyFn:
    """``D -> pi(D | fixed) - pi(fixed)`` re-indexed onto ``keep``, in closed form when possible."""
    if isinstance(pi, AdditivePenalty):
        return AdditivePenalty(tuple(pi.p[d] for d in keep))
    if isinstance(pi, CappedPenalty):
        used = sum((pi.p[d] for d in fixed), ZERO)
        return CappedPenalty(tuple(pi.p[d] for d in keep), max(pi.cap - used, ZERO))
    return RestrictedPenalty(pi, fixed).restrict(list(keep)).tabulate()


def restrict_demands(inst: Instance, epsilon=Fraction(1, 2), initial="exact",
                     trace: list | None = None) -> RestrictOutput:
    eps = _check_epsilon(epsilon)
    G = inst.graph
    start = _resolve_initial(initial)(inst)
    f_plus = tuple(sorted(set(start.edges)))
    d_plus = satisfied_by(inst, f_plus)
    free = set(f_plus)
    g_star = G.with_costs({e: ZERO for e in free})
    scaled = Instance(g_star, inst.demands, ScaledPenalty(inst.penalty, 1 / eps), inst.root)
    out = submodular_pc_clustering(scaled, trace)
    forest = spanning_forest(G, set(out.forest) | free,
                             key=lambda e: (g_star.edges[e].cost, e not in free, e))
    dropped = out.dead
    sat = frozenset(range(inst.k)) - dropped
    if not sat <= satisfied_by(inst, forest):
        raise AssertionError("restricted forest misses a kept demand")
    return RestrictOutput(forest, sat, dropped, f_plus, d_plus, eps,
                          RestrictedPenalty(inst.penalty, dropped), out.forest,
                          out.trace)


# ---------------------------------------------------------------- contraction

@dataclass(frozen=True)
class Contraction:
    graph: Graph
    vertex_map: tuple[int, ...]      # original vertex -> contracted vertex
    edge_origin: tuple[int, ...]     # contracted edge -> original edge id
    members: tuple[tuple[int, ...], ...]


def contract_components(G: Graph, forest: Iterable[int]) -> Contraction:
    forest = sorted(set(forest))
    ds = DisjointSet(G.n)
    for e in forest:
        if not ds.union(G.edges[e].u, G.edges[e].v):
            raise DomainError(f"edge set contains a cycle (edge {e})")
    roots = sorted({ds.find(v) for v in range(G.n)})
    index = {r: i for i, r in enumerate(roots)}
    vmap = tuple(index[ds.find(v)] for v in range(G.n))
    members = [[] for _ in roots]
    for v in range(G.n):
        members[vmap[v]].append(v)
    best: dict[tuple[int, int], int] = {}
    for eid, (u, v, c) in enumerate(G.edges):
        a, b = vmap[u], vmap[v]
        if a == b:
            continue
        key = (min(a, b), max(a, b))
        if key not in best or c < G.edges[best[key]].cost:
            best[key] = eid
    keys = sorted(best)
    graph = Graph(len(roots), tuple((a, b, G.edges[best[(a, b)]].cost) for a, b in keys))
    return Contraction(graph, vmap, tuple(best[k] for k in keys),
                       tuple(tuple(m) for m in members))


# ---------------------------------------------------------------- merging

@dataclass
class MergeOutput:
    trees: list[tuple[int, ...]]
    tree_vertices: list[frozenset[int]]
    demand_parts: list[tuple[int, ...]]
    potentials: dict[int, Fraction]
    contraction: Contraction
    added_edges: tuple[int, ...]
    dual_total: Fraction
    epsilon: Fraction
    lengths: list[Fraction] = field(default_factory=list)
    trace: list = field(default_factory=list)

    @property
    def total_length(self) -> Fraction:
        return sum(self.lengths, ZERO)


def _grow_potentials(H: Graph, potential: list[Fraction], trace: list | None):
    """Moat growth where each cluster spends its own potential.

    Returns (grown forest, family, exhausted cluster ids, total dual).
    """
    n = H.n
    family = LaminarClusterFamily.singletons(n)
    ds = DisjointSet(n)
    owner = list(range(n))
    remaining = {v: potential[v] for v in range(n)}
    exhausted: list[int] = []
    load = [ZERO] * H.m
    forest: list[int] = []
    total = ZERO
    for v in range(n):
        if remaining[v] == 0:
            exhausted.append(v)
    step = 0
    while True:
        active = {c for c in family.current if remaining[c] > 0}
        if not active:
            break

        def cl(x):
            return owner[ds.find(x)]

        best_edge = None
        for eid, (u, v, c) in enumerate(H.edges):
            a, b = cl(u), cl(v)
            if a == b:
                continue
            rate = (a in active) + (b in active)
            if rate == 0:
                continue
            val = (c - load[eid]) / rate
            if best_edge is None or val < best_edge[0]:
                best_edge = (val, eid)
        best_exh = min((remaining[c] for c in active), default=None)
        eta = best_exh if best_edge is None or best_exh < best_edge[0] else best_edge[0]
        for eid, (u, v, _) in enumerate(H.edges):
            a, b = cl(u), cl(v)
            if a != b:
                load[eid] += eta * ((a in active) + (b in active))
        for c in active:
            remaining[c] -= eta
            total += eta
        merges, deaths = [], []
        for eid, (u, v, c) in enumerate(H.edges):
            a, b = cl(u), cl(v)
            if a == b or load[eid] < c:
                continue
            if (a not in active) and (b not in active):
                continue
            new = family.merge(a, b, eid)
            ds.union(u, v)
            owner[ds.find(u)] = new
            remaining[new] = remaining.pop(a) + remaining.pop(b)
            forest.append(eid)
            merges.append((a, b, eid))
            if remaining[new] == 0:
                exhausted.append(new)
                deaths.append(new)
        for c in sorted(active):
            if c in remaining and remaining[c] == 0 and c not in exhausted:
                exhausted.append(c)
                deaths.append(c)
        if trace is not None:
            trace.append({"event": step, "eta": fraction_str(eta),
                          "merges": [list(m) for m in merges], "deaths": sorted(deaths)})
        step += 1
        if not merges and not deaths:
            raise AssertionError("merge growth made no progress")
    return forest, family, exhausted, total


def pc_cluster_merge(G: Graph, forest: Iterable[int], epsilon=Fraction(1, 2),
                     demands: Sequence[tuple[int, int]] = (),
                     trace: list | None = None) -> MergeOutput:
    eps = _check_epsilon(epsilon)
    forest = tuple(sorted(set(forest)))
    con = contract_components(G, forest)
    H = con.graph
    comp_len = [ZERO] * H.n
    for e in forest:
        comp_len[con.vertex_map[G.edges[e].u]] += G.edges[e].cost
    potential = [comp_len[c] / eps for c in range(H.n)]
    grown, family, exhausted, total = _grow_potentials(H, potential, trace)
    kept = prune(H, grown, family, exhausted)
    added = tuple(sorted(con.edge_origin[e] for e in kept))
    final = spanning_forest(G, set(forest) | set(added))
    terminals = {x for d in demands for x in d}
    label = components(G.n, ((G.edges[e].u, G.edges[e].v) for e in final))
    groups: dict[int, list[int]] = {}
    for e in final:
        groups.setdefault(label[G.edges[e].u], []).append(e)
    for t in terminals:
        groups.setdefault(label[t], [])
    order = sorted(groups)
    trees = [tuple(sorted(groups[r])) for r in order]
    verts = [frozenset(v for v in range(G.n) if label[v] == r) for r in order]
    parts: list[list[int]] = [[] for _ in order]
    where = {r: i for i, r in enumerate(order)}
    for d, (s, t) in enumerate(demands):
        if label[s] != label[t]:
            raise AssertionError(f"demand {d} is split across merged trees")
        parts[where[label[s]]].append(d)
    return MergeOutput(trees, verts, [tuple(p) for p in parts],
                       {c: potential[c] for c in range(H.n)}, con, added, total, eps,
                       [G.length(t) for t in trees], trace if trace is not None else [])


@dataclass
class MergeReport:
    coverage: bool
    spanning: bool
    length_bound: bool
    total_length: Fraction
    bound: Fraction

    @property
    def ok(self) -> bool:
        return self.coverage and self.spanning and self.length_bound


def check_merge(G: Graph, forest: Iterable[int], demands: Sequence[tuple[int, int]],
                out: MergeOutput) -> MergeReport:
    return check_merge_parts(G, forest, demands, out.trees, out.demand_parts, out.epsilon)


def check_merge_parts(G: Graph, forest: Iterable[int], demands: Sequence[tuple[int, int]],
                      trees: Sequence[Sequence[int]], parts: Sequence[Sequence[int]],
                      epsilon) -> MergeReport:
    """Re-check coverage, spanning and the length bound from scratch."""
    covered = sorted(d for p in parts for d in p)
    coverage = covered == list(range(len(demands)))
    spanning = len(trees) == len(parts)
    for tree, part in zip(trees, parts):
        ds = DisjointSet(G.n)
        for e in tree:
            ds.union(G.edges[e].u, G.edges[e].v)
        for d in part:
            s, t = demands[d]
            if ds.find(s) != ds.find(t):
                spanning = False
    total = sum((G.length(t) for t in trees), ZERO)
    bound = (2 / Fraction(epsilon) + 1) * G.length(set(forest))
    return MergeReport(coverage, spanning, total <= bound, total, bound)


# ---------------------------------------------------------------- pipeline

@dataclass
class Piece:
    index: int
    vertices: frozenset[int]
    tree: tuple[int, ...]
    demands: tuple[int, ...]  # ids in the original instance
    instance: Instance


def reduction_pipeline(inst: Instance, epsilon=Fraction(1, 2), initial="exact",
                       trace: list | None = None):
    """Restrict, then merge.  Returns ``(RestrictOutput, MergeOutput, pieces)``."""
    r = restrict_demands(inst, epsilon, initial, trace)
    keep = sorted(r.satisfied)
    terminals = {x for d in keep for x in inst.demands[d]}
    F = restrict_forest(inst.graph, r.forest, terminals)
    sub_demands = [inst.demands[d] for d in keep]
    m = pc_cluster_merge(inst.graph, F, r.epsilon, sub_demands)
    pieces = []
    for i, (tree, verts, part) in enumerate(zip(m.trees, m.tree_vertices, m.demand_parts)):
        ids = tuple(keep[j] for j in part)
        sub = Instance(inst.graph, tuple(inst.demands[d] for d in ids),
                       _penalty_on(inst.penalty, ids, r.dropped), inst.root)
        pieces.append(Piece(i, verts, tree, ids, sub))
    return r, m, pieces


def restrict_to_json(r: RestrictOutput) -> dict:
    return {
        "kind": "restrict",
        "epsilon": fraction_str(r.epsilon),
        "forest": list(r.forest),
        "satisfied": sorted(r.satisfied),
        "dropped": sorted(r.dropped),
        "initial_forest": list(r.initial_forest),
        "initial_satisfied": sorted(r.initial_satisfied),
        "penalty": r.penalty.to_json(),
        "penalty_offset": fraction_str(r.penalty.offset),
    }


def merge_to_json(G: Graph, forest: Iterable[int], m: MergeOutput) -> dict:
    return {
        "kind": "merge",
        "epsilon": fraction_str(m.epsilon),
        "input_forest": sorted(set(forest)),
        "input_length": fraction_str(G.length(set(forest))),
        "trees": [list(t) for t in m.trees],
        "tree_vertices": [sorted(v) for v in m.tree_vertices],
        "demand_parts": [list(p) for p in m.demand_parts],
        "potentials": {str(c): fraction_str(p) for c, p in sorted(m.potentials.items())},
        "added_edges": list(m.added_edges),
        "dual_total": fraction_str(m.dual_total),
    }


def export_bundle(directory: str, inst: Instance, r: RestrictOutput, m: MergeOutput,
                  pieces: Sequence[Piece]) -> str:
    """Write one JSON instance per piece plus ``manifest.json``; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    for p in pieces:
        name = f"piece_{p.index:03d}.json"
        with open(os.path.join(directory, name), "w") as fh:
            fh.write(dumps(instance_to_json(p.instance)))
        entries.append({"file": name, "demands": list(p.demands),
                        "vertices": sorted(p.vertices), "tree_edges": list(p.tree),
                        "tree_length": fraction_str(inst.graph.length(p.tree))})
    manifest = {
        "epsilon": fraction_str(r.epsilon),
        "dropped": sorted(r.dropped),
        "penalty_prime": r.penalty.to_json(),
        "penalty_offset": fraction_str(r.penalty.offset),
        "pieces": entries,
        "restrict": restrict_to_json(r),
    }
    path = os.path.join(directory, "manifest.json")
    with open(path, "w") as fh:
        fh.write(dumps(manifest))
    return path


def load_manifest(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


__all__ = [
    "RestrictOutput", "MergeOutput", "MergeReport", "Contraction", "Piece",
    "restrict_demands", "contract_components", "pc_cluster_merge", "check_merge",
    "check_merge_parts",
    "reduction_pipeline", "restrict_forest", "spanning_forest", "export_bundle",
    "exact_initial", "cluster_initial", "restrict_to_json", "merge_to_json",
]
