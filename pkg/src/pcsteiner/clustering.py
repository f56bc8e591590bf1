"""Submodular prize-collecting clustering: source-sink moat growing and pruning."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .core import DisjointSet, Graph, Instance, components, fraction_str
from .submodular import compute_eta, dead_set_update

ZERO = Fraction(0)


@dataclass(frozen=True)
class Cluster:
    id: int
    vertices: frozenset[int]
    children: tuple[int, ...] = ()
    edge: int | None = None  # edge whose tightness created this cluster


@dataclass
class LaminarClusterFamily:
    """Every cluster ever formed (indexed by creation order) and the current partition."""

    clusters: list[Cluster]
    current: list[int]  # ids of maximal clusters
    kappa: dict[int, int] = field(default_factory=dict)

    @classmethod
    def singletons(cls, n: int) -> "LaminarClusterFamily":
        return cls([Cluster(v, frozenset([v])) for v in range(n)], list(range(n)))

    def merge(self, a: int, b: int, edge: int) -> int:
        new = Cluster(len(self.clusters), self.clusters[a].vertices | self.clusters[b].vertices,
                      (a, b), edge)
        self.clusters.append(new)
        self.current = [c for c in self.current if c not in (a, b)] + [new.id]
        return new.id

    def is_laminar(self) -> bool:
        sets = [c.vertices for c in self.clusters]
        for i, A in enumerate(sets):
            for B in sets[i + 1:]:
                if A & B and not (A <= B or B <= A):
                    return False
        return True

    def is_partition(self, n: int) -> bool:
        seen: set[int] = set()
        for c in self.current:
            vs = self.clusters[c].vertices
            if seen & vs:
                return False
            seen |= vs
        return seen == set(range(n))


def crosses(demand, vertices: frozenset[int]) -> bool:
    s, t = demand
    return (s in vertices) != (t in vertices)


@dataclass
class DualState:
    """Sparse ``y[(cluster id, demand id)]``."""

    entries: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def add(self, cluster: int, demand: int, amount: Fraction):
        key = (cluster, demand)
        self.entries[key] = self.entries.get(key, ZERO) + amount

    def y_d(self, k: int) -> list[Fraction]:
        out = [ZERO] * k
        for (_, d), val in self.entries.items():
            out[d] += val
        return out

    def y_S(self) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for (c, _), val in self.entries.items():
            out[c] = out.get(c, ZERO) + val
        return out

    def y_of(self, D: Iterable[int], k: int) -> Fraction:
        yd = self.y_d(k)
        return sum((yd[d] for d in set(D)), ZERO)

    def total(self) -> Fraction:
        return sum(self.entries.values(), ZERO)

    def digest(self) -> str:
        items = sorted((c, d, fraction_str(v)) for (c, d), v in self.entries.items() if v)
        return hashlib.sha256(json.dumps(items).encode()).hexdigest()[:16]


@dataclass
class ClusteringOutput:
    forest: tuple[int, ...]
    dead: frozenset[int]
    dual: DualState
    family: LaminarClusterFamily
    grown_forest: tuple[int, ...] = ()
    trace: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------- growth

def grow(inst: Instance, trace: list | None = None):
    """Growth phase.

    Returns ``(F1, dual, family, dead)``.  Loops while some cluster is crossed
    by a live demand; every iteration ends with at least one merge or death.
    """
    G, pi, demands = inst.graph, inst.penalty, inst.demands
    n, k = G.n, len(demands)
    family = LaminarClusterFamily.singletons(n)
    dual = DualState()
    ds = DisjointSet(n)
    owner = list(range(n))  # union-find root -> current cluster id
    load = [ZERO] * G.m
    forest: list[int] = []
    yd = [ZERO] * k
    live = set(range(k))
    events = 0

    def cluster_of(v):
        return owner[ds.find(v)]

    def do_merge(eid, eta_value):
        u, v, _ = G.edges[eid]
        a, b = cluster_of(u), cluster_of(v)
        if a == b:
            return None
        new = family.merge(a, b, eid)
        ds.union(u, v)
        owner[ds.find(u)] = new
        forest.append(eid)
        return (a, b, eid, new)

    # Zero-cost edges are tight before any growth.
    merges = [m for eid, e in enumerate(G.edges) if e.cost == 0
              for m in [do_merge(eid, ZERO)] if m]
    deaths = dead_set_update(pi, yd, live)
    live -= deaths
    if trace is not None and (merges or deaths):
        trace.append(_event(0, ZERO, "init", merges, deaths, dual))

    while True:
        cur = {v: cluster_of(v) for v in range(n)}
        kappa: dict[int, int] = {}
        crossing: dict[int, list[int]] = {}
        for d in live:
            s, t = demands[d]
            if cur[s] != cur[t]:
                for c in (cur[s], cur[t]):
                    kappa[c] = kappa.get(c, 0) + 1
                    crossing.setdefault(c, []).append(d)
        family.kappa = dict(kappa)
        if not kappa:
            break
        events += 1
        rate = [ZERO] * k
        for c, ds_ in crossing.items():
            share = Fraction(1, kappa[c])
            for d in ds_:
                rate[d] += share
        edge_rows = []
        for eid, (u, v, c) in enumerate(G.edges):
            cu, cv = cur[u], cur[v]
            if cu == cv:
                continue
            er = (cu in kappa) + (cv in kappa)
            edge_rows.append((eid, c - load[eid], er))
        res = compute_eta(pi, yd, rate, edge_rows)
        if res.eta is None:
            raise AssertionError("growth is unbounded: an active cluster has no finite constraint")
        eta = res.eta
        if eta:
            for c, ds_ in crossing.items():
                share = eta / kappa[c]
                for d in ds_:
                    dual.add(c, d, share)
            for d in range(k):
                if rate[d]:
                    yd[d] += eta * rate[d]
            for eid, _, er in edge_rows:
                if er:
                    load[eid] += eta * er
        merges = []
        for eid, _, er in edge_rows:
            if load[eid] == G.edges[eid].cost:
                m = do_merge(eid, eta)
                if m:
                    merges.append(m)
        deaths = dead_set_update(pi, yd, live)
        live -= deaths
        if trace is not None:
            trace.append(_event(events, eta, res.kind, merges, deaths, dual))
        if not merges and not deaths:
            raise AssertionError(f"growth event {events} made no progress ({res})")
    if events > 2 * n + k:
        raise AssertionError(f"{events} events exceed 2|V|+|D|")
    return tuple(forest), dual, family, frozenset(range(k)) - live


def _event(index, eta, kind, merges, deaths, dual):
    return {
        "event": index,
        "eta": fraction_str(eta),
        "kind": kind,
        "merges": [list(m) for m in merges],
        "deaths": sorted(deaths),
        "y_hash": dual.digest(),
    }


# ---------------------------------------------------------------- pruning

def prune(G: Graph, forest: Iterable[int], family: LaminarClusterFamily,
          prunable: Iterable[int]) -> tuple[int, ...]:
    """Drop the unique boundary edge of prunable clusters until none has one.

    Clusters are scanned in decreasing creation order, repeatedly.
    """
    F = set(forest)
    order = sorted(set(prunable), reverse=True)
    changed = True
    while changed:
        changed = False
        for cid in order:
            vs = family.clusters[cid].vertices
            boundary = [e for e in F if (G.edges[e].u in vs) != (G.edges[e].v in vs)]
            if len(boundary) == 1:
                F.discard(boundary[0])
                changed = True
    return tuple(sorted(F))


def prunable_clusters(inst: Instance, family: LaminarClusterFamily,
                      dead: frozenset[int]) -> list[int]:
    live = [inst.demands[d] for d in range(inst.k) if d not in dead]
    return [c.id for c in family.clusters
            if not any(crosses(dm, c.vertices) for dm in live)]


def submodular_pc_clustering(inst: Instance, trace: list | None = None) -> ClusteringOutput:
    F1, dual, family, dead = grow(inst, trace)
    B = prunable_clusters(inst, family, dead)
    F2 = prune(inst.graph, F1, family, B)
    if trace is not None:
        trace.append({"event": "prune", "removed": sorted(set(F1) - set(F2)),
                      "forest": list(F2), "y_hash": dual.digest()})
    return ClusteringOutput(F2, dead, dual, family, F1, trace if trace is not None else [])


# ---------------------------------------------------------------- checks

def edge_loads(G: Graph, family: LaminarClusterFamily, dual: DualState) -> list[Fraction]:
    yS = dual.y_S()
    load = [ZERO] * G.m
    for cid, val in yS.items():
        vs = family.clusters[cid].vertices
        for eid, (u, v, _) in enumerate(G.edges):
            if (u in vs) != (v in vs):
                load[eid] += val
    return load


def check_dual_feasibility(inst: Instance, family: LaminarClusterFamily, dual: DualState,
                           exhaustive_limit: int = 12,
                           witnesses: Iterable[frozenset[int]] = ()) -> list[str]:
    """Return human-readable violations of the packing LP (empty when feasible)."""
    problems = []
    G = inst.graph
    for (cid, d), val in dual.entries.items():
        if val < 0:
            problems.append(f"y[{cid},{d}] = {val} < 0")
        elif val > 0 and not crosses(inst.demands[d], family.clusters[cid].vertices):
            problems.append(f"y[{cid},{d}] > 0 but demand {d} does not cross cluster {cid}")
    for eid, ld in enumerate(edge_loads(G, family, dual)):
        if ld > G.edges[eid].cost:
            problems.append(f"edge {eid}: load {ld} > cost {G.edges[eid].cost}")
    yd = dual.y_d(inst.k)
    k = inst.k
    if k <= exhaustive_limit:
        sets: Iterable[frozenset[int]] = (frozenset(i for i in range(k) if m >> i & 1)
                                          for m in range(1 << k))
    else:
        sets = [frozenset([d]) for d in range(k)] + [frozenset(w) for w in witnesses]
    for D in sets:
        yD = sum((yd[d] for d in D), ZERO)
        if yD > inst.penalty(D):
            problems.append(f"set {sorted(D)}: y = {yD} > pi = {inst.penalty(D)}")
    return problems


@dataclass
class ClusteringReport:
    tight_dead: bool
    live_satisfied: bool
    length_bound: bool
    feasibility: list[str]
    laminar: bool
    length: Fraction
    y_total: Fraction

    @property
    def ok(self) -> bool:
        return (self.tight_dead and self.live_satisfied and self.length_bound
                and not self.feasibility and self.laminar)


def check_clustering(inst: Instance, out: ClusteringOutput) -> ClusteringReport:
    """Re-check the three output guarantees plus dual feasibility and laminarity."""
    G = inst.graph
    yd = out.dual.y_d(inst.k)
    y_dead = sum((yd[d] for d in out.dead), ZERO)
    comp = components(G.n, ((G.edges[e].u, G.edges[e].v) for e in out.forest))
    live_ok = all(comp[s] == comp[t] for i, (s, t) in enumerate(inst.demands)
                  if i not in out.dead)
    length = G.length(out.forest)
    y_total = sum(yd, ZERO)
    return ClusteringReport(
        tight_dead=y_dead == inst.penalty(out.dead),
        live_satisfied=live_ok,
        length_bound=length <= 2 * y_total,
        feasibility=check_dual_feasibility(inst, out.family, out.dual),
        laminar=out.family.is_laminar() and out.family.is_partition(G.n),
        length=length,
        y_total=y_total,
    )


def clustering_to_json(inst: Instance, out: ClusteringOutput) -> dict:
    return {
        "kind": "clustering",
        "clusters": [sorted(c.vertices) for c in out.family.clusters],
        "current": sorted(out.family.current),
        "y": [[c, d, fraction_str(v)] for (c, d), v in sorted(out.dual.entries.items())],
        "forest": list(out.forest),
        "grown_forest": list(out.grown_forest),
        "dead": sorted(out.dead),
    }


def clustering_from_json(obj: dict) -> ClusteringOutput:
    clusters = [Cluster(i, frozenset(vs)) for i, vs in enumerate(obj["clusters"])]
    family = LaminarClusterFamily(clusters, list(obj["current"]))
    dual = DualState({(int(c), int(d)): Fraction(v) for c, d, v in obj["y"]})
    return ClusteringOutput(tuple(obj["forest"]), frozenset(obj["dead"]), dual, family,
                            tuple(obj.get("grown_forest", ())))
