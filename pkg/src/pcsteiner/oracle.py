"""Exhaustive exact solvers used as ground truth.

Every oracle returns a witness together with its value.  Internally costs
are scaled to integers by the common denominator, so the hot loops run on
``int`` and the answers are converted back to exact fractions.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (AdditivePenalty, CapacityError, DisjointSet, DomainError, Graph,
                   Instance, Solution, solution_cost)

INF = math.inf


@dataclass(frozen=True)
class OracleBudget:
    max_edges: int = 20
    max_terminals: int = 12
    max_demands: int = 12
    max_states: int = 400_000
    max_tour_vertices: int = 12

    @classmethod
    def from_env(cls) -> "OracleBudget":
        """Read overrides from ``PCSTEINER_ORACLE_MAX_EDGES`` and friends."""
        kw = {}
        for name in ("max_edges", "max_terminals", "max_demands", "max_states",
                     "max_tour_vertices"):
            val = os.environ.get(f"PCSTEINER_ORACLE_{name.upper()}")
            if val:
                kw[name] = int(val)
        return cls(**kw)


DEFAULT_BUDGET = OracleBudget()


# ---------------------------------------------------------------- plumbing

def _scale(values: Iterable[Fraction]) -> int:
    den = 1
    for x in values:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return den


def _int_costs(G: Graph, scale: int) -> list[int]:
    return [int(e.cost * scale) for e in G.edges]


def _shortest_paths(G: Graph, cost: list[int]):
    """Floyd-Warshall on integer costs; returns (dist, edge-on-first-hop)."""
    n = G.n
    dist = [[INF] * n for _ in range(n)]
    hop = [[-1] * n for _ in range(n)]
    for v in range(n):
        dist[v][v] = 0
    for eid, (u, v, _) in enumerate(G.edges):
        c = cost[eid]
        if c < dist[u][v] or (c == dist[u][v] and hop[u][v] > eid):
            dist[u][v] = dist[v][u] = c
            hop[u][v] = hop[v][u] = eid
    for w in range(n):
        dw = dist[w]
        for u in range(n):
            du = dist[u]
            duw = du[w]
            if duw == INF:
                continue
            hu = hop[u]
            huw = hu[w]
            for v in range(n):
                alt = duw + dw[v]
                if alt < du[v]:
                    du[v] = alt
                    hu[v] = huw
    return dist, hop


def _path_edges(G: Graph, hop, u: int, v: int) -> list[int]:
    out = []
    while u != v:
        eid = hop[u][v]
        if eid < 0:
            raise DomainError(f"no path between {u} and {v}")
        out.append(eid)
        a, b, _ = G.edges[eid]
        u = b if a == u else a
    return out


def _spanning_forest(G: Graph, edge_ids: Iterable[int]) -> list[int]:
    """Minimum spanning forest of an edge set (drops cycle edges, longest first)."""
    ds = DisjointSet(G.n)
    out = []
    for eid in sorted(set(edge_ids), key=lambda e: (G.edges[e].cost, e)):
        if ds.union(G.edges[eid].u, G.edges[eid].v):
            out.append(eid)
    return sorted(out)


# ---------------------------------------------------------------- Steiner trees

class _DreyfusWagner:
    """Optimal Steiner trees for every subset of a terminal list."""

    def __init__(self, G: Graph, terminals: Sequence[int], cost: list[int], dist, hop):
        self.G, self.terms, self.dist, self.hop = G, list(terminals), dist, hop
        n, k = G.n, len(self.terms)
        full = 1 << k
        dp = [None] * full
        back: list = [None] * full
        dp[0] = [0] * n
        back[0] = [None] * n
        for i, t in enumerate(self.terms):
            dp[1 << i] = list(dist[t])
            back[1 << i] = [("path", t)] * n
        for mask in range(1, full):
            if mask & (mask - 1) == 0:
                continue
            row = [INF] * n
            brow: list = [None] * n
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    a, b = dp[sub], dp[mask ^ sub]
                    for v in range(n):
                        x = a[v] + b[v]
                        if x < row[v]:
                            row[v] = x
                            brow[v] = ("split", sub)
                sub = (sub - 1) & mask
            # one relaxation pass suffices on a metric closure
            final = list(row)
            fback = list(brow)
            for u in range(n):
                ru = row[u]
                if ru == INF:
                    continue
                du = dist[u]
                for v in range(n):
                    x = ru + du[v]
                    if x < final[v]:
                        final[v] = x
                        fback[v] = ("move", u)
            dp[mask] = final
            back[mask] = fback
        self.dp, self.back = dp, back

    def value(self, mask: int):
        if mask == 0:
            return 0
        return min(self.dp[mask])

    def edges(self, mask: int) -> list[int]:
        if mask == 0:
            return []
        row = self.dp[mask]
        v = min(range(len(row)), key=row.__getitem__)
        out: list[int] = []
        self._collect(mask, v, out)
        return out

    def _collect(self, mask, v, out):
        while True:
            if mask & (mask - 1) == 0:
                t = self.terms[mask.bit_length() - 1]
                out.extend(_path_edges(self.G, self.hop, t, v))
                return
            kind, arg = self.back[mask][v]
            if kind == "move":
                out.extend(_path_edges(self.G, self.hop, arg, v))
                v = arg
                continue
            self._collect(arg, v, out)
            mask ^= arg


def steiner_tree(G: Graph, terminals: Iterable[int],
                 budget: OracleBudget = DEFAULT_BUDGET) -> tuple[Fraction, list[int]]:
    terms = sorted(set(terminals))
    if len(terms) > budget.max_terminals:
        raise CapacityError(f"{len(terms)} terminals exceed budget {budget.max_terminals}")
    if len(terms) <= 1:
        return Fraction(0), []
    scale = _scale(e.cost for e in G.edges)
    cost = _int_costs(G, scale)
    dist, hop = _shortest_paths(G, cost)
    dw = _DreyfusWagner(G, terms, cost, dist, hop)
    full = (1 << len(terms)) - 1
    val = dw.value(full)
    if val == INF:
        raise DomainError("terminals are not connected")
    return Fraction(val, scale), _spanning_forest(G, dw.edges(full))


class _ForestSolver:
    """Steiner forests over subsets of the instance's demands."""

    def __init__(self, G: Graph, pairs: Sequence[tuple[int, int]], budget: OracleBudget):
        self.G = G
        self.pairs = list(pairs)
        terms = sorted({x for p in pairs for x in p})
        if len(terms) > budget.max_terminals:
            raise CapacityError(f"{len(terms)} terminals exceed budget {budget.max_terminals}")
        self.index = {t: i for i, t in enumerate(terms)}
        self.scale = _scale(e.cost for e in G.edges)
        cost = _int_costs(G, self.scale)
        dist, hop = _shortest_paths(G, cost)
        self.dw = _DreyfusWagner(G, terms, cost, dist, hop)
        self.st = [self.dw.value(m) for m in range(1 << len(terms))]

    def solve(self, demand_ids: Iterable[int]):
        """Return (scaled value, groups) of the cheapest forest for the given demands."""
        pm = []
        X = 0
        for d in demand_ids:
            s, t = self.pairs[d]
            ms, mt = 1 << self.index[s], 1 << self.index[t]
            pm.append((ms, mt))
            X |= ms | mt
        if not pm:
            return 0, []

        def closed(sub):
            for ms, mt in pm:
                if bool(sub & ms) != bool(sub & mt):
                    return False
            return True

        memo = {0: (0, None)}
        st = self.st

        def best(mask):
            if mask in memo:
                return memo[mask][0]
            low = mask & -mask
            res, arg = INF, None
            sub = mask
            while sub:
                if sub & low and closed(sub):
                    v = st[sub]
                    if v < res:
                        rest = best(mask ^ sub)
                        if v + rest < res:
                            res, arg = v + rest, sub
                sub = (sub - 1) & mask
            memo[mask] = (res, arg)
            return res

        val = best(X)
        groups = []
        mask = X
        while mask:
            sub = memo[mask][1]
            if sub is None:
                break
            groups.append(sub)
            mask ^= sub
        return val, groups

    def edges(self, groups) -> list[int]:
        out: list[int] = []
        for g in groups:
            out.extend(self.dw.edges(g))
        return _spanning_forest(self.G, out)


def steiner_forest(G: Graph, pairs: Sequence[tuple[int, int]],
                   budget: OracleBudget = DEFAULT_BUDGET) -> tuple[Fraction, list[int]]:
    """Minimum-length forest connecting every pair (value and edge ids)."""
    pairs = [tuple(p) for p in pairs if p[0] != p[1]]
    if not pairs:
        return Fraction(0), []
    fs = _ForestSolver(G, pairs, budget)
    val, groups = fs.solve(range(len(pairs)))
    if val == INF:
        raise DomainError("some demand pair is disconnected")
    return Fraction(val, fs.scale), fs.edges(groups)


def steiner_forest_len(G: Graph, pairs: Sequence[tuple[int, int]],
                       budget: OracleBudget = DEFAULT_BUDGET) -> Fraction:
    return steiner_forest(G, pairs, budget)[0]


# ---------------------------------------------------------------- SPCSF

def oracle_spcsf(inst: Instance, method: str = "auto",
                 budget: OracleBudget = DEFAULT_BUDGET,
                 order: Sequence[int] | None = None) -> Solution:
    """Exact optimum of length + penalty of the unsatisfied demands.

    Methods: ``edges`` (all edge subsets), ``satisfied`` (all satisfied sets
    costed by exact Steiner forests) and ``frontier`` (edge-by-edge dynamic
    program over frontier connectivity).  ``order`` fixes the vertex order of
    the frontier method; a good order keeps its state space small.
    """
    if method == "auto":
        n_terms = len(inst.terminals())
        if inst.k <= budget.max_demands and n_terms <= min(budget.max_terminals, 10):
            method = "satisfied"
        elif inst.graph.m <= min(budget.max_edges, 14):
            method = "edges"
        else:
            method = "frontier"
    if method == "edges":
        return _oracle_edges(inst, budget)
    if method == "satisfied":
        return _oracle_satisfied(inst, budget)
    if method == "frontier":
        return _oracle_frontier(inst, budget, order)
    raise DomainError(f"unknown oracle method {method!r}")


def _oracle_edges(inst: Instance, budget: OracleBudget) -> Solution:
    G = inst.graph
    if G.m > budget.max_edges:
        raise CapacityError(f"{G.m} edges exceed edge-enumeration budget {budget.max_edges}")
    k = inst.k
    pen_cache: dict[int, Fraction] = {}
    best = None
    E = G.edges
    for mask in range(1 << G.m):
        ds = DisjointSet(G.n)
        length = Fraction(0)
        for eid in range(G.m):
            if mask >> eid & 1:
                u, v, c = E[eid]
                ds.union(u, v)
                length += c
        if best is not None and length >= best[0]:
            continue
        unsat = 0
        for i, (s, t) in enumerate(inst.demands):
            if ds.find(s) != ds.find(t):
                unsat |= 1 << i
        if unsat not in pen_cache:
            pen_cache[unsat] = inst.penalty(frozenset(i for i in range(k) if unsat >> i & 1))
        total = length + pen_cache[unsat]
        if best is None or total < best[0]:
            best = (total, mask)
    edges = [e for e in range(G.m) if best[1] >> e & 1]
    return solution_cost(inst, _spanning_forest(G, edges))


def _oracle_satisfied(inst: Instance, budget: OracleBudget) -> Solution:
    k = inst.k
    if k > budget.max_demands:
        raise CapacityError(f"{k} demands exceed satisfied-set budget {budget.max_demands}")
    if k == 0:
        return solution_cost(inst, [])
    fs = _ForestSolver(inst.graph, inst.demands, budget)
    everything = frozenset(range(k))
    best = None
    for mask in range(1 << k):
        D = [d for d in range(k) if mask >> d & 1]
        val, groups = fs.solve(D)
        if val == INF:
            continue
        total = Fraction(val, fs.scale) + inst.penalty(everything - frozenset(D))
        if best is None or total < best[0]:
            best = (total, groups)
    return solution_cost(inst, fs.edges(best[1]))


def _oracle_frontier(inst: Instance, budget: OracleBudget,
                     order: Sequence[int] | None = None) -> Solution:
    G = inst.graph
    n, k = G.n, inst.k
    additive = isinstance(inst.penalty, AdditivePenalty)
    scale = _scale([e.cost for e in G.edges]
                   + (list(inst.penalty.p) if additive else []))
    ecost = _int_costs(G, scale)
    pcost = [int(p * scale) for p in inst.penalty.p] if additive else None

    order = list(order) if order is not None else _bfs_order(G)
    if sorted(order) != list(range(n)):
        raise DomainError("vertex order must be a permutation of the vertices")
    pos = {v: i for i, v in enumerate(order)}
    edge_order = sorted(range(G.m), key=lambda e: (max(pos[G.edges[e].u], pos[G.edges[e].v]),
                                                   min(pos[G.edges[e].u], pos[G.edges[e].v]), e))
    last = {}
    for step, eid in enumerate(edge_order):
        u, v, _ = G.edges[eid]
        last[u] = step
        last[v] = step
    by_vertex: list[list[int]] = [[] for _ in range(n)]
    for i, (s, t) in enumerate(inst.demands):
        by_vertex[s].append(i)
        by_vertex[t].append(i)

    # state: (frontier labels tuple, retired labels tuple[(v, label)], paid frozenset)
    frontier: list[int] = []
    entered: set[int] = set()
    retired: set[int] = set()
    start = ((), (), frozenset())
    layer = {start: (0, None, False)}
    history = []

    def pay(d, paid, add):
        if additive:
            return paid, add + pcost[d]
        return paid | {d}, add

    for step, eid in enumerate(edge_order):
        u, v, _ = G.edges[eid]
        new_front = list(frontier)
        for x in (u, v):
            if x not in entered:
                new_front.append(x)
        retiring = [x for x in (u, v) if last[x] == step]
        retiring = sorted(set(retiring))
        after_front = [x for x in new_front if x not in retiring]
        now_entered = entered | {u, v}
        now_retired = retired | set(retiring)
        nxt: dict = {}
        for state, (cost, _, _) in layer.items():
            labels, rlab, paid = state
            lab = dict(zip(frontier, labels))
            fresh = max(labels, default=-1) + 1
            for x in new_front:
                if x not in lab:
                    lab[x] = fresh
                    fresh += 1
            options = [(lab, 0, False)]
            if lab[u] != lab[v]:
                a, b = lab[u], lab[v]
                merged = {x: (a if l == b else l) for x, l in lab.items()}
                options.append((merged, ecost[eid], True))
            for lab2, add, used in options:
                if used:
                    a, b = lab[u], lab[v]
                    rl = {x: (a if l == b else l) for x, l in rlab}
                else:
                    rl = dict(rlab)
                res = _settle(dict(lab2), rl, paid, cost + add, retiring, after_front,
                              now_entered, now_retired, inst, by_vertex, pay)
                if res is None:
                    continue
                key, c2 = res
                prev = nxt.get(key)
                if prev is None or c2 < prev[0]:
                    nxt[key] = (c2, state, used)
        if len(nxt) > budget.max_states:
            raise CapacityError(f"frontier oracle exceeded {budget.max_states} states")
        history.append((eid, nxt))
        layer = nxt
        frontier = after_front
        entered = now_entered
        retired = now_retired

    # demands never touched by any edge are unsatisfied
    best = None
    for state, (cost, _, _) in layer.items():
        _, _, paid = state
        extra = [d for d, (s, t) in enumerate(inst.demands)
                 if s not in entered and t not in entered]
        if additive:
            total = Fraction(cost + sum(pcost[d] for d in extra), scale)
        else:
            total = Fraction(cost, scale) + inst.penalty(paid | set(extra))
        if best is None or total < best[0]:
            best = (total, state)
    edges = []
    state = best[1]
    for eid, table in reversed(history):
        _, prev, used = table[state]
        if used:
            edges.append(eid)
        state = prev
    sol = solution_cost(inst, sorted(edges))
    if sol.total != best[0]:
        raise AssertionError(f"frontier witness costs {sol.total}, table says {best[0]}")
    return sol


def _settle(lab, rl, paid, cost, retiring, after_front, entered, retired, inst, by_vertex, pay):
    """Retire vertices, close finished components, drop resolved terminals, canonicalize."""
    demands = inst.demands
    add = 0
    for x in retiring:
        comp = lab.pop(x)
        if by_vertex[x]:
            rl[x] = comp
        if comp in lab.values():
            continue
        closed = {y for y, l in rl.items() if l == comp}
        seen_d = set()
        for y in closed:
            for d in by_vertex[y]:
                if d in seen_d:
                    continue
                seen_d.add(d)
                s, t = demands[d]
                other = t if s == y else s
                if other in closed:
                    continue
                if other in retired and other not in rl and other not in lab:
                    continue  # already resolved earlier
                paid, add = pay(d, paid, add)
        for y in closed:
            del rl[y]
    # Drop retired terminals whose demands are all resolved.  Dropping one
    # can resolve a partner's demand, so repeat to a fixpoint.
    changed = True
    while changed:
        changed = False
        for y in list(rl):
            ok = True
            for d in by_vertex[y]:
                s, t = demands[d]
                other = t if s == y else s
                if other in retired and other not in rl and other not in lab:
                    continue
                if other in lab and lab[other] == rl[y]:
                    continue
                if other in rl and rl[other] == rl[y]:
                    continue
                ok = False
                break
            if ok:
                del rl[y]
                changed = True
    relabel: dict[int, int] = {}
    labels = []
    for x in after_front:
        l = lab[x]
        if l not in relabel:
            relabel[l] = len(relabel)
        labels.append(relabel[l])
    rlab = tuple(sorted((y, relabel[l]) for y, l in rl.items()))
    return (tuple(labels), rlab, paid), cost + add


def _bfs_order(G: Graph) -> list[int]:
    adj = G.adjacency()
    seen = [False] * G.n
    order = []
    for start in sorted(range(G.n), key=lambda v: (-len(adj[v]), v)):
        if seen[start]:
            continue
        seen[start] = True
        queue = [start]
        i = 0
        while i < len(queue):
            x = queue[i]
            i += 1
            order.append(x)
            for y, _ in sorted(adj[x]):
                if not seen[y]:
                    seen[y] = True
                    queue.append(y)
    return order


# ---------------------------------------------------------------- tours and strolls

def _rooted_terms(inst: Instance, budget: OracleBudget):
    if inst.root is None:
        raise DomainError("tour/stroll oracles need a rooted instance")
    if inst.graph.n > budget.max_tour_vertices:
        raise CapacityError(f"{inst.graph.n} vertices exceed tour budget {budget.max_tour_vertices}")
    vp = inst.vertex_penalties()
    terms = [v for v in range(inst.graph.n) if v != inst.root and vp[v] > 0]
    return vp, terms


def _walk_solution(inst: Instance, hop, seq: list[int]) -> Solution:
    edges = []
    for a, b in zip(seq, seq[1:]):
        edges.extend(_path_edges(inst.graph, hop, a, b))
    return solution_cost(inst, edges)


def oracle_tour(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET) -> Solution:
    """Cheapest closed walk from the root plus penalties of unvisited vertices."""
    return _oracle_walk(inst, budget, closed=True)


def oracle_stroll(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET) -> Solution:
    """Cheapest open walk (free endpoints) through the root plus penalties."""
    return _oracle_walk(inst, budget, closed=False)


def _oracle_walk(inst: Instance, budget: OracleBudget, closed: bool) -> Solution:
    vp, terms = _rooted_terms(inst, budget)
    G, r = inst.graph, inst.root
    scale = _scale([e.cost for e in G.edges] + vp)
    cost = _int_costs(G, scale)
    dist, hop = _shortest_paths(G, cost)
    ipen = [int(p * scale) for p in vp]
    # points: terminals, plus the root as the last point for strolls
    pts = terms + ([] if closed else [r])
    k = len(pts)
    full = 1 << k
    f = [[INF] * k for _ in range(full)]
    back = [[-1] * k for _ in range(full)]
    for j, x in enumerate(pts):
        f[1 << j][j] = dist[r][x] if closed else 0
    for mask in range(1, full):
        row = f[mask]
        for j in range(k):
            cur = row[j]
            if cur == INF or not mask >> j & 1:
                continue
            dj = dist[pts[j]]
            for nxt in range(k):
                if mask >> nxt & 1:
                    continue
                m2 = mask | 1 << nxt
                val = cur + dj[pts[nxt]]
                if val < f[m2][nxt]:
                    f[m2][nxt] = val
                    back[m2][nxt] = j
    total_pen = sum(ipen[x] for x in terms)
    best = (total_pen, 0, -1)  # the trivial walk at the root
    for mask in range(1, full):
        if not closed and not mask >> (k - 1) & 1:
            continue
        pen = total_pen - sum(ipen[pts[j]] for j in range(k) if mask >> j & 1)
        for j in range(k):
            val = f[mask][j]
            if val == INF:
                continue
            if closed:
                val = val + dist[pts[j]][r]
            if val + pen < best[0]:
                best = (val + pen, mask, j)
    _, mask, j = best
    seq = []
    while j >= 0:
        seq.append(pts[j])
        pj = back[mask][j]
        mask ^= 1 << j
        j = pj
    seq.reverse()
    if closed:
        seq = [r] + seq + [r]
    sol = _walk_solution(inst, hop, seq)
    if sol.total * 1 != Fraction(best[0], scale):
        raise AssertionError("walk witness does not reproduce the oracle value")
    return sol


def oracle_pcst(inst: Instance, budget: OracleBudget = DEFAULT_BUDGET) -> Solution:
    """Rooted prize-collecting Steiner tree via exact Steiner trees on terminal subsets."""
    vp, terms = _rooted_terms(inst, OracleBudget(**{**budget.__dict__, "max_tour_vertices": 10**9}))
    G, r = inst.graph, inst.root
    if len(terms) + 1 > budget.max_terminals:
        raise CapacityError(f"{len(terms) + 1} terminals exceed budget {budget.max_terminals}")
    scale = _scale([e.cost for e in G.edges] + vp)
    cost = _int_costs(G, scale)
    dist, hop = _shortest_paths(G, cost)
    pts = terms + [r]
    dw = _DreyfusWagner(G, pts, cost, dist, hop)
    k = len(pts)
    ipen = [int(p * scale) for p in vp]
    total_pen = sum(ipen[x] for x in terms)
    best = None
    rbit = 1 << (k - 1)
    for mask in range(1 << (k - 1)):
        val = dw.value(mask | rbit)
        if val == INF:
            continue
        pen = total_pen - sum(ipen[terms[j]] for j in range(k - 1) if mask >> j & 1)
        if best is None or val + pen < best[0]:
            best = (val + pen, mask | rbit)
    edges = _spanning_forest(G, dw.edges(best[1]))
    return solution_cost(inst, edges)


# ---------------------------------------------------------------- vertex cover

def oracle_vertex_cover(n: int, edges: Iterable[tuple[int, int]],
                        max_vertices: int = 24) -> tuple[int, frozenset[int]]:
    """Minimum vertex cover by branch and bound."""
    if n > max_vertices:
        raise CapacityError(f"{n} vertices exceed vertex-cover budget {max_vertices}")
    E = [(u, v) for u, v in edges if u != v]
    best = [len({x for e in E for x in e}) + 1, frozenset(x for e in E for x in e)]

    def rec(rem, chosen):
        if len(chosen) >= best[0]:
            return
        if not rem:
            best[0], best[1] = len(chosen), frozenset(chosen)
            return
        # lower bound: greedy maximal matching
        used = set()
        lb = 0
        for u, v in rem:
            if u not in used and v not in used:
                used.update((u, v))
                lb += 1
        if len(chosen) + lb >= best[0]:
            return
        deg: dict[int, int] = {}
        for u, v in rem:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        x = max(sorted(deg), key=deg.__getitem__)
        rec([e for e in rem if x not in e], chosen | {x})
        nbrs = {v if u == x else u for u, v in rem if x in (u, v)}
        rec([e for e in rem if not (set(e) & nbrs)], chosen | nbrs)

    rec(E, frozenset())
    return best[0], best[1]
