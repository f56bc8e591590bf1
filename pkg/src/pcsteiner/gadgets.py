"""Instance generators: vertex-cover gadgets, the Euclidean gadget and random families."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

from .core import (AdditivePenalty, CappedPenalty, CapacityError, DomainError, Graph,
                   Instance, Solution, components, solution_cost)

# ---------------------------------------------------------------- named cubic graphs


def k4() -> Graph:
    return Graph(4, tuple((u, v, 1) for u in range(4) for v in range(u + 1, 4)))


def k33() -> Graph:
    return Graph(6, tuple((u, v, 1) for u in range(3) for v in range(3, 6)))


def prism() -> Graph:
    ring = [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]
    return Graph(6, tuple((u, v, 1) for u, v in ring))


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, tuple((u, v, 1) for u, v in outer + spokes + inner))


NAMED_GRAPHS = {"k4": k4, "k33": k33, "prism": prism, "petersen": petersen}


def _check_cubic(G: Graph):
    seen = set()
    deg = [0] * G.n
    for u, v, _ in G.edges:
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DomainError("source graph must be simple")
        seen.add(key)
        deg[u] += 1
        deg[v] += 1
    if any(d != 3 for d in deg):
        raise DomainError("source graph must be 3-regular")


# ---------------------------------------------------------------- vertex-cover gadget

@dataclass(frozen=True)
class VcGadget:
    source: Graph
    instance: Instance
    w: int
    a: tuple[int, ...]
    b: tuple[int, ...]
    c1: tuple[int, ...]
    c2: tuple[int, ...]
    spoke: tuple[int, ...]                       # edge id of {w, a_i}
    block: tuple[tuple[int, int, int, int], ...]  # ids of {w,c1},{w,c2},{c1,b},{c2,b}

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def m(self) -> int:
        return self.source.m

    def a_demands(self, i: int) -> list[int]:
        """Ids of the three demands containing ``a_i``."""
        a = self.a[i]
        return [d for d, (s, t) in enumerate(self.instance.demands) if a in (s, t)]

    def frontier_order(self) -> list[int]:
        """Vertex order that keeps the frontier oracle small on this gadget.

        Each ``a_i`` is placed just before the first block that mentions it,
        and blocks follow a breadth-first order of the source graph.
        """
        src = self.source
        adj = src.adjacency()
        seen = [False] * src.n
        vorder = []
        for s in range(src.n):
            if seen[s]:
                continue
            seen[s] = True
            queue = [s]
            for x in queue:
                vorder.append(x)
                for y, _ in sorted(adj[x]):
                    if not seen[y]:
                        seen[y] = True
                        queue.append(y)
        pos = {v: i for i, v in enumerate(vorder)}
        edges = sorted(range(src.m), key=lambda j: (max(pos[src.edges[j].u], pos[src.edges[j].v]),
                                                   min(pos[src.edges[j].u], pos[src.edges[j].v]), j))
        order = [self.w]
        placed = set()
        for j in edges:
            u, v, _ = src.edges[j]
            for x in sorted((u, v), key=pos.__getitem__):
                if x not in placed:
                    placed.add(x)
                    order.append(self.a[x])
            order += [self.c1[j], self.c2[j], self.b[j]]
        for i in range(src.n):
            if i not in placed:
                order.append(self.a[i])
        return order


def gen_vc_gadget(G: Graph) -> VcGadget:
    """Prize-collecting Steiner forest instance whose optimum is 2m + 2n + tau(G)."""
    _check_cubic(G)
    n, m = G.n, G.m
    w = 0
    a = tuple(1 + i for i in range(n))
    b = tuple(1 + n + 3 * j for j in range(m))
    c1 = tuple(x + 1 for x in b)
    c2 = tuple(x + 2 for x in b)
    edges = [(w, a[i], 2) for i in range(n)]
    spoke = tuple(range(n))
    block = []
    for j in range(m):
        base = len(edges)
        edges += [(w, c1[j], 1), (w, c2[j], 1), (c1[j], b[j], 1), (c2[j], b[j], 1)]
        block.append((base, base + 1, base + 2, base + 3))
    demands = [(w, b[j]) for j in range(m)]
    pen = [3] * m
    for j, (x, y, _) in enumerate(G.edges):
        demands += [(a[x], c1[j]), (a[y], c2[j])]
        pen += [1, 1]
    H = Graph(1 + n + 3 * m, tuple(edges))
    inst = Instance(H, tuple(demands), AdditivePenalty(tuple(pen)))
    return VcGadget(G, inst, w, a, b, c1, c2, spoke, tuple(block))


def solution_from_cover(g: VcGadget, cover) -> Solution:
    """The tree built from a vertex cover; it costs 2m + 2n + |cover|."""
    cover = set(cover)
    edges = [g.spoke[i] for i in range(g.n) if i not in cover]
    for j, (x, _, _) in enumerate(g.source.edges):
        wc1, wc2, c1b, c2b = g.block[j]
        edges += [wc2, c2b] if x in cover else [wc1, c1b]
    return solution_cost(g.instance, edges)


def _reach_w(g: VcGadget, edges) -> list[int]:
    E = g.instance.graph.edges
    return components(g.instance.graph.n, ((E[e].u, E[e].v) for e in edges))


def normalize_solution(g: VcGadget, sol: Solution) -> Solution:
    """Apply the three exchange steps; the cost never increases."""
    F = set(sol.edges)
    comp = _reach_w(g, F)
    for j in range(g.m):
        if comp[g.b[j]] != comp[g.w]:
            F |= {g.block[j][0], g.block[j][2]}
    comp = _reach_w(g, F)
    for j, (x, y, _) in enumerate(g.source.edges):
        if comp[g.c1[j]] == comp[g.w] and comp[g.c2[j]] == comp[g.w]:
            use_second = (g.spoke[y] in F) and (g.spoke[x] not in F)
            F -= set(g.block[j])
            F |= {g.block[j][1], g.block[j][3]} if use_second else {g.block[j][0], g.block[j][2]}
    sat = _satisfied(g, F)
    for i in range(g.n):
        if g.spoke[i] in F and not all(d in sat for d in g.a_demands(i)):
            F.discard(g.spoke[i])
    out = solution_cost(g.instance, F)
    if out.total > sol.total:
        raise AssertionError(f"normalization raised the cost from {sol.total} to {out.total}")
    return out


def _satisfied(g: VcGadget, F) -> frozenset[int]:
    comp = _reach_w(g, F)
    return frozenset(d for d, (s, t) in enumerate(g.instance.demands) if comp[s] == comp[t])


def cover_from_solution(g: VcGadget, sol: Solution) -> frozenset[int]:
    """Vertex cover of the source graph read off a (normalized) gadget solution."""
    norm = normalize_solution(g, sol)
    F = set(norm.edges)
    cover = frozenset(i for i in range(g.n) if g.spoke[i] not in F)
    for x, y, _ in g.source.edges:
        if x not in cover and y not in cover:
            raise AssertionError(f"extracted set misses source edge ({x},{y})")
    bound = sol.total - 2 * g.m - 2 * g.n
    if len(cover) > bound:
        raise AssertionError(f"cover of size {len(cover)} exceeds {bound}")
    return cover


@dataclass
class GadgetCheck:
    optimum: Fraction
    formula: int
    tau: int
    equal: bool
    cover: frozenset[int]
    solution: Solution


def gadget_optimum_check(g: VcGadget, budget=None) -> GadgetCheck:
    """Exact optimum versus 2m + 2n + tau, plus the cover read off the optimum."""
    from .oracle import DEFAULT_BUDGET, oracle_spcsf, oracle_vertex_cover

    budget = budget or DEFAULT_BUDGET
    tau, _ = oracle_vertex_cover(g.n, [(u, v) for u, v, _ in g.source.edges])
    sol = oracle_spcsf(g.instance, "frontier", budget, order=g.frontier_order())
    formula = 2 * g.m + 2 * g.n + tau
    cover = cover_from_solution(g, sol)
    return GadgetCheck(sol.total, formula, tau, sol.total == formula, cover, sol)


# ---------------------------------------------------------------- Euclidean gadget

@dataclass(frozen=True)
class EuclideanGadget:
    """Point set and demands of the Euclidean construction, streamed lazily.

    Coordinates and penalties are divided by ``divisor``.  Point indices:
    the vertical column first (bottom to top), then the rows at ``iV``, then
    the two rows per source edge, then a, b, c1, c2.
    """

    source: Graph
    unit: int
    divisor: Fraction

    @property
    def H(self) -> int:
        return 10 * self.unit

    @property
    def V(self) -> int:
        return 100 * self.unit

    @property
    def z_count(self) -> int:
        n, m = self.source.n, self.source.m
        return (n + m) * self.V + 1 + (n + 2 * m) * self.H

    @property
    def point_count(self) -> int:
        return self.z_count + self.source.n + 3 * self.source.m

    @property
    def demand_count(self) -> int:
        """Lattice demands of a tree on Z, plus m + 2m special demands."""
        return self.z_count - 1 + 3 * self.source.m

    @property
    def stated_demand_count(self) -> int:
        """The closed form quoted with the construction, kept for comparison."""
        n, m = self.source.n, self.source.m
        return self.z_count - 1 + n + 3 * m

    # index helpers
    def _col(self, y: int) -> int:
        return y + self.source.m * self.V

    def _vrow(self, i: int, x: int) -> int:
        base = (self.source.n + self.source.m) * self.V + 1
        return base + (i - 1) * self.H + (x - 1)

    def _erow(self, j: int, upper: bool, x: int) -> int:
        base = (self.source.n + self.source.m) * self.V + 1 + self.source.n * self.H
        return base + (j - 1) * 2 * self.H + (self.H if upper else 0) + (x - 1)

    def _z(self, x: int, y: int, row) -> int:
        return self._col(y) if x == 0 else row(x)

    def special(self, kind: str, idx: int) -> int:
        n, m = self.source.n, self.source.m
        off = {"a": 0, "b": n, "c1": n + m, "c2": n + 2 * m}[kind]
        return self.z_count + off + idx

    def _pt(self, x: int, y: int):
        return (Fraction(x) / self.divisor, Fraction(y) / self.divisor)

    def iter_points(self) -> Iterator[tuple[Fraction, Fraction]]:
        n, m, U, H, V = self.source.n, self.source.m, self.unit, self.H, self.V
        for y in range(-m * V, n * V + 1):
            yield self._pt(0, y)
        for i in range(1, n + 1):
            for x in range(1, H + 1):
                yield self._pt(x, i * V)
        for j in range(1, m + 1):
            for y in (-j * V, -j * V + 4 * U):
                for x in range(1, H + 1):
                    yield self._pt(x, y)
        for i in range(1, n + 1):
            yield self._pt(H + 2 * U, i * V)
        for j in range(1, m + 1):
            yield self._pt(H, -j * V + 2 * U)
        for j in range(1, m + 1):
            yield self._pt(H, -j * V + U)
        for j in range(1, m + 1):
            yield self._pt(H, -j * V + 3 * U)

    def iter_demands(self) -> Iterator[tuple[int, int, Fraction]]:
        n, m, U, H, V = self.source.n, self.source.m, self.unit, self.H, self.V
        unit_pen = Fraction(1) / self.divisor
        for y in range(-m * V, n * V):
            yield self._col(y), self._col(y + 1), unit_pen
        rows = [(i * V, lambda x, i=i: self._vrow(i, x)) for i in range(1, n + 1)]
        for j in range(1, m + 1):
            rows.append((-j * V, lambda x, j=j: self._erow(j, False, x)))
            rows.append((-j * V + 4 * U, lambda x, j=j: self._erow(j, True, x)))
        for y, row in rows:
            for x in range(H):
                yield self._z(x, y, row), self._z(x + 1, y, row), unit_pen
        origin = self._col(0)
        for j in range(m):
            yield origin, self.special("b", j), Fraction(3 * U) / self.divisor
        for j, (x, y, _) in enumerate(self.source.edges):
            yield self.special("a", x), self.special("c1", j), Fraction(U - 10) / self.divisor
            yield self.special("a", y), self.special("c2", j), Fraction(U - 10) / self.divisor

    def iter_edges(self, max_points: int = 3000) -> Iterator[tuple[int, int, Fraction]]:
        """Complete graph as ``(i, j, squared distance)``; refuses large point sets."""
        if self.point_count > max_points:
            raise CapacityError(f"{self.point_count} points exceed materialization budget {max_points}")
        pts = list(self.iter_points())
        for i in range(len(pts)):
            xi, yi = pts[i]
            for j in range(i + 1, len(pts)):
                xj, yj = pts[j]
                yield i, j, (xi - xj) ** 2 + (yi - yj) ** 2

    def to_json(self, max_points: int = 200_000) -> dict:
        if self.point_count > max_points:
            raise CapacityError(f"{self.point_count} points exceed JSON budget {max_points}")
        demands = list(self.iter_demands())
        return {
            "metric": "euclidean",
            "vertices": self.point_count,
            "points": [[str(x), str(y)] for x, y in self.iter_points()],
            "edges": [],
            "demands": [[s, t] for s, t, _ in demands],
            "penalty": {"kind": "additive", "p": [str(p) for _, _, p in demands]},
            "unit": self.unit,
            "divisor": str(self.divisor),
        }


def gen_euclidean_gadget(G: Graph, divisor=1, unit: int | None = None) -> EuclideanGadget:
    """Euclidean construction; ``unit`` defaults to 10000(n+m)."""
    _check_cubic(G)
    U = unit if unit is not None else 10000 * (G.n + G.m)
    if U <= 10:
        raise DomainError("unit must exceed 10 so that U - 10 is positive")
    s = Fraction(divisor)
    if s < 1:
        raise DomainError("scale divisor must be at least 1")
    return EuclideanGadget(G, U, s)


# ---------------------------------------------------------------- random instances

def _grid(rows: int, cols: int):
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return rows * cols, edges


def _series_parallel(n: int, rng: random.Random):
    edges = [(0, 1)]
    nv = 2
    while nv < n:
        i = rng.randrange(len(edges))
        u, v = edges[i]
        x = nv
        nv += 1
        if rng.random() < 0.5:
            edges[i] = (u, x)
            edges.append((x, v))
        else:
            edges += [(u, x), (x, v)]
    return max(nv, n), edges


def _erdos_renyi(n: int, p: float, rng: random.Random):
    return n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]


def gen_random(kind: str, params: Mapping | None = None, seed: int = 0) -> Instance:
    """Seeded random instance.

    ``kind`` is grid (rows, cols), series-parallel (n) or erdos-renyi (n, p).
    Other params: ``demands`` (count, default 4), ``penalty`` (additive or
    capped), ``max_cost`` (5), ``max_penalty`` (8), ``denominator`` (1),
    ``zero_cost`` (probability of a free edge, 0) and ``rooted`` (demands
    become (root, v) pairs with root 0).
    """
    p = dict(params or {})
    rng = random.Random(seed)
    if kind == "grid":
        n, pairs = _grid(int(p.get("rows", 3)), int(p.get("cols", 3)))
    elif kind in ("series-parallel", "sp"):
        n, pairs = _series_parallel(int(p.get("n", 8)), rng)
    elif kind in ("erdos-renyi", "er"):
        n, pairs = _erdos_renyi(int(p.get("n", 8)), float(p.get("p", 0.3)), rng)
    else:
        raise DomainError(f"unknown random kind {kind!r}")
    den = int(p.get("denominator", 1))
    max_cost = int(p.get("max_cost", 5))
    zero = float(p.get("zero_cost", 0))
    edges = []
    for u, v in pairs:
        c = 0 if rng.random() < zero else rng.randint(1, max_cost * den)
        edges.append((u, v, Fraction(c, den)))
    G = Graph(n, tuple(edges))
    k = int(p.get("demands", 4))
    rooted = bool(p.get("rooted", False))
    demands = []
    if rooted:
        others = list(range(1, n))
        rng.shuffle(others)
        demands = [(0, v) for v in sorted(others[:min(k, len(others))])]
    elif n >= 2:
        for _ in range(k):
            s, t = rng.sample(range(n), 2)
            demands.append((s, t))
    max_pen = int(p.get("max_penalty", 8))
    pen = [Fraction(rng.randint(0, max_pen * den), den) for _ in demands]
    if p.get("penalty", "additive") == "capped":
        cap = Fraction(rng.randint(1, max(1, int(sum(pen)) or 1) * den), den)
        pi = CappedPenalty(tuple(pen), cap)
    else:
        pi = AdditivePenalty(tuple(pen))
    return Instance(G, tuple(demands), pi, 0 if rooted else None)

