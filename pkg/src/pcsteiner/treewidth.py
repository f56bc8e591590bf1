"""Tree decompositions and exact dynamic programs over nice decompositions.

Conventions used by the DPs (all on a nice decomposition whose root bag is
``{root}``):

* every edge is decided at the forget node of whichever endpoint is forgotten
  first, where the other endpoint is still in the bag;
* a vertex's penalty is paid at its forget node when it is left out;
* the state of a bag is the inclusion flag and connectivity part of every bag
  vertex, plus degree parities for walks.

Because each vertex is forgotten exactly once, join nodes just add costs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .core import DisjointSet, DomainError, Graph, Instance, Solution, solution_cost

# ---------------------------------------------------------------- decompositions


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]
    root: int = 0

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.bags]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(x) for x in adj]


@dataclass
class DecompositionReport:
    tree: list[str] = field(default_factory=list)
    uncovered_vertices: list[int] = field(default_factory=list)
    uncovered_edges: list[int] = field(default_factory=list)
    disconnected_vertices: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.tree or self.uncovered_vertices or self.uncovered_edges
                    or self.disconnected_vertices)


def validate_decomposition(G: Graph, td: TreeDecomposition) -> DecompositionReport:
    """Report violations of the tree property and the three covering conditions."""
    rep = DecompositionReport()
    k = len(td.bags)
    if k == 0:
        if G.n:
            rep.tree.append("no bags")
            rep.uncovered_vertices = list(range(G.n))
        return rep
    ds = DisjointSet(k)
    for a, b in td.edges:
        if not (0 <= a < k and 0 <= b < k):
            rep.tree.append(f"tree edge ({a},{b}) out of range")
        elif not ds.union(a, b):
            rep.tree.append(f"tree edge ({a},{b}) closes a cycle")
    if len({ds.find(i) for i in range(k)}) != 1:
        rep.tree.append("decomposition tree is disconnected")
    for b in td.bags:
        for v in b:
            if not 0 <= v < G.n:
                rep.tree.append(f"bag vertex {v} not in graph")
    covered = set().union(*td.bags)
    rep.uncovered_vertices = [v for v in range(G.n) if v not in covered]
    for eid, (u, v, _) in enumerate(G.edges):
        if not any(u in b and v in b for b in td.bags):
            rep.uncovered_edges.append(eid)
    adj = td.neighbors() if not rep.tree else None
    if adj is not None:
        for v in range(G.n):
            nodes = [i for i, b in enumerate(td.bags) if v in b]
            if not nodes:
                continue
            seen = {nodes[0]}
            stack = [nodes[0]]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if y not in seen and v in td.bags[y]:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(nodes):
                rep.disconnected_vertices.append(v)
    return rep


def heuristic_decompose(G: Graph) -> TreeDecomposition:
    """Min-degree elimination ordering (networkx), made connected and covering."""
    from networkx.algorithms.approximation import treewidth_min_degree

    import networkx as nx

    simple = nx.Graph()
    simple.add_nodes_from(range(G.n))
    simple.add_edges_from((u, v) for u, v, _ in G.edges)
    if G.n == 0:
        return TreeDecomposition((frozenset(),), ())
    _, tree = treewidth_min_degree(simple)
    nodes = sorted(tree.nodes, key=lambda b: (sorted(b), len(b)))
    index = {b: i for i, b in enumerate(nodes)}
    bags = [frozenset(b) for b in nodes]
    edges = sorted((min(index[a], index[b]), max(index[a], index[b])) for a, b in tree.edges)
    covered = set().union(*bags) if bags else set()
    for v in range(G.n):
        if v not in covered:
            bags.append(frozenset([v]))
    ds = DisjointSet(len(bags))
    for a, b in edges:
        ds.union(a, b)
    for i in range(1, len(bags)):
        if ds.union(0, i):
            edges.append((0, i))
    return TreeDecomposition(tuple(bags), tuple(edges))


# ---------------------------------------------------------------- PACE format

def write_pace(td: TreeDecomposition, n: int) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {n}"]
    for i, b in enumerate(td.bags):
        lines.append(" ".join(["b", str(i + 1)] + [str(v + 1) for v in sorted(b)]))
    for a, b in td.edges:
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


def read_pace(text: str) -> tuple[TreeDecomposition, int]:
    """Parse a ``.td`` file; returns the decomposition and the vertex count."""
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        try:
            if parts[0] == "s":
                if parts[1] != "td" or len(parts) != 5:
                    raise DomainError(f"bad header {line!r}")
                header = tuple(int(x) for x in parts[2:])
            elif parts[0] == "b":
                bags[int(parts[1]) - 1] = frozenset(int(x) - 1 for x in parts[2:])
            else:
                a, b = int(parts[0]) - 1, int(parts[1]) - 1
                edges.append((a, b))
        except (ValueError, IndexError) as exc:
            raise DomainError(f"cannot parse line {line!r}") from exc
    if header is None:
        raise DomainError("missing 's td' header")
    count, _, n = header
    if sorted(bags) != list(range(count)):
        raise DomainError("bag ids must be 1..N")
    return TreeDecomposition(tuple(bags[i] for i in range(count)), tuple(edges)), n


# ---------------------------------------------------------------- nice form

@dataclass(frozen=True)
class NiceNode:
    kind: str  # leaf | introduce | forget | join
    bag: frozenset[int]
    vertex: int | None = None
    children: tuple[int, ...] = ()


@dataclass(frozen=True)
class NiceDecomposition:
    """Nodes are stored children-first, so index order is a valid bottom-up order."""

    nodes: tuple[NiceNode, ...]
    root: int

    @property
    def width(self) -> int:
        return max(len(x.bag) for x in self.nodes) - 1

    def as_tree_decomposition(self) -> TreeDecomposition:
        edges = tuple((c, i) for i, x in enumerate(self.nodes) for c in x.children)
        return TreeDecomposition(tuple(x.bag for x in self.nodes), edges, self.root)


def validate_nice(G: Graph, nice: NiceDecomposition) -> list[str]:
    problems = []
    rep = validate_decomposition(G, nice.as_tree_decomposition())
    if not rep.ok:
        problems.append(f"not a tree decomposition: {rep}")
    if len(nice.nodes[nice.root].bag) != 1:
        problems.append("root bag is not a single vertex")
    for i, x in enumerate(nice.nodes):
        kids = [nice.nodes[c] for c in x.children]
        if any(c >= i for c in x.children):
            problems.append(f"node {i}: child stored after parent")
        if x.kind == "leaf":
            if kids or len(x.bag) > 1:
                problems.append(f"node {i}: bad leaf")
        elif x.kind == "introduce":
            if len(kids) != 1 or x.bag != kids[0].bag | {x.vertex} or x.vertex in kids[0].bag:
                problems.append(f"node {i}: bad introduce")
        elif x.kind == "forget":
            if len(kids) != 1 or x.bag != kids[0].bag - {x.vertex} or x.vertex not in kids[0].bag:
                problems.append(f"node {i}: bad forget")
        elif x.kind == "join":
            if len(kids) != 2 or any(k.bag != x.bag for k in kids):
                problems.append(f"node {i}: bad join")
        else:
            problems.append(f"node {i}: unknown kind {x.kind}")
    return problems


def to_nice(td: TreeDecomposition, root_vertex: int | None = None,
            root_node: int | None = None, G: Graph | None = None) -> NiceDecomposition:
    """Convert to nice form with root bag ``{root_vertex}``.

    The tree is rooted at ``root_node`` (default: the first node containing
    ``root_vertex``).  Join children are taken in increasing node order.
    """
    if G is not None:
        rep = validate_decomposition(G, td)
        if not rep.ok:
            raise DomainError(f"invalid tree decomposition: {rep}")
    if not td.bags:
        raise DomainError("empty decomposition")
    if root_vertex is None:
        root_vertex = min(set().union(*td.bags), default=None)
        if root_vertex is None:
            raise DomainError("decomposition has no vertices")
    holders = [i for i, b in enumerate(td.bags) if root_vertex in b]
    if not holders:
        raise DomainError(f"root vertex {root_vertex} in no bag")
    if root_node is None:
        root_node = holders[0]
    elif root_vertex not in td.bags[root_node]:
        raise DomainError("root node does not contain the root vertex")
    adj = td.neighbors()
    parent = {root_node: None}
    order = [root_node]
    for x in order:
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                order.append(y)
    if len(order) != len(td.bags):
        raise DomainError("decomposition tree is disconnected")
    children = {x: sorted(y for y in adj[x] if parent.get(y) == x) for x in order}

    nodes: list[NiceNode] = []

    def add(kind, bag, vertex=None, kids=()):
        nodes.append(NiceNode(kind, frozenset(bag), vertex, tuple(kids)))
        return len(nodes) - 1

    def move(top: int, src: frozenset, dst: frozenset) -> int:
        bag = set(src)
        for v in sorted(src - dst):
            bag.discard(v)
            top = add("forget", bag, v, (top,))
        for v in sorted(dst - src):
            bag.add(v)
            top = add("introduce", bag, v, (top,))
        return top

    built: dict[int, int] = {}
    for x in reversed(order):
        bag = td.bags[x]
        tops = [move(built[c], td.bags[c], bag) for c in children[x]]
        if not tops:
            if bag:
                first = min(bag)
                tops = [move(add("leaf", {first}), frozenset([first]), bag)]
            else:
                tops = [add("leaf", set())]
        acc = tops[0]
        for other in tops[1:]:
            acc = add("join", bag, None, (acc, other))
        built[x] = acc
    top = move(built[root_node], td.bags[root_node], frozenset([root_vertex]))
    return NiceDecomposition(tuple(nodes), top)


# ---------------------------------------------------------------- DP

@dataclass
class DPStats:
    states: int
    nodes: int
    width: int
    bound: int
    per_node_max: int

    @property
    def within_bound(self) -> bool:
        return self.states <= self.bound


def _canon(labels: Sequence[int]) -> tuple[int, ...]:
    relabel: dict[int, int] = {}
    out = []
    for l in labels:
        if l < 0:
            out.append(-1)
        else:
            if l not in relabel:
                relabel[l] = len(relabel)
            out.append(relabel[l])
    return tuple(out)


def _int_scale(values: Iterable[Fraction]) -> int:
    den = 1
    for x in values:
        den = den * x.denominator // math.gcd(den, x.denominator)
    return den


def _dp(inst: Instance, nice: NiceDecomposition, mode: str):
    if inst.root is None:
        raise DomainError("the DPs need a rooted instance")
    G, r = inst.graph, inst.root
    problems = validate_nice(G, nice)
    if problems:
        raise DomainError("invalid nice decomposition: " + "; ".join(problems[:3]))
    if nice.nodes[nice.root].bag != frozenset([r]):
        raise DomainError(f"root bag must be {{{r}}}; build it with to_nice(td, root_vertex={r})")
    vp = inst.vertex_penalties()
    scale = _int_scale([e.cost for e in G.edges] + vp)
    cost = [int(e.cost * scale) for e in G.edges]
    pen = [int(p * scale) for p in vp]
    walk = mode in ("tour", "stroll")
    mults = (0, 1, 2) if walk else (0, 1)

    forgotten_at: dict[int, int] = {}
    for i, x in enumerate(nice.nodes):
        if x.kind == "forget":
            if x.vertex in forgotten_at:
                raise DomainError(f"vertex {x.vertex} forgotten twice")
            forgotten_at[x.vertex] = i
    # edge -> node where it is decided
    charge: dict[int, list[tuple[int, int]]] = {}
    for eid, (u, v, _) in enumerate(G.edges):
        fu, fv = forgotten_at.get(u), forgotten_at.get(v)
        if fu is None and fv is None:
            raise DomainError(f"edge {eid} has no forgotten endpoint")
        if fv is None or (fu is not None and fu < fv):
            node, other = fu, v
        else:
            node, other = fv, u
        if other not in nice.nodes[nice.nodes[node].children[0]].bag:
            raise DomainError(f"edge {eid}: endpoint {other} missing at its forget node")
        charge.setdefault(node, []).append((eid, other))

    tables: list[dict] = [None] * len(nice.nodes)
    total_states = 0
    per_node_max = 0
    for i, x in enumerate(nice.nodes):
        bag = tuple(sorted(x.bag))
        table: dict = {}

        def put(key, val, back):
            cur = table.get(key)
            if cur is None or val < cur[0]:
                table[key] = (val, back)

        if x.kind == "leaf":
            z = (0,) * len(bag)
            put(((-1,) * len(bag), z, 0), 0, None)
            if bag:
                put(((0,), z, 0), 0, None)
        elif x.kind == "introduce":
            child = tables[x.children[0]]
            cbag = tuple(sorted(nice.nodes[x.children[0]].bag))
            pos = bag.index(x.vertex)
            for (labels, par, odd), (val, _) in child.items():
                lab = list(labels)
                p = list(par)
                lab.insert(pos, -1)
                p.insert(pos, 0)
                put((tuple(lab), tuple(p), odd), val, (labels, par, odd))
                lab[pos] = max(labels, default=-1) + 1
                put((_canon(lab), tuple(p), odd), val, (labels, par, odd))
        elif x.kind == "forget":
            child = tables[x.children[0]]
            cbag = tuple(sorted(nice.nodes[x.children[0]].bag))
            u = x.vertex
            iu = cbag.index(u)
            inc = [(eid, cbag.index(w)) for eid, w in charge.get(i, [])]
            for key, (val, _) in child.items():
                labels, par, odd = key
                if labels[iu] < 0:
                    put((labels[:iu] + labels[iu + 1:], par[:iu] + par[iu + 1:], odd),
                        val + pen[u], (key, ()))
                    continue
                usable = [(eid, j) for eid, j in inc if labels[j] >= 0]
                for choice in itertools.product(mults, repeat=len(usable)):
                    lab = list(labels)
                    p = list(par)
                    add = 0
                    ok = True
                    for (eid, j), mlt in zip(usable, choice):
                        if not mlt:
                            continue
                        a, b = lab[iu], lab[j]
                        if a == b and not walk:
                            ok = False
                            break
                        if a != b:
                            lab = [a if l == b else l for l in lab]
                        add += mlt * cost[eid]
                        if walk and mlt == 1:
                            p[iu] ^= 1
                            p[j] ^= 1
                    if not ok:
                        continue
                    mine = lab[iu]
                    if not any(lab[j] == mine for j in range(len(lab)) if j != iu):
                        continue  # u's component would be cut off from the root
                    o = odd
                    if walk:
                        if mode == "tour" and p[iu]:
                            continue
                        o += p[iu]
                        if o > 2:
                            continue
                    chosen = tuple((eid, mlt) for (eid, _), mlt in zip(usable, choice) if mlt)
                    put((_canon(lab[:iu] + lab[iu + 1:]), tuple(p[:iu] + p[iu + 1:]), o),
                        val + add, (key, chosen))
        elif x.kind == "join":
            left, right = tables[x.children[0]], tables[x.children[1]]
            by_mask: dict[tuple, list] = {}
            for key, (val, _) in right.items():
                by_mask.setdefault(tuple(l >= 0 for l in key[0]), []).append((key, val))
            for k1, (v1, _) in left.items():
                l1, p1, o1 = k1
                for k2, v2 in by_mask.get(tuple(l >= 0 for l in l1), ()):
                    l2, p2, o2 = k2
                    o = o1 + o2
                    if o > 2:
                        continue
                    lab = _join(l1, l2)
                    par = tuple(a ^ b for a, b in zip(p1, p2))
                    put((lab, par, o), v1 + v2, (k1, k2))
        else:
            raise DomainError(f"unknown node kind {x.kind}")
        tables[i] = table
        total_states += len(table)
        per_node_max = max(per_node_max, len(table))

    root_table = tables[nice.root]
    finals = []
    for key, (val, _) in root_table.items():
        labels, par, odd = key
        if labels[0] < 0:
            if odd == 0:
                finals.append((val, key))
        elif mode == "tree" or (mode == "tour" and par[0] == 0 and odd == 0) or \
                (mode == "stroll" and odd + par[0] in (0, 2)):
            finals.append((val, key))
    best_val, best_key = min(finals)

    edges = _reconstruct(nice, tables, best_key)
    bound = table_size_bound(nice)
    if walk:  # parities of bag vertices and the odd counter ride along
        bound *= 3 * 2 ** (nice.width + 1)
    stats = DPStats(total_states, len(nice.nodes), nice.width, bound, per_node_max)
    sol = solution_cost(inst, edges)
    if sol.total != Fraction(best_val, scale):
        raise AssertionError(f"DP witness costs {sol.total}, table says {Fraction(best_val, scale)}")
    return sol, stats


def _join(l1: tuple[int, ...], l2: tuple[int, ...]) -> tuple[int, ...]:
    n = len(l1)
    ds = DisjointSet(n)
    for labels in (l1, l2):
        first: dict[int, int] = {}
        for j, l in enumerate(labels):
            if l < 0:
                continue
            if l in first:
                ds.union(first[l], j)
            else:
                first[l] = j
    return _canon([ds.find(j) if l1[j] >= 0 else -1 for j in range(n)])


def _reconstruct(nice: NiceDecomposition, tables, key) -> list[int]:
    edges: list[int] = []
    stack = [(nice.root, key)]
    while stack:
        i, k = stack.pop()
        x = nice.nodes[i]
        _, back = tables[i][k]
        if x.kind == "leaf":
            continue
        if x.kind == "introduce":
            stack.append((x.children[0], back))
        elif x.kind == "forget":
            ck, chosen = back
            for eid, mlt in chosen:
                edges.extend([eid] * mlt)
            stack.append((x.children[0], ck))
        else:
            stack.append((x.children[0], back[0]))
            stack.append((x.children[1], back[1]))
    return sorted(edges)


def table_size_bound(nice: NiceDecomposition) -> int:
    """``|I| * 2^k * k^k`` with ``k`` the largest bag size."""
    k = nice.width + 1
    return len(nice.nodes) * (2 ** k) * (k ** k)


def dp_solve(inst: Instance, nice: NiceDecomposition, mode: str = "tree"):
    """Run one DP; returns ``(Solution, DPStats)``.  ``mode`` is tree, tour or stroll."""
    if mode not in ("tree", "tour", "stroll"):
        raise DomainError(f"unknown DP mode {mode!r}")
    return _dp(inst, nice, mode)


def dp_pcst(inst: Instance, nice: NiceDecomposition) -> Solution:
    return _dp(inst, nice, "tree")[0]


def dp_pctsp(inst: Instance, nice: NiceDecomposition) -> Solution:
    return _dp(inst, nice, "tour")[0]


def dp_pcs(inst: Instance, nice: NiceDecomposition) -> Solution:
    return _dp(inst, nice, "stroll")[0]


def nice_for(inst: Instance, td: TreeDecomposition | None = None,
             root_node: int | None = None) -> NiceDecomposition:
    """Nice decomposition rooted at the instance root (heuristic if ``td`` is None)."""
    if inst.root is None:
        raise DomainError("instance is not rooted")
    td = td or heuristic_decompose(inst.graph)
    return to_nice(td, inst.root, root_node, inst.graph)
