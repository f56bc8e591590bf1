"""Instance model: graphs, demands, penalty functions, solutions and JSON I/O.

All numeric quantities are :class:`fractions.Fraction`.
"""

from __future__ import annotations

import itertools
import json
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence

log = logging.getLogger(__name__)


class DomainError(ValueError):
    """Input violates an operation's precondition."""


class CapacityError(RuntimeError):
    """Input exceeds the budget of an exhaustive backend."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise DomainError(f"refusing float {value!r}; pass an int, string or Fraction")
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"not a rational: {value!r}") from exc


def fraction_str(x: Fraction) -> str:
    return str(x)


# ---------------------------------------------------------------- graph

class Edge(NamedTuple):
    u: int
    v: int
    cost: Fraction


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices ``0..n-1``; edge ids are list positions."""

    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("negative vertex count")
        clean = []
        for e in self.edges:
            u, v, c = int(e[0]), int(e[1]), as_fraction(e[2])
            if u == v:
                raise DomainError(f"self-loop at {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise DomainError(f"edge ({u},{v}) outside 0..{self.n - 1}")
            if c < 0:
                raise DomainError(f"negative cost on edge ({u},{v})")
            clean.append(Edge(u, v, c))
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def m(self) -> int:
        return len(self.edges)

    def cost(self, eid: int) -> Fraction:
        return self.edges[eid].cost

    def length(self, edge_ids: Iterable[int]) -> Fraction:
        return sum((self.edges[e].cost for e in edge_ids), Fraction(0))

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per vertex, a list of ``(neighbor, edge_id)``."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return adj

    def with_costs(self, costs: Mapping[int, Fraction]) -> "Graph":
        """Copy with some edge costs replaced (edge ids preserved)."""
        return Graph(self.n, tuple(
            Edge(u, v, as_fraction(costs[i]) if i in costs else c)
            for i, (u, v, c) in enumerate(self.edges)))

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        for i, (u, v, c) in enumerate(self.edges):
            if g.has_edge(u, v) and g[u][v]["cost"] <= c:
                continue
            g.add_edge(u, v, cost=c, id=i)
        return g


class DisjointSet:
    """Union-find over ``0..n-1`` with path halving."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if ra < rb:
            ra, rb = rb, ra
        self.parent[ra] = rb
        return True


def components(n: int, pairs: Iterable[tuple[int, int]]) -> list[int]:
    """Component label (smallest member) of each vertex."""
    ds = DisjointSet(n)
    for u, v in pairs:
        ds.union(u, v)
    return [ds.find(x) for x in range(n)]


# ---------------------------------------------------------------- penalties

def _ids(D: Iterable[int]) -> frozenset[int]:
    return D if isinstance(D, frozenset) else frozenset(D)


class PenaltyFn:
    """Monotone submodular set function over demand ids ``0..k-1``.

    Subclasses implement :meth:`_value`; callers use :meth:`__call__`, which
    checks the argument against the ground set.
    """

    kind = "abstract"
    size: int
    offset: Fraction = Fraction(0)

    def __call__(self, D: Iterable[int] = ()) -> Fraction:
        D = _ids(D)
        for d in D:
            if not 0 <= d < self.size:
                raise DomainError(f"demand {d} outside ground set of size {self.size}")
        return self._value(D)

    def _value(self, D: frozenset[int]) -> Fraction:
        raise NotImplementedError

    @property
    def ground(self) -> frozenset[int]:
        return frozenset(range(self.size))

    def tabulate(self) -> "TablePenalty":
        if self.size > 20:
            raise CapacityError(f"cannot tabulate a ground set of {self.size}")
        values = {}
        for mask in range(1 << self.size):
            D = frozenset(i for i in range(self.size) if mask >> i & 1)
            values[D] = self._value(D)
        return TablePenalty(self.size, values)

    def restrict(self, keep: Sequence[int]) -> "PenaltyFn":
        """Penalty on ``keep`` (re-indexed in the given order), π restricted."""
        return _Restricted(self, tuple(keep))

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AdditivePenalty(PenaltyFn):
    p: tuple[Fraction, ...]
    kind = "additive"

    def __post_init__(self):
        p = tuple(as_fraction(x) for x in self.p)
        if any(x < 0 for x in p):
            raise DomainError("negative penalty")
        object.__setattr__(self, "p", p)

    @property
    def size(self) -> int:
        return len(self.p)

    def _value(self, D):
        return sum((self.p[d] for d in D), Fraction(0))

    def restrict(self, keep):
        return AdditivePenalty(tuple(self.p[d] for d in keep))

    def to_json(self):
        return {"kind": "additive", "p": [fraction_str(x) for x in self.p]}


@dataclass(frozen=True, eq=False)
class CappedPenalty(PenaltyFn):
    """``min(sum of p_d, cap)``."""

    p: tuple[Fraction, ...]
    cap: Fraction
    kind = "capped"

    def __post_init__(self):
        p = tuple(as_fraction(x) for x in self.p)
        cap = as_fraction(self.cap)
        if any(x < 0 for x in p) or cap < 0:
            raise DomainError("negative penalty")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "cap", cap)

    @property
    def size(self) -> int:
        return len(self.p)

    def _value(self, D):
        return min(sum((self.p[d] for d in D), Fraction(0)), self.cap)

    def restrict(self, keep):
        return CappedPenalty(tuple(self.p[d] for d in keep), self.cap)

    def to_json(self):
        return {"kind": "capped", "p": [fraction_str(x) for x in self.p],
                "cap": fraction_str(self.cap)}


class TablePenalty(PenaltyFn):
    """Explicit value per subset (ground set at most 20).

    A positive value on the empty set is subtracted from every entry and kept
    in :attr:`offset`.
    """

    kind = "table"

    def __init__(self, size: int, values: Mapping[Iterable[int], object]):
        if size > 20:
            raise CapacityError(f"explicit table over {size} demands (limit 20)")
        self.size = size
        table = {}
        for key, val in values.items():
            table[frozenset(key)] = as_fraction(val)
        missing = 1 << size
        for mask in range(1 << size):
            D = frozenset(i for i in range(size) if mask >> i & 1)
            if D in table:
                missing -= 1
        if missing:
            raise DomainError(f"table is missing {missing} subsets")
        base = table[frozenset()]
        if base < 0:
            raise DomainError("negative penalty on the empty set")
        if base:
            log.warning("penalty table has pi(empty)=%s; normalizing", base)
            table = {k: v - base for k, v in table.items()}
        if any(v < 0 for v in table.values()):
            raise DomainError("negative penalty")
        self.offset = base
        self.values = table

    def _value(self, D):
        return self.values[D]

    def to_json(self):
        vals = {}
        for D in sorted(self.values, key=lambda s: (len(s), sorted(s))):
            vals[",".join(map(str, sorted(D)))] = fraction_str(self.values[D] + self.offset)
        return {"kind": "table", "size": self.size, "values": vals}


class ScaledPenalty(PenaltyFn):
    """``factor * base``."""

    kind = "scaled"

    def __init__(self, base: PenaltyFn, factor):
        self.base = base
        self.factor = as_fraction(factor)
        if self.factor < 0:
            raise DomainError("negative scaling factor")
        self.size = base.size

    def _value(self, D):
        return self.factor * self.base._value(D)

    def to_json(self):
        return {"kind": "scaled", "factor": fraction_str(self.factor),
                "base": self.base.to_json()}


class RestrictedPenalty(PenaltyFn):
    """``base(D | fixed) - base(fixed)`` on the full ground set.

    Demands in ``fixed`` have zero marginal penalty, so an instance carrying
    this function is the instance on the remaining demands; :attr:`offset`
    holds the constant ``base(fixed)``.
    """

    kind = "restricted"

    def __init__(self, base: PenaltyFn, fixed: Iterable[int]):
        self.base = base
        self.fixed = frozenset(fixed)
        self.size = base.size
        self.offset = base._value(self.fixed)

    def _value(self, D):
        return self.base._value(D | self.fixed) - self.offset

    def to_json(self):
        return {"kind": "restricted", "fixed": sorted(self.fixed),
                "base": self.base.to_json()}


class _Restricted(PenaltyFn):
    kind = "subset"

    def __init__(self, base: PenaltyFn, keep: tuple[int, ...]):
        self.base = base
        self.keep = keep
        self.size = len(keep)

    def _value(self, D):
        return self.base._value(frozenset(self.keep[d] for d in D))

    def to_json(self):
        return self.tabulate().to_json()


def penalty_eval(pi: PenaltyFn, D: Iterable[int]) -> Fraction:
    return pi(D)


def penalty_from_json(obj: Mapping) -> PenaltyFn:
    kind = obj.get("kind")
    if kind == "additive":
        return AdditivePenalty(tuple(obj["p"]))
    if kind == "capped":
        return CappedPenalty(tuple(obj["p"]), obj["cap"])
    if kind == "table":
        size = int(obj["size"])
        values = {}
        for key, val in obj["values"].items():
            values[frozenset(int(x) for x in key.split(",") if x != "")] = val
        return TablePenalty(size, values)
    if kind == "scaled":
        return ScaledPenalty(penalty_from_json(obj["base"]), obj["factor"])
    if kind == "restricted":
        return RestrictedPenalty(penalty_from_json(obj["base"]), obj["fixed"])
    raise DomainError(f"unknown penalty kind {kind!r}")


@dataclass
class AxiomReport:
    monotonicity: list[tuple[frozenset, frozenset]] = field(default_factory=list)
    submodularity: list[tuple[frozenset, frozenset]] = field(default_factory=list)
    pairs_checked: int = 0
    exhaustive: bool = True

    @property
    def ok(self) -> bool:
        return not self.monotonicity and not self.submodularity

    def __bool__(self):  # truthy iff a violation was found
        return not self.ok


def check_penalty_axioms(pi: PenaltyFn, samples: int = 20000, seed: int = 0) -> AxiomReport:
    """Exhaustive over all pairs (A, B) for ground sets up to 12, sampled otherwise."""
    k = pi.size
    report = AxiomReport(exhaustive=k <= 12)
    if k <= 12:
        subsets = [frozenset(i for i in range(k) if mask >> i & 1) for mask in range(1 << k)]
        value = {S: pi._value(S) for S in subsets}
        pairs: Iterable = itertools.product(subsets, repeat=2)
    else:
        rng = random.Random(seed)
        value = {}

        def draw():
            return frozenset(i for i in range(k) if rng.random() < 0.5)

        pairs = ((draw(), draw()) for _ in range(samples))

    def f(S):
        if S not in value:
            value[S] = pi._value(S)
        return value[S]

    for A, B in pairs:
        report.pairs_checked += 1
        if A <= B and f(A) > f(B):
            report.monotonicity.append((A, B))
        if f(A) + f(B) < f(A | B) + f(A & B):
            report.submodularity.append((A, B))
    if pi._value(frozenset()) != 0:
        report.monotonicity.append((frozenset(), frozenset()))
    return report


# ---------------------------------------------------------------- instances

class Demand(NamedTuple):
    s: int
    t: int


@dataclass(frozen=True)
class Instance:
    """The triple (graph, demands, penalty), optionally rooted."""

    graph: Graph
    demands: tuple[Demand, ...]
    penalty: PenaltyFn
    root: int | None = None

    def __post_init__(self):
        dem = tuple(Demand(int(s), int(t)) for s, t in self.demands)
        object.__setattr__(self, "demands", dem)
        n = self.graph.n
        for s, t in dem:
            if not (0 <= s < n and 0 <= t < n):
                raise DomainError(f"demand ({s},{t}) outside the vertex range")
            if s == t:
                raise DomainError("demand with s == t; use Instance.build to strip it")
        if self.penalty.size != len(dem):
            raise DomainError(
                f"penalty ground set {self.penalty.size} != {len(dem)} demands")
        if self.root is not None:
            if not 0 <= self.root < n:
                raise DomainError("root outside the vertex range")
            for s, t in dem:
                if self.root not in (s, t):
                    raise DomainError(f"demand ({s},{t}) does not contain root {self.root}")

    @classmethod
    def build(cls, graph: Graph, demands, penalty: PenaltyFn, root: int | None = None):
        """Construct, dropping pre-satisfied ``s == t`` demands with a warning."""
        demands = [Demand(int(s), int(t)) for s, t in demands]
        keep = [i for i, (s, t) in enumerate(demands) if s != t]
        if len(keep) < len(demands):
            log.warning("stripping %d demand(s) with s == t", len(demands) - len(keep))
            penalty = penalty.restrict(keep)
            demands = [demands[i] for i in keep]
        return cls(graph, tuple(demands), penalty, root)

    @property
    def k(self) -> int:
        return len(self.demands)

    def terminals(self) -> list[int]:
        return sorted({x for d in self.demands for x in d})

    def with_graph(self, graph: Graph) -> "Instance":
        return Instance(graph, self.demands, self.penalty, self.root)

    def with_penalty(self, penalty: PenaltyFn) -> "Instance":
        return Instance(self.graph, self.demands, penalty, self.root)

    def vertex_penalties(self) -> list[Fraction]:
        """Per-vertex penalty of a rooted additive instance."""
        if self.root is None:
            raise DomainError("instance is not rooted")
        if not isinstance(self.penalty, AdditivePenalty):
            raise DomainError("vertex penalties need an additive penalty function")
        out = [Fraction(0)] * self.graph.n
        for (s, t), p in zip(self.demands, self.penalty.p):
            out[t if s == self.root else s] += p
        return out


@dataclass(frozen=True)
class Solution:
    """Edge multiset with its cost breakdown.

    ``edges`` may repeat an id for tour or stroll solutions; ``length`` counts
    multiplicity.
    """

    edges: tuple[int, ...]
    satisfied: frozenset[int]
    length: Fraction
    penalty: Fraction
    total: Fraction

    def to_json(self) -> dict:
        return {"total": fraction_str(self.total), "length": fraction_str(self.length),
                "penalty": fraction_str(self.penalty),
                "satisfied": sorted(self.satisfied), "witness_edges": list(self.edges)}


def satisfied_by(inst: Instance, edge_ids: Iterable[int]) -> frozenset[int]:
    E = inst.graph.edges
    comp = components(inst.graph.n, ((E[e].u, E[e].v) for e in set(edge_ids)))
    return frozenset(i for i, (s, t) in enumerate(inst.demands) if comp[s] == comp[t])


def solution_cost(inst: Instance, edge_ids: Iterable[int]) -> Solution:
    """Cost breakdown of an edge set (or multiset)."""
    edges = tuple(edge_ids)
    for e in edges:
        if not 0 <= e < inst.graph.m:
            raise DomainError(f"edge id {e} not in graph")
    sat = satisfied_by(inst, edges)
    unsat = frozenset(range(inst.k)) - sat
    length = inst.graph.length(edges)
    penalty = inst.penalty(unsat)
    return Solution(tuple(sorted(edges)), sat, length, penalty, length + penalty)


# ---------------------------------------------------------------- JSON

def instance_to_json(inst: Instance) -> dict:
    obj = {
        "vertices": inst.graph.n,
        "edges": [[u, v, fraction_str(c)] for u, v, c in inst.graph.edges],
        "demands": [[s, t] for s, t in inst.demands],
        "penalty": inst.penalty.to_json(),
    }
    if inst.root is not None:
        obj["root"] = inst.root
    return obj


def instance_from_json(obj: Mapping) -> Instance:
    try:
        graph = Graph(int(obj["vertices"]), tuple(Edge(int(u), int(v), as_fraction(c))
                                                  for u, v, c in obj["edges"]))
        penalty = penalty_from_json(obj["penalty"])
        return Instance.build(graph, [tuple(d) for d in obj["demands"]], penalty,
                              obj.get("root"))
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed instance: {exc}") from exc


def dumps(obj) -> str:
    """Canonical JSON text (sorted keys, compact separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def dump_instance(inst: Instance) -> str:
    return dumps(instance_to_json(inst))


def load_instance(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"not JSON: {exc}") from exc
    return instance_from_json(obj)


def iter_subsets(items: Sequence[int]) -> Iterator[frozenset[int]]:
    for r in range(len(items) + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)
