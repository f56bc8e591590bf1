import json
import random
from fractions import Fraction as Fr

import pytest

from pcsteiner.core import DomainError, Graph, CapacityError, solution_cost
from pcsteiner.gadgets import (NAMED_GRAPHS, cover_from_solution, gen_euclidean_gadget,
                               gen_random, gen_vc_gadget, k4, petersen, solution_from_cover)
from pcsteiner.core import dump_instance
from pcsteiner.oracle import oracle_vertex_cover
from pcsteiner.treewidth import heuristic_decompose


@pytest.mark.parametrize("name,sizes", [("k4", (23, 28, 18)), ("petersen", (56, 70, 45))])
def test_vc_gadget_sizes(name, sizes):
    g = gen_vc_gadget(NAMED_GRAPHS[name]())
    inst = g.instance
    assert (inst.graph.n, inst.graph.m, inst.k) == sizes


def test_non_cubic_rejected():
    with pytest.raises(DomainError):
        gen_vc_gadget(Graph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 1))))


@pytest.mark.parametrize("name", sorted(NAMED_GRAPHS))
def test_solution_from_cover_cost(name):
    G = NAMED_GRAPHS[name]()
    g = gen_vc_gadget(G)
    tau, cover = oracle_vertex_cover(G.n, [(e.u, e.v) for e in G.edges])
    sol = solution_from_cover(g, cover)
    assert sol.total == 2 * G.m + 2 * G.n + tau
    assert cover_from_solution(g, sol) == frozenset(cover)


def test_all_penalties_paid_gives_full_cover():
    g = gen_vc_gadget(k4())
    sol = solution_cost(g.instance, [])
    assert sol.total == 3 * 6 + 2 * 6
    assert cover_from_solution(g, sol) == frozenset(range(4))


def test_random_vertex_subsets_never_beat_cover_bound():
    g = gen_vc_gadget(petersen())
    rng = random.Random(7)
    for _ in range(30):
        F = [e for e in range(g.instance.graph.m) if rng.random() < 0.5]
        sol = solution_cost(g.instance, F)
        cover = cover_from_solution(g, sol)
        assert len(cover) <= sol.total - 2 * g.m - 2 * g.n


def test_grid_sizes():
    inst = gen_random("grid", {"rows": 3, "cols": 3}, 1)
    assert (inst.graph.n, inst.graph.m) == (9, 12)


@pytest.mark.parametrize("seed", range(10))
def test_series_parallel_width(seed):
    inst = gen_random("series-parallel", {"n": 10}, seed)
    assert heuristic_decompose(inst.graph).width <= 2


def test_same_seed_same_instance():
    a = gen_random("erdos-renyi", {"n": 9, "penalty": "capped"}, 42)
    b = gen_random("erdos-renyi", {"n": 9, "penalty": "capped"}, 42)
    assert dump_instance(a) == dump_instance(b)


def test_unknown_kind():
    with pytest.raises(DomainError):
        gen_random("torus", {}, 0)


def test_euclidean_counts_by_iteration():
    eg = gen_euclidean_gadget(k4(), unit=11)
    pts = list(eg.iter_points())
    dem = list(eg.iter_demands())
    assert len(pts) == eg.point_count and len(set(pts)) == len(pts)
    assert len(dem) == eg.demand_count
    assert eg.stated_demand_count - eg.demand_count == 4


def test_euclidean_special_penalties():
    eg = gen_euclidean_gadget(k4(), unit=20)
    pens = [p for _, _, p in eg.iter_demands()]
    assert pens.count(60) == 6 and pens.count(10) == 12


def test_euclidean_scaling_divides_squared_distance():
    G = k4()
    a = gen_euclidean_gadget(G, 1, unit=11)
    b = gen_euclidean_gadget(G, Fr(7, 2), unit=11)
    for (xa, ya), (xb, yb) in zip(a.iter_points(), b.iter_points()):
        assert xb == xa / Fr(7, 2) and yb == ya / Fr(7, 2)


def test_euclidean_default_unit_and_guards():
    assert gen_euclidean_gadget(k4()).unit == 100000
    with pytest.raises(DomainError):
        gen_euclidean_gadget(k4(), unit=10)
    with pytest.raises(DomainError):
        gen_euclidean_gadget(k4(), Fr(1, 2), unit=20)
    with pytest.raises(CapacityError):
        next(gen_euclidean_gadget(k4(), unit=20).iter_edges(max_points=100))


def test_euclidean_json():
    eg = gen_euclidean_gadget(k4(), unit=11)
    obj = json.loads(json.dumps(eg.to_json()))
    assert obj["metric"] == "euclidean" and len(obj["points"]) == eg.point_count
    assert len(obj["demands"]) == len(obj["penalty"]["p"]) == eg.demand_count
