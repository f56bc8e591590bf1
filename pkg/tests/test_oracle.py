from fractions import Fraction as Fr

import pytest

from pcsteiner.core import AdditivePenalty, CapacityError, Graph, Instance
from pcsteiner.gadgets import petersen
from pcsteiner.oracle import (OracleBudget, oracle_pcst, oracle_spcsf, oracle_stroll, oracle_tour,
                              oracle_vertex_cover, steiner_forest, steiner_tree)

from conftest import k2, random_forest_instance

METHODS = ("edges", "satisfied", "frontier")


@pytest.mark.parametrize("method", METHODS)
def test_k2(method):
    assert oracle_spcsf(k2(2, 10), method).total == 2
    assert oracle_spcsf(k2(2, 1), method).total == 1


@pytest.mark.parametrize("method", METHODS)
def test_triangle(method):
    G = Graph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 5)))
    inst = Instance(G, ((0, 2),), AdditivePenalty((10,)))
    sol = oracle_spcsf(inst, method)
    assert sol.total == 2 and sorted(sol.edges) == [0, 1]


def test_steiner_forest_on_c4():
    G = Graph(4, ((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)))
    length, edges = steiner_forest(G, [(0, 2), (1, 3)])
    assert length == 3 and len(edges) == 3


def test_steiner_tree_fractional():
    G = Graph(3, ((0, 1, Fr(1, 3)), (1, 2, Fr(1, 2)), (0, 2, 1)))
    assert steiner_tree(G, {0, 2})[0] == Fr(5, 6)


def test_walks_on_unit_c4():
    G = Graph(4, ((0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)))
    inst = Instance(G, ((0, 1), (0, 2), (0, 3)), AdditivePenalty((10, 10, 10)), 0)
    assert oracle_tour(inst).total == 4
    assert oracle_stroll(inst).total == 3
    assert oracle_pcst(inst).total == 3


def test_walks_on_k2():
    inst = k2(3, 5, root=0)
    assert oracle_tour(inst).total == 5 and oracle_stroll(inst).total == 3


@pytest.mark.parametrize("seed", range(40))
def test_methods_agree(seed):
    inst = random_forest_instance(seed, capped=seed % 2 == 0)
    values = {oracle_spcsf(inst, m).total for m in METHODS}
    assert len(values) == 1


def test_vertex_cover_petersen():
    G = petersen()
    size, cover = oracle_vertex_cover(G.n, [(e.u, e.v) for e in G.edges])
    assert size == 6 and all(e.u in cover or e.v in cover for e in G.edges)


def test_budget_exceeded():
    inst = random_forest_instance(5)
    with pytest.raises(CapacityError):
        oracle_spcsf(inst, "edges", OracleBudget(max_edges=2))


def test_budget_from_env(monkeypatch):
    monkeypatch.setenv("PCSTEINER_ORACLE_MAX_EDGES", "7")
    assert OracleBudget.from_env().max_edges == 7
