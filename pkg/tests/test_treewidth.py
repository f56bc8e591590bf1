from fractions import Fraction as Fr

import pytest

from pcsteiner.core import AdditivePenalty, DomainError, Graph, Instance
from pcsteiner.gadgets import gen_random
from pcsteiner.oracle import oracle_pcst, oracle_stroll, oracle_tour, steiner_tree
from pcsteiner.treewidth import (NiceDecomposition, NiceNode, TreeDecomposition, dp_pcs, dp_pcst,
                                 dp_pctsp, dp_solve, heuristic_decompose, nice_for, read_pace,
                                 table_size_bound, to_nice, validate_decomposition, validate_nice,
                                 write_pace)

from conftest import k2

P3 = Graph(3, ((0, 1, 1), (1, 2, 1)))
STAR = Graph(4, ((0, 1, 1), (0, 2, 1), (0, 3, 1)))


def cycle(n):
    return Graph(n, tuple((i, (i + 1) % n, 1) for i in range(n)))


def td(bags, edges=()):
    return TreeDecomposition(tuple(frozenset(b) for b in bags), tuple(edges))


def test_validator_accepts_path_decomposition():
    assert validate_decomposition(P3, td([{0, 1}, {1, 2}], [(0, 1)])).ok


def test_validator_missing_edge():
    rep = validate_decomposition(P3, td([{0, 1}, {2}], [(0, 1)]))
    assert rep.uncovered_edges == [1]


def test_validator_disconnected_occurrences():
    rep = validate_decomposition(P3, td([{0, 1}, {2}, {1, 2}], [(0, 1), (1, 2)]))
    assert rep.disconnected_vertices == [1]
    rep = validate_decomposition(P3, td([{0, 1}, {1, 2}, {2}, {0}], [(0, 1), (1, 2), (2, 3)]))
    assert rep.disconnected_vertices == [0]


def test_validator_not_a_tree():
    rep = validate_decomposition(P3, td([{0, 1}, {1, 2}]))
    assert rep.tree and not rep.ok


def test_nice_single_bag():
    G = Graph(2, ((0, 1, 1),))
    nice = to_nice(td([{0, 1}]), 0, G=G)
    assert validate_nice(G, nice) == []
    assert nice.nodes[nice.root].bag == {0}
    assert [x.kind for x in nice.nodes] == ["leaf", "introduce", "forget"]


def test_nice_path_and_star():
    for G, dec in ((P3, td([{0, 1}, {1, 2}], [(0, 1)])),
                   (STAR, td([{0, 1}, {0, 2}, {0, 3}], [(0, 1), (0, 2)]))):
        nice = to_nice(dec, 0, G=G)
        assert validate_nice(G, nice) == [] and nice.width == 1
    star = to_nice(td([{0, 1}, {0, 2}, {0, 3}], [(0, 1), (0, 2)]), 0, G=STAR)
    assert sum(x.kind == "join" for x in star.nodes) == 1


def test_nice_rejects_invalid():
    with pytest.raises(DomainError):
        to_nice(td([{0, 1}, {2}], [(0, 1)]), 0, G=P3)


def test_validate_nice_detects_bad_forget():
    bad = NiceDecomposition((NiceNode("leaf", frozenset({0})),
                             NiceNode("forget", frozenset({0}), 1, (0,))), 1)
    assert validate_nice(Graph(2, ()), bad)


def test_heuristic_widths():
    assert heuristic_decompose(STAR).width == 1
    assert heuristic_decompose(cycle(5)).width == 2
    K4 = Graph(4, tuple((u, v, 1) for u in range(4) for v in range(u + 1, 4)))
    assert heuristic_decompose(K4).width == 3


def test_pace_round_trip():
    dec = heuristic_decompose(cycle(6))
    text = write_pace(dec, 6)
    again, n = read_pace(text)
    assert n == 6 and write_pace(again, n) == text
    assert validate_decomposition(cycle(6), again).ok


def test_pace_rejects_garbage():
    with pytest.raises(DomainError):
        read_pace("s td 1 2\n")


def test_dp_on_k2():
    nice = nice_for(k2(3, 5, root=0))
    assert dp_pcst(k2(3, 5, root=0), nice).total == 3
    assert dp_pctsp(k2(3, 5, root=0), nice).total == 5
    assert dp_pcs(k2(3, 5, root=0), nice).total == 3
    cheap = k2(3, 1, root=0)
    assert dp_pcst(cheap, nice_for(cheap)).total == 1


def test_dp_requires_rooted():
    with pytest.raises(DomainError):
        nice_for(k2(1, 1))


def rooted(seed, n=8):
    return gen_random(("series-parallel", "grid", "erdos-renyi")[seed % 3],
                      {"n": n, "rows": 2, "cols": 3, "p": 0.35, "demands": 4, "rooted": True,
                       "denominator": 1 + seed % 2}, seed)


def test_root_node_choice_does_not_matter():
    inst = rooted(0)
    dec = heuristic_decompose(inst.graph)
    holders = [i for i, b in enumerate(dec.bags) if inst.root in b]
    values = {dp_pctsp(inst, nice_for(inst, dec, h)).total for h in holders}
    assert len(values) == 1


def test_bag_order_does_not_matter():
    inst = rooted(3)
    dec = heuristic_decompose(inst.graph)
    perm = list(reversed(range(len(dec.bags))))
    where = {old: new for new, old in enumerate(perm)}
    shuffled = TreeDecomposition(tuple(dec.bags[i] for i in perm),
                                 tuple((where[a], where[b]) for a, b in dec.edges))
    for mode in ("tree", "tour", "stroll"):
        a = dp_solve(inst, nice_for(inst, dec), mode)[0].total
        b = dp_solve(inst, nice_for(inst, shuffled), mode)[0].total
        assert a == b


@pytest.mark.parametrize("seed", range(20))
def test_dp_matches_oracles(seed):
    inst = rooted(seed)
    nice = nice_for(inst)
    assert dp_pcst(inst, nice).total == oracle_pcst(inst).total
    assert dp_pctsp(inst, nice).total == oracle_tour(inst).total
    assert dp_pcs(inst, nice).total == oracle_stroll(inst).total


def _steiner_on(inst, sol):
    terms = {inst.root} | {t for d in sol.satisfied for t in inst.demands[d]}
    return steiner_tree(inst.graph, terms)[0]


@pytest.mark.parametrize("seed", range(15))
def test_walk_relations(seed):
    inst = rooted(seed)
    stroll, tour = oracle_stroll(inst), oracle_tour(inst)
    assert stroll.total <= tour.total
    assert tour.length <= 2 * _steiner_on(inst, tour)
    assert stroll.length >= _steiner_on(inst, stroll)
    assert oracle_pcst(inst).total <= stroll.total


@pytest.mark.parametrize("seed", range(10))
def test_table_within_bound(seed):
    inst = rooted(seed)
    nice = nice_for(inst)
    for mode in ("tree", "tour", "stroll"):
        _, stats = dp_solve(inst, nice, mode)
        assert stats.within_bound
    assert table_size_bound(nice) == len(nice.nodes) * 2 ** (nice.width + 1) * (nice.width + 1) ** (nice.width + 1)
