from fractions import Fraction as Fr

import pytest

from pcsteiner.core import AdditivePenalty, CappedPenalty, DomainError, Graph, Instance
from pcsteiner.oracle import oracle_spcsf
from pcsteiner.reduction import (check_merge, contract_components, export_bundle, load_manifest,
                                 merge_to_json, pc_cluster_merge, reduction_pipeline,
                                 restrict_demands, restrict_forest)

from conftest import k2, random_forest_instance


def test_restrict_drops_cheap_demand():
    r = restrict_demands(k2(100, 1), Fr(1, 2))
    assert r.dropped == {0} and r.forest == () and r.penalty.offset == 1


def test_restrict_keeps_valuable_demand():
    r = restrict_demands(k2(100, 1000), Fr(1, 2))
    assert r.dropped == frozenset() and r.forest == (0,)


def test_restrict_rejects_bad_epsilon():
    with pytest.raises(DomainError):
        restrict_demands(k2(1, 1), 0)


def test_restricted_instance_capped_closed_form():
    inst = Instance(Graph(4, ((0, 1, 50), (2, 3, 1))), ((0, 1), (2, 3)),
                    CappedPenalty((3, 5), 6))
    r = restrict_demands(inst, 1)
    sub, offset = r.restricted_instance(inst)
    assert r.dropped == {0} and offset == 3
    assert sub.penalty({0}) == min(5, 6 - 3)


def test_contract_empty_forest():
    G = Graph(3, ((0, 1, 2), (1, 2, 3)))
    con = contract_components(G, ())
    assert con.graph.n == 3 and con.edge_origin == (0, 1)


def test_contract_spanning_forest():
    G = Graph(3, ((0, 1, 2), (1, 2, 3), (0, 2, 9)))
    con = contract_components(G, (0, 1))
    assert con.graph.n == 1 and con.graph.m == 0


def test_contract_keeps_cheapest_parallel():
    G = Graph(4, ((0, 1, 1), (2, 3, 1), (1, 2, 5), (0, 3, 3)))
    con = contract_components(G, (0, 1))
    assert con.graph.m == 1 and con.graph.edges[0].cost == 3 and con.edge_origin == (3,)


def test_contract_rejects_cycle():
    G = Graph(3, ((0, 1, 1), (1, 2, 1), (0, 2, 1)))
    with pytest.raises(DomainError):
        contract_components(G, (0, 1, 2))


def test_merge_single_tree():
    G = Graph(3, ((0, 1, 2), (1, 2, 2)))
    out = pc_cluster_merge(G, (0, 1), Fr(1, 2), [(0, 2)])
    assert out.trees == [(0, 1)] and out.demand_parts == [(0,)]
    assert check_merge(G, (0, 1), [(0, 2)], out).ok


def two_pairs(bridge):
    return Graph(4, ((0, 1, 10), (2, 3, 10), (1, 2, bridge)))


def test_merge_cheap_bridge():
    G = two_pairs(1)
    out = pc_cluster_merge(G, (0, 1), Fr(1, 2), [(0, 1), (2, 3)])
    assert out.trees == [(0, 1, 2)] and out.added_edges == (2,)
    assert out.demand_parts == [(0, 1)]
    assert check_merge(G, (0, 1), [(0, 1), (2, 3)], out).ok


def test_merge_expensive_bridge():
    G = two_pairs(1000)
    out = pc_cluster_merge(G, (0, 1), Fr(1, 2), [(0, 1), (2, 3)])
    assert out.trees == [(0,), (1,)] and out.added_edges == ()
    assert out.potentials == {0: 20, 1: 20}


def test_merge_split_demand_detected():
    G = two_pairs(1000)
    with pytest.raises(AssertionError):
        pc_cluster_merge(G, (0, 1), Fr(1, 2), [(0, 3)])


def test_pipeline_without_demands():
    inst = Instance(Graph(2, ((0, 1, 1),)), (), AdditivePenalty(()))
    r, m, pieces = reduction_pipeline(inst)
    assert r.forest == () and m.trees == [] and pieces == []


def test_pipeline_single_demand():
    r, m, pieces = reduction_pipeline(k2(3, 10))
    assert [p.demands for p in pieces] == [(0,)] and pieces[0].tree == (0,)


def test_pipeline_outlier_dropped():
    # demand 1 is far away and nearly free to give up
    G = Graph(4, ((0, 1, 1), (1, 2, 1), (2, 3, 200)))
    inst = Instance(G, ((0, 2), (0, 3)), AdditivePenalty((50, 1)))
    r, m, pieces = reduction_pipeline(inst, 1)
    assert r.dropped == {1}
    assert [p.demands for p in pieces] == [(0,)]
    assert pieces[0].instance.penalty({0}) == 50


@pytest.mark.parametrize("seed", range(25))
def test_restrict_bound_with_exact_start(seed):
    inst = random_forest_instance(seed, capped=seed % 2 == 1)
    opt = oracle_spcsf(inst).total
    for eps in (Fr(1, 2), Fr(1)):
        r = restrict_demands(inst, eps)
        assert inst.graph.length(r.forest) <= (2 / eps + 1) * opt
        sub, offset = r.restricted_instance(inst)
        assert oracle_spcsf(sub).total + offset <= (1 + eps) * opt


@pytest.mark.parametrize("seed", range(15))
def test_pipeline_pieces_cover_kept_demands(seed):
    inst = random_forest_instance(seed, k_max=5)
    r, m, pieces = reduction_pipeline(inst, Fr(1, 2))
    covered = sorted(d for p in pieces for d in p.demands)
    assert covered == sorted(r.satisfied)
    keep = sorted(r.satisfied)
    F = restrict_forest(inst.graph, r.forest, {x for d in keep for x in inst.demands[d]})
    assert check_merge(inst.graph, F, [inst.demands[d] for d in keep], m).ok


def test_bundle_export(tmp_path):
    inst = random_forest_instance(2)
    r, m, pieces = reduction_pipeline(inst)
    path = export_bundle(str(tmp_path), inst, r, m, pieces)
    man = load_manifest(path)
    assert len(man["pieces"]) == len(pieces)
    for entry in man["pieces"]:
        assert (tmp_path / entry["file"]).exists()


def test_merge_json_fields():
    G = two_pairs(1)
    out = pc_cluster_merge(G, (0, 1), Fr(1, 2), [(0, 1), (2, 3)])
    obj = merge_to_json(G, (0, 1), out)
    assert obj["kind"] == "merge" and obj["input_length"] == "20" and obj["epsilon"] == "1/2"


@pytest.mark.parametrize("seed", range(8))
def test_restrict_on_rooted_instance(seed):
    from pcsteiner.gadgets import gen_random
    inst = gen_random("series-parallel", {"n": 8, "demands": 4, "rooted": True}, seed)
    r = restrict_demands(inst, Fr(1, 2))
    assert r.satisfied | r.dropped == frozenset(range(inst.k))
    unrooted = Instance(inst.graph, inst.demands, inst.penalty)
    assert restrict_demands(unrooted, Fr(1, 2)).satisfied == r.satisfied
