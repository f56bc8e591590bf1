from fractions import Fraction

import pytest

from pcsteiner.core import (AdditivePenalty, CappedPenalty, DomainError, Graph, Instance,
                            ScaledPenalty, RestrictedPenalty, TablePenalty, check_penalty_axioms,
                            dump_instance, load_instance, penalty_eval, penalty_from_json,
                            solution_cost)

from conftest import random_forest_instance


def test_additive_sum():
    assert penalty_eval(AdditivePenalty((2, 3)), {0, 1}) == 5


@pytest.mark.parametrize("pi", [AdditivePenalty((2, 3)), CappedPenalty((2, 3), 4),
                                TablePenalty(1, {(): 0, (0,): 4})])
def test_empty_set_is_zero(pi):
    assert penalty_eval(pi, set()) == 0


def test_capped_value():
    assert penalty_eval(CappedPenalty((2, 3), 4), {0, 1}) == 4


def test_unknown_demand_rejected():
    with pytest.raises(DomainError):
        AdditivePenalty((1,))({3})


def test_float_rejected():
    with pytest.raises(DomainError):
        Graph(2, ((0, 1, 0.5),))


def path_instance(penalties):
    G = Graph(3, ((0, 1, 2), (1, 2, 3)))
    dem = ((0, 2), (0, 1))[:len(penalties)]
    return Instance(G, dem, AdditivePenalty(tuple(penalties)))


def test_solution_cost_empty_forest():
    sol = solution_cost(path_instance([7]), [])
    assert sol.total == 7 and sol.satisfied == frozenset()


def test_solution_cost_connected():
    sol = solution_cost(path_instance([7]), [0, 1])
    assert (sol.length, sol.penalty, sol.total) == (5, 0, 5)


def test_solution_cost_partial():
    inst = Instance(Graph(4, ((0, 1, 2), (2, 3, 5))), ((0, 1), (2, 3)), AdditivePenalty((3, 4)))
    assert solution_cost(inst, [0]).total == 2 + 4
    sat = solution_cost(inst, [0]).satisfied
    assert sat == {0}


def test_solution_cost_unknown_edge():
    with pytest.raises(DomainError):
        solution_cost(path_instance([7]), [5])


def test_axioms_additive_and_capped():
    assert check_penalty_axioms(AdditivePenalty((1, 2, 3))).ok
    rep = check_penalty_axioms(CappedPenalty((2, 3, 1, 4), 5))
    assert rep.ok and rep.exhaustive and rep.pairs_checked == 16 * 16


def test_axioms_table_violation():
    pi = TablePenalty(2, {(): 0, (0,): 1, (1,): 1, (0, 1): 3})
    rep = check_penalty_axioms(pi)
    assert rep.submodularity and not rep.ok


def test_axioms_sampled_for_large_ground_sets():
    rep = check_penalty_axioms(AdditivePenalty(tuple(range(14))), samples=200)
    assert rep.ok and not rep.exhaustive and rep.pairs_checked == 200


def test_table_offset_normalized(caplog):
    pi = TablePenalty(1, {(): 2, (0,): 5})
    assert pi(set()) == 0 and pi({0}) == 3 and pi.offset == 2
    assert "normalizing" in caplog.text


def test_table_agrees_with_additive():
    add = AdditivePenalty((1, Fraction(5, 2), 0, 4))
    tab = add.tabulate()
    for mask in range(16):
        D = {i for i in range(4) if mask >> i & 1}
        assert tab(D) == add(D)


def test_scaled_and_restricted():
    base = CappedPenalty((2, 3, 4), 6)
    assert ScaledPenalty(base, 2)({0, 1}) == 10
    r = RestrictedPenalty(base, {2})
    assert r.offset == 4 and r({0}) == 2 and r({0, 1}) == 2 and r({2}) == 0


def test_self_pair_demands_stripped(caplog):
    inst = Instance.build(Graph(2, ((0, 1, 1),)), [(0, 0), (0, 1)], AdditivePenalty((9, 2)))
    assert inst.k == 1 and inst.penalty({0}) == 2
    assert "stripping" in caplog.text


def test_rooted_instance_requires_root_in_demands():
    with pytest.raises(DomainError):
        Instance(Graph(3, ((0, 1, 1),)), ((1, 2),), AdditivePenalty((1,)), 0)


def test_adding_edges_never_raises_penalty():
    inst = random_forest_instance(4)
    prev = solution_cost(inst, []).penalty
    for e in range(inst.graph.m):
        cur = solution_cost(inst, range(e + 1)).penalty
        assert cur <= prev
        prev = cur


@pytest.mark.parametrize("seed", range(6))
def test_json_round_trip_is_byte_identical(seed):
    inst = random_forest_instance(seed, capped=seed % 2 == 1)
    text = dump_instance(inst)
    assert dump_instance(load_instance(text)) == text


def test_penalty_json_kinds():
    base = TablePenalty(2, {(): 0, (0,): 1, (1,): 2, (0, 1): 2})
    for pi in (base, ScaledPenalty(base, Fraction(1, 3)), RestrictedPenalty(base, {1})):
        again = penalty_from_json(pi.to_json())
        assert all(again(D) == pi(D) for D in ({0}, {1}, {0, 1}, set()))


def test_malformed_json():
    with pytest.raises(DomainError):
        load_instance("{")
    with pytest.raises(DomainError):
        load_instance('{"vertices": 2}')
