import random
from fractions import Fraction as Fr

import pytest

from pcsteiner.core import AdditivePenalty, CappedPenalty, CapacityError, TablePenalty
from pcsteiner.submodular import SlackFn, compute_eta, dead_set_update, minimize_submodular


def slack(pi, y, rate=None):
    k = pi.size
    return SlackFn(pi, tuple(Fr(v) for v in y), tuple(Fr(v) for v in (rate or [0] * k)))


def test_minimize_additive_example():
    g = slack(AdditivePenalty((1, 2)), [Fr(1, 2), Fr(5, 2)])
    assert minimize_submodular(g) == (frozenset({1}), Fr(-1, 2))
    assert minimize_submodular(g, backend="enumerate") == (frozenset({1}), Fr(-1, 2))


def test_minimize_zero_duals():
    g = slack(CappedPenalty((3, 1, 2), 4), [0, 0, 0])
    assert minimize_submodular(g) == (frozenset(), 0)
    assert minimize_submodular(g, backend="enumerate") == (frozenset(), 0)


def test_minimize_forced():
    g = slack(AdditivePenalty((1, 2)), [1, 0])
    assert minimize_submodular(g, forced_in={0}) == (frozenset({0}), 0)


@pytest.mark.parametrize("seed", range(40))
def test_enumeration_matches_fast_paths(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 8)
    p = [Fr(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(k)]
    pi = AdditivePenalty(tuple(p)) if seed % 2 else CappedPenalty(tuple(p), rng.randint(1, 9))
    g = slack(pi, [Fr(rng.randint(0, 6), 2) for _ in range(k)], [rng.randint(0, 2) for _ in range(k)])
    eta = Fr(rng.randint(0, 4), 3)
    forced = {d for d in range(k) if rng.random() < 0.2}
    assert minimize_submodular(g, eta, forced)[1] == minimize_submodular(g, eta, forced, "enumerate")[1]


def test_eta_edge_wins():
    res = compute_eta(AdditivePenalty((10,)), [Fr(0)], [Fr(2)], [(0, Fr(2), 2)])
    assert (res.eta, res.kind, res.binding) == (1, "edge-tight", 0)


def test_eta_set_wins():
    res = compute_eta(AdditivePenalty((1,)), [Fr(0)], [Fr(2)], [(0, Fr(2), 2)])
    assert (res.eta, res.kind, res.binding) == (Fr(1, 2), "set-tight", frozenset({0}))


def test_eta_zero_cost_edge():
    res = compute_eta(AdditivePenalty((5,)), [Fr(0)], [Fr(2)], [(3, Fr(0), 2)])
    assert (res.eta, res.kind) == (0, "edge-tight")


def test_eta_tie_goes_to_edge():
    res = compute_eta(AdditivePenalty((2,)), [Fr(0)], [Fr(2)], [(0, Fr(2), 2)])
    assert res.kind == "edge-tight"


def test_eta_table_enumeration_matches_capped():
    pi = CappedPenalty((3, 4, 2), 5)
    y, r = [Fr(1), Fr(0), Fr(1)], [Fr(1), Fr(2), Fr(1)]
    a = compute_eta(pi, y, r, [])
    b = compute_eta(pi.tabulate(), y, r, [])
    assert a.eta == b.eta and a.kind == b.kind == "set-tight"


def test_dead_set_singleton():
    assert dead_set_update(AdditivePenalty((2, 3)), [Fr(2), Fr(1)], {0, 1}) == {0}


def test_dead_set_none():
    assert dead_set_update(CappedPenalty((2, 3), 4), [Fr(0), Fr(0)], {0, 1}) == frozenset()


def test_dead_set_capped_pair():
    pi = CappedPenalty((3, 3), 4)
    y = [Fr(2), Fr(2)]
    assert dead_set_update(pi, y, {0, 1}) == {0, 1}
    assert dead_set_update(pi.tabulate(), y, {0, 1}) == {0, 1}


def test_enumeration_limit():
    big = AdditivePenalty(tuple([1] * 21))
    g = SlackFn(big, tuple([Fr(0)] * 21), tuple([Fr(0)] * 21))
    with pytest.raises(CapacityError):
        minimize_submodular(g, backend="enumerate")


def test_exchange_inequality_on_slack():
    pi = CappedPenalty((3, 1, 2, 2), 5)
    g = slack(pi, [1, 0, 1, 2], [1, 1, 0, 2])
    sets = [frozenset(i for i in range(4) if m >> i & 1) for m in range(16)]
    for A in sets:
        for B in sets:
            assert g(A, Fr(1, 3)) + g(B, Fr(1, 3)) >= g(A | B, Fr(1, 3)) + g(A & B, Fr(1, 3))
