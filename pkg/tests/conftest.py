from fractions import Fraction

import pytest

from pcsteiner.core import AdditivePenalty, CappedPenalty, Graph, Instance


def k2(cost, penalty, root=None) -> Instance:
    return Instance(Graph(2, ((0, 1, cost),)), ((0, 1),), AdditivePenalty((penalty,)), root)


def random_forest_instance(seed: int, n_max: int = 7, k_max: int = 4, capped: bool = False):
    """Small unrooted instance for oracle-backed checks."""
    from pcsteiner.gadgets import gen_random

    kind = ("erdos-renyi", "series-parallel", "grid")[seed % 3]
    params = {"n": 4 + seed % (n_max - 3), "p": 0.45, "rows": 2, "cols": 2 + seed % 2,
              "demands": 1 + seed % k_max, "penalty": "capped" if capped else "additive",
              "denominator": 1 + seed % 2, "zero_cost": 0.1, "max_penalty": 6}
    return gen_random(kind, params, seed)


@pytest.fixture
def F():
    return Fraction


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
