"""Exact prize-collecting tree, tour and stroll via tree-decomposition DP.

Run: python3 demos/03_treewidth_dp.py
"""
from pcsteiner import (dp_solve, gen_random, heuristic_decompose, nice_for, oracle_pcst,
                       oracle_stroll, oracle_tour, write_pace)

inst = gen_random("series-parallel", {"n": 10, "demands": 6, "rooted": True,
                                      "max_penalty": 6}, seed=2)
td = heuristic_decompose(inst.graph)
print(f"Series-parallel graph with {inst.graph.n} vertices; heuristic width {td.width}.")
print("Decomposition in PACE format:")
print("  " + write_pace(td, inst.graph.n).replace("\n", "\n  ").rstrip())

nice = nice_for(inst, td)
print(f"Nice decomposition: {len(nice.nodes)} nodes rooted at bag {{{inst.root}}}.\n")

oracles = {"tree": oracle_pcst, "tour": oracle_tour, "stroll": oracle_stroll}
for mode, oracle in oracles.items():
    sol, stats = dp_solve(inst, nice, mode)
    print(f"{mode:6s}: DP {sol.total} (length {sol.length}, penalty {sol.penalty}), "
          f"oracle {oracle(inst).total}; {stats.states} states, bound {stats.bound}")
