"""Walk through primal-dual clustering on a small instance with a capped penalty.

Run: python3 demos/01_clustering.py
"""
from fractions import Fraction

from pcsteiner import (CappedPenalty, Graph, Instance, check_clustering, oracle_spcsf,
                       solution_cost, submodular_pc_clustering)

# A path 0-1-2-3 plus a long detour 0-3 and a far vertex 4.  Four demands
# share one penalty budget: individually they are worth 6, 5, 3 and 4, but
# giving up any collection costs at most 9.
G = Graph(5, ((0, 1, 2), (1, 2, 2), (2, 3, 2), (0, 3, 9), (3, 4, 8)))
inst = Instance(G, ((0, 1), (1, 3), (0, 3), (2, 4)), CappedPenalty((6, 5, 3, 4), 9))

print("Growing moats.  Each line is one event of the growth phase:")
trace = []
out = submodular_pc_clustering(inst, trace)
for ev in trace:
    if ev["event"] == "prune":
        print(f"  prune: kept edges {ev['forest']}, removed {ev['removed']}")
    else:
        what = ev.get("merges") or ev.get("deaths")
        print(f"  step {ev['event']}: grew by {ev['eta']} ({ev['kind']}) -> {what}")

rep = check_clustering(inst, out)
sol = solution_cost(inst, out.forest)
print(f"\nForest {list(out.forest)} of length {rep.length}, "
      f"given-up demands {sorted(out.dead)}")
print(f"Dual total y(D) = {rep.y_total}; length <= 2 y(D): {rep.length_bound}")
print(f"Given-up demands are exactly paid for by the dual: {rep.tight_dead}")
print(f"Dual packing feasible on every demand subset: {not rep.feasibility}")

best = oracle_spcsf(inst)
print(f"\nClustering solution costs {sol.total}; the exact optimum is {best.total} "
      f"(ratio {Fraction(sol.total) / best.total}).")
