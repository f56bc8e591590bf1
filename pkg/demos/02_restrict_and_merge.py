"""Restrict the demand set, then merge the surviving forest into separable trees.

Run: python3 demos/02_restrict_and_merge.py
"""
from fractions import Fraction

from pcsteiner import gen_random, oracle_spcsf, reduction_pipeline, steiner_forest_len

inst = gen_random("grid", {"rows": 3, "cols": 3, "demands": 5, "max_penalty": 6}, seed=5)
opt = oracle_spcsf(inst)
print(f"3x3 grid, {inst.k} demands.  Exact optimum {opt.total} "
      f"(satisfies {sorted(opt.satisfied)}).")

for eps in (Fraction(1, 2), Fraction(1)):
    r, m, pieces = reduction_pipeline(inst, eps)
    G = inst.graph
    print(f"\neps = {eps}")
    print(f"  kept demands {sorted(r.satisfied)}, dropped {sorted(r.dropped)} "
          f"(their penalty {r.penalty.offset} is now a constant)")
    print(f"  restricted forest length {G.length(r.forest)} "
          f"<= {(2 / eps + 1) * opt.total} = (2/eps + 1) * OPT")
    for p in pieces:
        sf = steiner_forest_len(G, [inst.demands[d] for d in p.demands]) if p.demands else 0
        print(f"  piece {p.index}: demands {list(p.demands)}, tree edges {list(p.tree)}, "
              f"Steiner forest cost {sf}")
    print(f"  merged trees total {m.total_length}; each piece can now be solved on its own")
