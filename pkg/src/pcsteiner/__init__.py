"""Exact and approximate solvers for prize-collecting Steiner problems."""

from .core import (AdditivePenalty, CappedPenalty, CapacityError, Demand, DomainError, Edge,
                   Graph, Instance, PenaltyFn, RestrictedPenalty, ScaledPenalty, Solution,
                   TablePenalty, check_penalty_axioms, dump_instance, load_instance,
                   solution_cost)
from .clustering import check_clustering, submodular_pc_clustering
from .oracle import (OracleBudget, oracle_pcst, oracle_spcsf, oracle_stroll, oracle_tour,
                     oracle_vertex_cover, steiner_forest_len, steiner_tree)
from .reduction import contract_components, pc_cluster_merge, reduction_pipeline, restrict_demands
from .treewidth import (dp_pcs, dp_pcst, dp_pctsp, dp_solve, heuristic_decompose, nice_for,
                        read_pace, to_nice, validate_decomposition, write_pace)
from .gadgets import (NAMED_GRAPHS, cover_from_solution, gadget_optimum_check,
                      gen_euclidean_gadget, gen_random, gen_vc_gadget)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
