"""Energy-stable SBP-SAT solver for strongly anisotropic diffusion.

Multi-block curvilinear finite differences with summation-by-parts operators,
simultaneous-approximation-term couplings for the perpendicular transport,
and a field-line-traced penalty for the parallel transport.
"""

from .fields import IslandFieldParams, island_field_eval, island_source, make_field
from .harness import (ExperimentConfig, MmsParams, convergence_rates,
                      mms_manufactured, relative_error)
from .mesh import (BlockMesh, BoundaryCurve, DiffusionField, Interface,
                   MultiBlockDomain, PackingParams, assemble_diffusion_field,
                   build_circle_five_block, build_from_mapping, compute_metrics,
                   coons_patch, pack_points)
from .parallel import (FieldLineMap, ParallelConfig, apply_parallel_map,
                       compute_tau_parallel, parallel_update, trace_field_lines)
from .perp import (PenaltySet, PerpOperator, assemble_dense,
                   audit_lemma_matrices, check_energy_stability,
                   compute_penalties)
from .sbp import SbpSet1D, apply_d1, apply_d2_variable, build_sbp_set, \
    verify_sbp_identities
from .solver import SolveConfig, SolverState, cg_solve, run, step, theta_step

__version__ = "0.1.0"
