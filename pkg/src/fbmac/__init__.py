"""Achievable rate regions for the two-user multiple-access channel with
rate-limited feedback."""

from .baselines import (
    GaussianMacParams,
    cooperation_sum_bound,
    nofb_pentagon,
    ozarow_sum_capacity,
)
from .discrete import (
    AuxKernels,
    ChannelSpec,
    assemble_two_block_joint,
    inner_feasible,
    region_equivalence_check,
    theorem_terms,
    validate,
)
from .errors import FbMacError
from .gaussian import (
    SchemeParams,
    closed_form_bounds,
    decoupled_bounds,
    lambda_max,
    oracle_bounds,
    solve_xi,
    wyner_ziv_min_sigma12_sq,
)
from .geometry import (
    RegionPolygon,
    SweepConfig,
    convex_hull,
    optimize_sum_rate,
    pareto_frontier,
    polygon_from_bounds,
    sweep_regions,
)
from .info import (
    FactorKernel,
    JointPmf,
    LinearGaussianSystem,
    assemble_joint,
    cond_mi_discrete,
    cond_mi_gaussian,
)
from .terms import MacMiTerms, RegionBounds, bounds_from_terms

__version__ = "0.1.0"
