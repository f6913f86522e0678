"""Post-processing for Bayesian factor-analysis posteriors.

Rotation and label ambiguity make raw posterior draws of a loading matrix
uninterpretable: every draw can arrive varimax-rotated differently, with
columns permuted and signs flipped.  This package rotates each draw to
simple structure and then relabels all draws to a common reference by
signed column permutations, so that posterior means, credible intervals,
and effective-factor counts are well-defined.

See the README for the CLI pipeline; the same functionality is available
programmatically:

    >>> import loadalign as la
    >>> res = la.rsp_run(draws, la.RspConfig(scheme="exact"))
    >>> la.summarize(res).q_hat
"""

__version__ = "0.1.0"

from ._backend import HAS_NUMBA, backend_name, set_threads
from .assignment import AssignmentSolution, CostMatrix, solve_assignment
from .chains import ChainSet, align_chains
from .core import (
    LoadingsSample,
    SignedPermutation,
    apply_signed_permutation,
    compose,
    frobenius_sq_distance,
    invert,
    permutation_to_matrix,
    signed_permutation_to_matrix,
)
from .procrustes import OpResult, op_run, procrustes_rotate
from .rsp import (
    DrawTransform,
    RspConfig,
    RspResult,
    build_cost_matrix,
    rlme_step,
    rsp_run,
    sp_align,
    sp_cost,
    sp_step_exact,
    sp_step_sa,
    transform_factors,
)
from .sampling import (
    FaPriors,
    FaScenario,
    GibbsConfig,
    default_block_map,
    generate_synthetic,
    gibbs_sample,
    ledermann_bound,
    parse_blocks,
    standardize,
)
from .summaries import (
    CredibleSummary,
    ScrResult,
    effective_columns,
    hpd_interval,
    simultaneous_credible_region,
    summarize,
)
from .varimax import (
    VarimaxConfig,
    VarimaxResult,
    varimax_map,
    varimax_objective,
    varimax_rotate,
)

__all__ = [
    "__version__",
    "HAS_NUMBA",
    "backend_name",
    "set_threads",
    "AssignmentSolution",
    "CostMatrix",
    "solve_assignment",
    "ChainSet",
    "align_chains",
    "LoadingsSample",
    "SignedPermutation",
    "apply_signed_permutation",
    "compose",
    "frobenius_sq_distance",
    "invert",
    "permutation_to_matrix",
    "signed_permutation_to_matrix",
    "OpResult",
    "op_run",
    "procrustes_rotate",
    "DrawTransform",
    "RspConfig",
    "RspResult",
    "build_cost_matrix",
    "rlme_step",
    "rsp_run",
    "sp_align",
    "sp_cost",
    "sp_step_exact",
    "sp_step_sa",
    "transform_factors",
    "FaPriors",
    "FaScenario",
    "GibbsConfig",
    "default_block_map",
    "generate_synthetic",
    "gibbs_sample",
    "ledermann_bound",
    "parse_blocks",
    "standardize",
    "CredibleSummary",
    "ScrResult",
    "effective_columns",
    "hpd_interval",
    "simultaneous_credible_region",
    "summarize",
    "VarimaxConfig",
    "VarimaxResult",
    "varimax_map",
    "varimax_objective",
    "varimax_rotate",
]
