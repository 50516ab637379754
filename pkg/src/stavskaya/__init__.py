"""Certified lower bounds for the critical parameter of Stavskaya's process.

The pipeline: enumerate primitive forbidden loops, build the memory-walk
state space and its weighted one-step operator, certify that its spectral
radius stays below one, and push the erasure parameter alpha as high as
that certificate allows.
"""

from .errors import CacheError, ConsistencyError, ResourceLimitError
from .patterns import (ForbiddenSet, Parameters, Step, build_forbidden_set,
                       enumerate_primitive_loops, step_weight)
from .search import (BisectionResult, OptimizationResult, alpha_sup,
                     optimize_p)
from .spectral import (SpectralEstimate, apply_operator,
                       certified_upper_bound, is_subcritical,
                       power_iteration, word_weight_vector)
from .statespace import (StateSpace, TransitionTable, build_state_space,
                         build_transitions, suffix_blocked)

__version__ = "0.1.0"

__all__ = [
    "BisectionResult",
    "CacheError",
    "ConsistencyError",
    "ForbiddenSet",
    "OptimizationResult",
    "Parameters",
    "ResourceLimitError",
    "SpectralEstimate",
    "StateSpace",
    "Step",
    "TransitionTable",
    "alpha_sup",
    "apply_operator",
    "build_forbidden_set",
    "build_state_space",
    "build_transitions",
    "certified_upper_bound",
    "enumerate_primitive_loops",
    "is_subcritical",
    "optimize_p",
    "power_iteration",
    "step_weight",
    "suffix_blocked",
    "word_weight_vector",
    "__version__",
]
