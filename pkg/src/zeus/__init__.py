"""Global optimization by PSO-refined multistart BFGS with forward-mode
automatic differentiation.

The pipeline seeds a particle swarm over the search box, runs a handful
of swarm sweeps to pull the starting points toward promising regions,
then launches one quasi-Newton refinement per particle, in parallel,
stopping early once a required number of runs have converged.  Gradients
come from dual-number forward AD, so objectives are written once and
never differentiated by hand.
"""

from .autodiff import DomainError, Dual, forward_gradient
from .bfgs import (
    CONVERGED,
    DIVERGED,
    DOMAIN_ERROR,
    STOPPED,
    BfgsOutcome,
    bfgs_run,
    hessian_update,
)
from .driver import (
    NoValidOptimumError,
    ZeusConfig,
    ZeusResult,
    make_start_streams,
    reduce_best,
    zeus_run,
)
from .linesearch import LineSearchParams, armijo_search
from .objectives import ObjectiveSpec, get_objective, objective_names
from .pso import PsoParams, SwarmState, init_swarm, update_swarm

__version__ = "0.1.0"

__all__ = [
    "Dual",
    "DomainError",
    "forward_gradient",
    "BfgsOutcome",
    "bfgs_run",
    "hessian_update",
    "CONVERGED",
    "DIVERGED",
    "STOPPED",
    "DOMAIN_ERROR",
    "LineSearchParams",
    "armijo_search",
    "PsoParams",
    "SwarmState",
    "init_swarm",
    "update_swarm",
    "ObjectiveSpec",
    "get_objective",
    "objective_names",
    "ZeusConfig",
    "ZeusResult",
    "zeus_run",
    "reduce_best",
    "make_start_streams",
    "NoValidOptimumError",
    "__version__",
]
