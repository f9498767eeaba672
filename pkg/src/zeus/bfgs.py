"""Quasi-Newton local minimization with an inverse-Hessian approximation.

Gradients come from forward-mode automatic differentiation, step sizes
from the Armijo backtracking search, and the inverse Hessian from the
classic rank-two update.  A run terminates when the gradient norm drops
below the threshold, when the iteration cap is hit, when an external stop
signal is observed, or when evaluation leaves the objective's domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .autodiff import DomainError, forward_gradient
from .linesearch import LineSearchParams, armijo_search

__all__ = [
    "CONVERGED",
    "DIVERGED",
    "STOPPED",
    "DOMAIN_ERROR",
    "STATUSES",
    "BfgsOutcome",
    "hessian_update",
    "bfgs_run",
]

CONVERGED = "converged"
DIVERGED = "diverged"
STOPPED = "stopped"
DOMAIN_ERROR = "domain_error"
STATUSES = (CONVERGED, DIVERGED, STOPPED, DOMAIN_ERROR)

# Skip the inverse-Hessian update when the curvature dx.dg is not safely
# positive relative to the step scales; the raw formula divides by it.
CURVATURE_FLOOR = 1e-12


@dataclass(frozen=True)
class BfgsOutcome:
    """Terminal state of one local minimization.

    ``grad_norm`` is the Euclidean norm of the last gradient tested
    against the threshold, or +inf for runs that stopped before any
    gradient was computed.  ``iterations`` counts completed steps.
    """

    x_final: tuple[float, ...]
    f_final: float
    grad_norm: float
    iterations: int
    status: str


def hessian_update(H: np.ndarray, dx: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Rank-two inverse-Hessian update.

    H' = (I - rho dx dg^T) H (I - rho dg dx^T) + rho dx dx^T
    with rho = 1 / (dx . dg).

    When the curvature dx . dg is at or below
    ``CURVATURE_FLOOR * |dx| * |dg|`` the update is skipped and ``H`` is
    returned unchanged, bit for bit.  Inputs are never mutated.
    """
    curvature = float(np.dot(dx, dg))
    if curvature <= CURVATURE_FLOOR * np.linalg.norm(dx) * np.linalg.norm(dg):
        return H
    rho = 1.0 / curvature
    V = np.eye(len(dx)) - rho * np.outer(dx, dg)
    updated = V @ H @ V.T + rho * np.outer(dx, dx)
    # The formula is symmetric in exact arithmetic; fold out the float
    # roundoff so the symmetry survives ill-conditioned curvatures.
    return 0.5 * (updated + updated.T)


def bfgs_run(
    f: Callable[[Sequence], object],
    x0: Sequence[float],
    theta: float,
    iter_bfgs: int,
    ls: LineSearchParams | None = None,
    stop_probe: Optional[Callable[[], bool]] = None,
) -> BfgsOutcome:
    """Minimize ``f`` from ``x0`` until the gradient norm falls below
    ``theta``.

    Each iteration first reads ``stop_probe`` (when given) and terminates
    with status ``stopped`` if it reports true, before any gradient work;
    a stale probe read costs at most one extra iteration.  The gradient
    at the new point doubles as the next iteration's gradient, so every
    iteration performs exactly one forward-AD gradient evaluation.

    A :class:`zeus.autodiff.DomainError` raised by value or gradient
    evaluation ends the run with status ``domain_error`` at the last
    point whose evaluation succeeded.
    """
    if theta <= 0.0:
        raise ValueError("theta must be positive")
    if iter_bfgs < 0:
        raise ValueError("iter_bfgs must be non-negative")
    if ls is None:
        ls = LineSearchParams()

    x = np.asarray(x0, dtype=float)
    H = np.eye(len(x))
    grad: np.ndarray | None = None
    grad_norm = math.inf
    k = 0
    status = DIVERGED
    while True:
        if stop_probe is not None and stop_probe():
            status = STOPPED
            break
        if grad is None:
            try:
                grad = forward_gradient(f, x)
            except DomainError:
                status = DOMAIN_ERROR
                break
            grad_norm = float(np.linalg.norm(grad))
        if grad_norm < theta:
            status = CONVERGED
            break
        if k >= iter_bfgs:
            status = DIVERGED
            break
        p = -(H @ grad)
        try:
            f0 = float(f(x.tolist()))
            alpha = armijo_search(f, x, p, grad, f0, ls)
            x_new = x + alpha * p
            grad_new = forward_gradient(f, x_new)
        except DomainError:
            status = DOMAIN_ERROR
            break
        H = hessian_update(H, x_new - x, grad_new - grad)
        x = x_new
        grad = grad_new
        grad_norm = float(np.linalg.norm(grad))
        k += 1

    try:
        f_final = float(f(x.tolist()))
    except DomainError:
        f_final = math.nan
    return BfgsOutcome(
        x_final=tuple(x.tolist()),
        f_final=f_final,
        grad_norm=grad_norm,
        iterations=k,
        status=status,
    )
