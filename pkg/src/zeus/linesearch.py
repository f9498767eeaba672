"""Backtracking line search under the Armijo sufficient-decrease test."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["LineSearchParams", "armijo_search"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LineSearchParams:
    """Step-halving schedule and acceptance constant.

    The sufficient-decrease constant ``c1_armijo`` and the halving factor
    must lie strictly in (0, 1).
    """

    c1_armijo: float = 0.3
    alpha0: float = 1.0
    iter_ls: int = 20
    shrink: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.c1_armijo < 1.0:
            raise ValueError("c1_armijo must be in (0, 1)")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must be in (0, 1)")
        if self.alpha0 <= 0.0:
            raise ValueError("alpha0 must be positive")
        if self.iter_ls < 1:
            raise ValueError("iter_ls must be a positive integer")


def armijo_search(
    f: Callable[[Sequence[float]], float],
    x: np.ndarray,
    p: np.ndarray,
    g: np.ndarray,
    f0: float,
    params: LineSearchParams,
) -> float:
    """Step size along ``p`` accepted by the Armijo inequality.

    Tries alpha0, alpha0*shrink, alpha0*shrink**2, ... and returns the
    first step with f(x + alpha p) <= f0 + c1_armijo * alpha * (g . p).
    If no trial up to shrink**iter_ls satisfies the inequality, the last
    (smallest) trial step is returned anyway; the caller's gradient test
    and iteration cap are responsible for detecting lack of progress.
    Objective evaluations per call never exceed iter_ls + 1.

    ``g`` is the gradient at ``x`` and ``f0 = f(x)``; the directional
    derivative g . p is computed once, before the loop.
    """
    ddir = float(np.dot(g, p))
    if ddir >= 0.0:
        log.debug("line search entered with non-descent direction (g.p=%g)", ddir)
    c1 = params.c1_armijo
    alpha = params.alpha0
    for k in range(params.iter_ls + 1):
        f_trial = f((x + alpha * p).tolist())
        if f_trial <= f0 + c1 * alpha * ddir:
            return alpha
        if k < params.iter_ls:
            alpha *= params.shrink
    return alpha
