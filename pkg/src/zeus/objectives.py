"""Benchmark objective functions and their registry.

Every function here is written once in terms of the generic scalar
helpers from :mod:`zeus.autodiff`, so the identical source text is
evaluated for plain values and, on Dual inputs, for derivatives.  A
user-supplied objective participates in the full pipeline by following
the same contract: take a sequence of float-or-Dual scalars, return one
scalar of the same kind, and touch them only through arithmetic and the
generic helpers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .autodiff import cos, exp, sqrt

__all__ = [
    "ObjectiveSpec",
    "rosenbrock",
    "rastrigin",
    "ackley",
    "goldstein_price",
    "get_objective",
    "objective_names",
]

_TWO_PI = 2.0 * math.pi


def rosenbrock(x: Sequence) -> object:
    """Banana-valley function, sum over consecutive coordinate pairs.

    f(x) = sum_{i=1}^{n-1} [(1 - x_i)^2 + 100 (x_{i+1} - x_i^2)^2]

    Global minimum 0 at (1, ..., 1).  Requires len(x) >= 2.
    """
    total = 0.0
    for i in range(len(x) - 1):
        a = 1.0 - x[i]
        b = x[i + 1] - x[i] * x[i]
        total = total + (a * a + 100.0 * (b * b))
    return total


def rastrigin(x: Sequence) -> object:
    """Highly multimodal function with local minima near every integer
    lattice point.

    f(x) = 10 n + sum_i [x_i^2 - 10 cos(2 pi x_i)]

    Global minimum 0 at the origin; the canonical search range
    [-5.12, 5.12] contains 11 integers per coordinate, hence 11^n local
    minima.
    """
    total = 10.0 * len(x)
    for xi in x:
        total = total + (xi * xi - 10.0 * cos(_TWO_PI * xi))
    return total


def ackley(x: Sequence) -> object:
    """Nearly flat outer region with a deep multimodal well at the origin.

    f(x) = -20 exp(-0.2 sqrt(mean(x_i^2))) - exp(mean(cos(2 pi x_i)))
           + e + 20

    The value at the origin is 0, but the gradient does not exist there:
    sqrt'(0) is undefined, so Dual evaluation at exactly the origin raises
    :class:`zeus.autodiff.DomainError`.
    """
    d = len(x)
    sum_sq = 0.0
    sum_cos = 0.0
    for xi in x:
        sum_sq = sum_sq + xi * xi
        sum_cos = sum_cos + cos(_TWO_PI * xi)
    return (
        -20.0 * exp(-0.2 * sqrt(sum_sq / d))
        - exp(sum_cos / d)
        + math.e
        + 20.0
    )


def goldstein_price(x: Sequence) -> object:
    """Two-dimensional function with a single global minimum of 3 at
    (0, -1) and steep polynomial growth toward the range corners.
    """
    if len(x) != 2:
        raise ValueError("goldstein_price is defined for exactly 2 dimensions")
    x1, x2 = x[0], x[1]
    s = x1 + x2 + 1.0
    first = 1.0 + s * s * (
        19.0
        - 14.0 * x1
        + 3.0 * x1 * x1
        - 14.0 * x2
        + 6.0 * x1 * x2
        + 3.0 * x2 * x2
    )
    t = 2.0 * x1 - 3.0 * x2
    second = 30.0 + t * t * (
        18.0
        - 32.0 * x1
        + 12.0 * x1 * x1
        + 48.0 * x2
        - 36.0 * x1 * x2
        + 27.0 * x2 * x2
    )
    return first * second


@dataclass(frozen=True)
class ObjectiveSpec:
    """A registered objective with its search box and known optimum.

    ``optimum_x``/``optimum_f`` are None for objectives whose global
    minimum is unknown (user-supplied functions).  ``gradient_continuous``
    is False for functions whose derivative fails to exist somewhere in
    the search range.
    """

    name: str
    fn: Callable[[Sequence], object]
    dim: int
    lower: float
    upper: float
    optimum_x: tuple[float, ...] | None = None
    optimum_f: float | None = None
    gradient_continuous: bool = True

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("objective range requires lower < upper")
        if self.dim < 1:
            raise ValueError("objective dimension must be >= 1")


# Default ranges: Rastrigin's [-5.12, 5.12] gives the 11-integers-per-axis
# structure; the others use the conventional literature boxes.  These are
# assumptions, not measured properties of the functions.
_REGISTRY: dict[str, dict] = {
    "rosenbrock": dict(
        fn=rosenbrock,
        min_dim=2,
        fixed_dim=None,
        lower=-5.0,
        upper=5.0,
        optimum=lambda dim: ((1.0,) * dim, 0.0),
        gradient_continuous=True,
    ),
    "rastrigin": dict(
        fn=rastrigin,
        min_dim=1,
        fixed_dim=None,
        lower=-5.12,
        upper=5.12,
        optimum=lambda dim: ((0.0,) * dim, 0.0),
        gradient_continuous=True,
    ),
    "ackley": dict(
        fn=ackley,
        min_dim=1,
        fixed_dim=None,
        lower=-5.0,
        upper=5.0,
        optimum=lambda dim: ((0.0,) * dim, 0.0),
        gradient_continuous=False,
    ),
    "goldstein_price": dict(
        fn=goldstein_price,
        min_dim=2,
        fixed_dim=2,
        lower=-2.0,
        upper=2.0,
        optimum=lambda dim: ((0.0, -1.0), 3.0),
        gradient_continuous=True,
    ),
}


def objective_names() -> list[str]:
    """Names accepted by :func:`get_objective` and the CLI."""
    return sorted(_REGISTRY)


def get_objective(name: str, dim: int = 2) -> ObjectiveSpec:
    """Look up a registered objective by name at the given dimension.

    Raises
    ------
    KeyError
        Unknown objective name.
    ValueError
        Dimension unsupported by the named objective.
    """
    try:
        entry = _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown objective {name!r}; known: {', '.join(objective_names())}"
        ) from None
    fixed = entry["fixed_dim"]
    if fixed is not None and dim != fixed:
        raise ValueError(f"{name} is only defined for dim={fixed}")
    if dim < entry["min_dim"]:
        raise ValueError(f"{name} requires dim >= {entry['min_dim']}")
    opt_x, opt_f = entry["optimum"](dim)
    return ObjectiveSpec(
        name=name,
        fn=entry["fn"],
        dim=dim,
        lower=entry["lower"],
        upper=entry["upper"],
        optimum_x=opt_x,
        optimum_f=opt_f,
        gradient_continuous=entry["gradient_continuous"],
    )
