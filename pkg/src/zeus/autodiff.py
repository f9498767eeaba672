"""First-order forward-mode automatic differentiation on dual numbers.

A dual number a + b*eps (eps**2 = 0) carries a value in ``real`` and a
tangent in ``dual``; arithmetic on duals propagates exact first
derivatives.  Objective functions written once in terms of the generic
helpers below (:func:`exp`, :func:`cos`, ...) are evaluable both on plain
floats and on :class:`Dual` scalars, so the same definition serves value
and gradient computation.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Dual",
    "DomainError",
    "exp",
    "cos",
    "sin",
    "sqrt",
    "log",
    "powf",
    "forward_gradient",
]

_SCALARS = (int, float)


class DomainError(ArithmeticError):
    """Evaluation left the domain where the value or derivative exists."""


def _safe_exp(v: float) -> float:
    # math.exp raises instead of following IEEE to infinity; an infinite
    # value lets callers (line search, residual checks) reject the point.
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _safe_pow(base: float, exponent: float) -> float:
    try:
        return math.pow(base, exponent)
    except OverflowError:
        negative = (
            base < 0.0
            and float(exponent).is_integer()
            and int(exponent) % 2 != 0
        )
        return -math.inf if negative else math.inf
    except ValueError:
        raise DomainError(
            "fractional power of a negative number"
        ) from None


class Dual:
    """Scalar a + b*eps; ``real`` is the value part, ``dual`` the tangent."""

    __slots__ = ("real", "dual")

    def __init__(self, real: float, dual: float = 0.0):
        self.real = real
        self.dual = dual

    def __repr__(self) -> str:
        return f"Dual({self.real!r}, {self.dual!r})"

    def __neg__(self) -> "Dual":
        return Dual(-self.real, -self.dual)

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real + other.real, self.dual + other.dual)
        if isinstance(other, _SCALARS):
            return Dual(self.real + other, self.dual)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.real - other.real, self.dual - other.dual)
        if isinstance(other, _SCALARS):
            return Dual(self.real - other, self.dual)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _SCALARS):
            return Dual(other - self.real, -self.dual)
        return NotImplemented

    def __mul__(self, other):
        # (a + b eps)(c + d eps) = ac + (ad + bc) eps; the eps**2 term drops.
        if isinstance(other, Dual):
            return Dual(
                self.real * other.real,
                self.real * other.dual + self.dual * other.real,
            )
        if isinstance(other, _SCALARS):
            return Dual(self.real * other, self.dual * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            c = other.real
            if c == 0.0:
                raise DomainError("division by a dual number with zero real part")
            return Dual(
                self.real / c,
                (self.dual * c - self.real * other.dual) / (c * c),
            )
        if isinstance(other, _SCALARS):
            if other == 0.0:
                raise DomainError("division by zero")
            return Dual(self.real / other, self.dual / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _SCALARS):
            c = self.real
            if c == 0.0:
                raise DomainError("division by a dual number with zero real part")
            return Dual(other / c, -other * self.dual / (c * c))
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, Dual):
            # a**b = exp(b log a); requires a > 0.
            return exp(exponent * log(self))
        if isinstance(exponent, _SCALARS):
            if float(exponent).is_integer():
                n = int(exponent)
                if self.real == 0.0 and n < 1:
                    raise DomainError("zero base with non-positive integer exponent")
                return Dual(
                    _safe_pow(self.real, n),
                    0.0 if n == 0 else n * _safe_pow(self.real, n - 1) * self.dual,
                )
            if self.real <= 0.0:
                raise DomainError(
                    "non-integer power requires a positive real part"
                )
            return Dual(
                _safe_pow(self.real, exponent),
                exponent * _safe_pow(self.real, exponent - 1.0) * self.dual,
            )
        return NotImplemented

    def __rpow__(self, base):
        if isinstance(base, _SCALARS):
            return powf(base, self)
        return NotImplemented

    # Ordering compares real parts only; the tangent carries no order.
    def __lt__(self, other):
        return self.real < (other.real if isinstance(other, Dual) else other)

    def __le__(self, other):
        return self.real <= (other.real if isinstance(other, Dual) else other)

    def __gt__(self, other):
        return self.real > (other.real if isinstance(other, Dual) else other)

    def __ge__(self, other):
        return self.real >= (other.real if isinstance(other, Dual) else other)


def exp(x):
    """e**x for a float or Dual; overflows to infinity, never raises."""
    if isinstance(x, Dual):
        v = _safe_exp(x.real)
        return Dual(v, v * x.dual)
    return _safe_exp(x)


def cos(x):
    """cos(x) for a float or Dual."""
    if isinstance(x, Dual):
        return Dual(math.cos(x.real), -math.sin(x.real) * x.dual)
    return math.cos(x)


def sin(x):
    """sin(x) for a float or Dual."""
    if isinstance(x, Dual):
        return Dual(math.sin(x.real), math.cos(x.real) * x.dual)
    return math.sin(x)


def sqrt(x):
    """sqrt(x) for a float or Dual.

    The derivative 1/(2 sqrt(x)) does not exist at x = 0, so a Dual with
    zero real part raises :class:`DomainError` even though the plain value
    would be 0.  This is exactly the failure locus of gradient-based
    minimization on functions shaped like ``sqrt(sum(x**2))`` near their
    minimum.
    """
    if isinstance(x, Dual):
        if x.real < 0.0:
            raise DomainError("sqrt of a negative number")
        if x.real == 0.0:
            raise DomainError("derivative of sqrt is undefined at zero")
        v = math.sqrt(x.real)
        return Dual(v, x.dual / (2.0 * v))
    if x < 0.0:
        raise DomainError("sqrt of a negative number")
    return math.sqrt(x)


def log(x):
    """Natural logarithm for a float or Dual; requires x > 0."""
    if isinstance(x, Dual):
        if x.real <= 0.0:
            raise DomainError("log requires a positive argument")
        return Dual(math.log(x.real), x.dual / x.real)
    if x <= 0.0:
        raise DomainError("log requires a positive argument")
    return math.log(x)


def powf(base, exponent):
    """base**exponent where either side may be a Dual.

    Falls back to exp(exponent * log(base)) when the exponent carries a
    tangent, so it requires base > 0 in that case.
    """
    if isinstance(exponent, Dual):
        return exp(exponent * log(base))
    if isinstance(base, Dual):
        return base**exponent
    return _safe_pow(base, exponent)


def forward_gradient(
    f: Callable[[Sequence], object], x: Sequence[float]
) -> np.ndarray:
    """Gradient of ``f`` at ``x`` by seeding one coordinate at a time.

    ``f`` must accept a sequence of Dual scalars.  Each of the ``len(x)``
    evaluations seeds coordinate i's tangent to 1 and resets it to 0
    afterwards, so the input vector is clean for the next seed and for any
    later call.

    Raises
    ------
    DomainError
        Propagated from ``f`` when the value or a derivative does not
        exist at ``x``.
    """
    xd = [Dual(float(v), 0.0) for v in x]
    grad = np.empty(len(xd))
    for i, di in enumerate(xd):
        di.dual = 1.0
        result = f(xd)
        grad[i] = result.dual if isinstance(result, Dual) else 0.0
        di.dual = 0.0
    return grad
