import math

import numpy as np
import pytest

from zeus.autodiff import (
    DomainError,
    Dual,
    cos,
    exp,
    forward_gradient,
    log,
    powf,
    sin,
    sqrt,
)
from zeus.objectives import ackley, goldstein_price, rastrigin, rosenbrock


def central_diff(f, x, i, h=1e-6):
    """Independent derivative oracle: symmetric finite difference."""
    lo = list(x)
    hi = list(x)
    lo[i] -= h
    hi[i] += h
    return (f(hi) - f(lo)) / (2.0 * h)


class TestDualArithmetic:
    def test_mul_drops_eps_squared(self):
        # (2 + 3e)(5 + 7e) = 10 + (14 + 15)e; the 21 e^2 term vanishes
        z = Dual(2.0, 3.0) * Dual(5.0, 7.0)
        assert (z.real, z.dual) == (10.0, 29.0)

    def test_additive_identity(self):
        z = Dual(1.5, -2.5) + Dual(0.0, 0.0)
        assert (z.real, z.dual) == (1.5, -2.5)

    def test_div_quotient_rule(self):
        # hand-derived: (1 + 1e)/(2 + 0e) = 1/2 + (1*2 - 1*0)/4 e
        z = Dual(1.0, 1.0) / Dual(2.0, 0.0)
        assert (z.real, z.dual) == (0.5, 0.5)

    def test_div_general_quotient_rule(self):
        # (a + be)/(c + de): dual part (bc - ad)/c^2
        a, b, c, d = 3.0, 5.0, 7.0, 2.0
        z = Dual(a, b) / Dual(c, d)
        assert z.real == pytest.approx(a / c, rel=1e-15)
        assert z.dual == pytest.approx((b * c - a * d) / c**2, rel=1e-15)

    def test_div_by_zero_real_part(self):
        with pytest.raises(DomainError):
            Dual(1.0, 0.0) / Dual(0.0, 3.0)
        with pytest.raises(DomainError):
            2.0 / Dual(0.0, 1.0)

    def test_scalar_mixing(self):
        z = 2.0 + Dual(1.0, 4.0)
        assert (z.real, z.dual) == (3.0, 4.0)
        z = 2.0 - Dual(1.0, 4.0)
        assert (z.real, z.dual) == (1.0, -4.0)
        z = 3.0 * Dual(2.0, 5.0)
        assert (z.real, z.dual) == (6.0, 15.0)
        z = Dual(2.0, 5.0) / 2.0
        assert (z.real, z.dual) == (1.0, 2.5)
        z = 1.0 / Dual(2.0, 1.0)
        assert (z.real, z.dual) == (0.5, -0.25)
        z = -Dual(2.0, -3.0)
        assert (z.real, z.dual) == (-2.0, 3.0)

    def test_constant_has_zero_dual(self):
        assert Dual(4.2).dual == 0.0

    def test_comparisons_use_real_parts(self):
        assert Dual(1.0, 99.0) < Dual(2.0, -99.0)
        assert Dual(1.0, 99.0) <= 1.0
        assert Dual(3.0, 0.0) > 2.5
        assert Dual(3.0, 1.0) >= Dual(3.0, -1.0)

    def test_integer_pow(self):
        z = Dual(3.0, 1.0) ** 2
        assert (z.real, z.dual) == (9.0, 6.0)
        z = Dual(2.0, 1.0) ** 0
        assert (z.real, z.dual) == (1.0, 0.0)
        z = Dual(-2.0, 1.0) ** 3
        assert (z.real, z.dual) == (-8.0, 12.0)

    def test_real_pow(self):
        z = Dual(4.0, 1.0) ** 1.5
        assert z.real == pytest.approx(8.0, rel=1e-15)
        assert z.dual == pytest.approx(1.5 * 4.0**0.5, rel=1e-15)
        with pytest.raises(DomainError):
            Dual(-1.0, 1.0) ** 0.5

    def test_dual_exponent_pow(self):
        # d/dp of c**p is c**p ln c; checked against the finite difference
        c, p = 3.0, 1.7
        z = powf(c, Dual(p, 1.0))
        assert z.real == pytest.approx(c**p, rel=1e-14)
        fd = central_diff(lambda v: c ** v[0], [p], 0)
        assert z.dual == pytest.approx(fd, rel=1e-8)
        z2 = c ** Dual(p, 1.0)
        assert (z2.real, z2.dual) == (z.real, z.dual)


class TestElementaryFunctions:
    def test_cos_at_zero(self):
        z = cos(Dual(0.0, 1.0))
        assert (z.real, z.dual) == (1.0, 0.0)

    def test_exp_at_zero(self):
        z = exp(Dual(0.0, 1.0))
        assert (z.real, z.dual) == (1.0, 1.0)

    def test_sqrt_chain_rule(self):
        # hand-derived: sqrt(4 + 1e) = 2 + 1/(2 sqrt 4) e
        z = sqrt(Dual(4.0, 1.0))
        assert (z.real, z.dual) == (2.0, 0.25)

    def test_sin_chain_rule(self):
        z = sin(Dual(math.pi / 2.0, 3.0))
        assert z.real == pytest.approx(1.0, rel=1e-15)
        assert z.dual == pytest.approx(0.0, abs=1e-15)

    def test_float_passthrough(self):
        assert exp(0.0) == 1.0
        assert cos(0.0) == 1.0
        assert sin(0.0) == 0.0
        assert sqrt(4.0) == 2.0
        assert log(1.0) == 0.0

    def test_sqrt_domain(self):
        with pytest.raises(DomainError):
            sqrt(-1.0)
        with pytest.raises(DomainError):
            sqrt(Dual(-1.0, 0.0))
        # value exists at 0 but the derivative does not
        assert sqrt(0.0) == 0.0
        with pytest.raises(DomainError):
            sqrt(Dual(0.0, 1.0))
        with pytest.raises(DomainError):
            sqrt(Dual(0.0, 0.0))

    def test_log_domain(self):
        with pytest.raises(DomainError):
            log(0.0)
        with pytest.raises(DomainError):
            log(Dual(-2.0, 1.0))


class TestForwardGradient:
    def test_rosenbrock_at_optimum(self):
        grad = forward_gradient(rosenbrock, [1.0, 1.0])
        assert grad == pytest.approx([0.0, 0.0], abs=0.0)

    def test_rastrigin_at_origin(self):
        for dim in (1, 2, 5):
            grad = forward_gradient(rastrigin, [0.0] * dim)
            assert grad == pytest.approx([0.0] * dim, abs=0.0)

    def test_rosenbrock_at_zero(self):
        # hand differentiation: df/dx1 = -2(1-x1) - 400 x1 (x2 - x1^2) = -2,
        # df/dx2 = 200 (x2 - x1^2) = 0 at the origin
        grad = forward_gradient(rosenbrock, [0.0, 0.0])
        assert grad == pytest.approx([-2.0, 0.0], abs=0.0)

    def test_ackley_gradient_at_origin_raises(self):
        with pytest.raises(DomainError):
            forward_gradient(ackley, [0.0, 0.0])

    def test_exact_eval_count(self):
        calls = 0

        def counting(x):
            nonlocal calls
            calls += 1
            return rastrigin(x)

        for dim in (1, 3, 7):
            calls = 0
            forward_gradient(counting, [0.3] * dim)
            assert calls == dim

    def test_seed_reset_discipline(self):
        x = [0.7, -1.3, 2.1]
        first = forward_gradient(rastrigin, x)
        second = forward_gradient(rastrigin, x)
        assert first.tolist() == second.tolist()

    def test_constant_objective(self):
        grad = forward_gradient(lambda x: 7.0, [1.0, 2.0])
        assert grad.tolist() == [0.0, 0.0]

    def test_finite_difference_agreement(self):
        # every registered objective, 100 seeded points per function
        cases = [
            (rosenbrock, 3, (-5.0, 5.0)),
            (rastrigin, 3, (-5.12, 5.12)),
            (ackley, 3, (-5.0, 5.0)),
            (goldstein_price, 2, (-2.0, 2.0)),
        ]
        rng = np.random.default_rng(20240917)
        for fn, dim, (lo, hi) in cases:
            for _ in range(100):
                x = rng.uniform(lo, hi, dim).tolist()
                grad = forward_gradient(fn, x)
                for i in range(dim):
                    fd = central_diff(fn, x, i)
                    assert math.isclose(
                        grad[i], fd, rel_tol=1e-5, abs_tol=1e-8
                    ), f"{fn.__name__} at {x}, coord {i}: AD {grad[i]} vs FD {fd}"
