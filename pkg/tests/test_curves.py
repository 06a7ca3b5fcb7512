from __future__ import annotations

import numpy as np
import pytest

from restrictlab.curves import CurveSpec, from_name, linear, parabola, power_rescaled, quadratic_m
from restrictlab.errors import PreconditionError


def test_parabola_bounds():
    c = parabola()
    assert c.m == 2.0
    m1, m2 = c.derivative_bounds()
    assert m1 == pytest.approx(4.0)
    assert m2 == pytest.approx(2.0)
    np.testing.assert_allclose(c.point([1.0, 2.0]), [[1.0, 1.0], [2.0, 4.0]])


def test_linear_curve_rejected():
    with pytest.raises(PreconditionError):
        linear()


def test_m_below_one_rejected():
    with pytest.raises(PreconditionError):
        CurveSpec(lambda t: t**2, lambda t: 2 * t, lambda t: 2 + 0 * t, m=0.5)


def test_comparability_enforced():
    with pytest.raises(PreconditionError):
        parabola(c0=1.5)


@pytest.mark.parametrize("m", [1, 2, 16, 1000])
def test_quadratic_m_derivatives(m):
    c = quadratic_m(m)
    t = np.linspace(1, 2, 11)
    np.testing.assert_allclose(c.phi_d1(t), m * (t + 0.5))
    np.testing.assert_allclose(c.phi_d2(t), m)


@pytest.mark.parametrize("p,R", [(2.0, 4.0), (2.5, 64.0), (1.5, 1000.0)])
def test_power_rescaled(p, R):
    c = power_rescaled(p, R)
    assert c.m == pytest.approx(R ** (p - 1))
    assert c.phi(2.0) == pytest.approx(R ** (p - 1) * 2**p)


def test_steep_power_needs_larger_c0():
    with pytest.raises(PreconditionError):
        power_rescaled(3.0, 64.0)
    assert power_rescaled(3.0, 64.0, c0=16.0).m == 64.0**2


def test_power_rescaled_rejects():
    with pytest.raises(PreconditionError):
        power_rescaled(1.0, 4.0)
    with pytest.raises(PreconditionError):
        power_rescaled(2.0, 0.5)


def test_scaled_curve():
    c = parabola().scaled(3.0)
    assert c.m == 6.0
    assert c.phi(2.0) == 12.0


def test_from_name():
    assert from_name("quadratic_m", m=4).m == 4
    with pytest.raises(PreconditionError):
        from_name("spiral")
