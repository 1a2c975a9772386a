import numpy as np
import pytest
from scipy.integrate import quad

import kirchhoffsim as ks


def test_power_p1_closed_forms():
    co = ks.power_coefficient(2.0, 1.0)
    t = np.array([0.0, 1.0, 9.0])
    np.testing.assert_allclose(co.value(t), 2.0 / (1 + t))
    np.testing.assert_allclose(co.derivative(t), -2.0 / (1 + t) ** 2)
    np.testing.assert_allclose(co.rate(t), 1.0 / (1 + t))
    np.testing.assert_allclose(co.integral(t), 2.0 * np.log1p(t))
    assert co.h2b_compliant
    assert co.h2b_constants() == (2.0, 2.0)


def test_power_small_k_witnesses():
    co = ks.power_coefficient(0.5, 1.0)
    # (1+t)|b'|/b = 1 needs K4 >= 1 even when K < 1
    assert co.h2b_constants() == (0.5, 1.0)


def test_power_fractional_integral_matches_quadrature():
    co = ks.power_coefficient(1.7, 0.6)
    for t_end in (0.5, 3.0, 50.0):
        num, _ = quad(lambda s: co.value(s), 0.0, t_end, limit=200)
        assert co.integral(t_end) == pytest.approx(num, rel=1e-9)
    assert not co.h2b_compliant
    assert co.h2b_constants() is None


def test_constant_family():
    co = ks.constant_coefficient(3.0)
    assert co.value(7.0) == 3.0
    assert co.derivative(7.0) == 0.0
    assert co.integral(4.0) == pytest.approx(12.0)
    assert not co.h2b_compliant


def test_validation():
    with pytest.raises(ValueError):
        ks.LinearCoefficient("power", -1.0)
    with pytest.raises(ValueError):
        ks.LinearCoefficient("power", 1.0, 1.5)
    with pytest.raises(ValueError):
        ks.LinearCoefficient("spline", 1.0)
