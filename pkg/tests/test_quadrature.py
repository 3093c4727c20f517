import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from detlab import quadrature as Q


def test_gauss_rules_exactness():
    x, w = Q.gauss_legendre01(8)
    assert np.isclose(np.sum(w * x ** 15), 1 / 16, rtol=1e-14)
    t, w = Q.gauss_jacobi01(8, -0.5)
    # int_0^1 t^-1/2 t^3 dt = 1/3.5
    assert np.isclose(np.sum(w * t ** -0.5 * t ** 3), 1 / 3.5, rtol=1e-13)


def test_endpoint_singularity():
    v, err = Q.integrate_radial_1d(lambda r: r ** -0.5, 0, 1, (Q.Singularity(0.0, -0.5),), level=8)
    assert abs(v - 2) <= 1e-12 and err <= 1e-12


def test_interior_singularity_matches_scipy():
    s = 0.6
    g = lambda r: np.abs(r - s) ** (-1 / 3) * np.cos(r)  # noqa: E731
    v, _ = Q.integrate_radial_1d(g, 0.1, 1.0, (Q.Singularity(s, -1 / 3),), level=8)
    ref = integrate.quad(g, 0.1, 1.0, points=[s], limit=200, epsabs=1e-13)[0]
    assert abs(v - ref) <= 1e-10


def test_non_integrable_rejected():
    with pytest.raises(Q.NonIntegrableError):
        Q.radial_rule(0, 1, (Q.Singularity(0.5, -1.0),))


def test_no_node_on_singular_location():
    x, _ = Q.radial_rule(0, 1, (Q.Singularity(0.4, -0.5), Q.Singularity(0.0, 0.0)), level=6)
    assert not np.any(x == 0.4) and np.all(x > 0)


def test_non_finite_integrand_reports_location():
    with pytest.raises(Q.IntegrandError) as info, np.errstate(divide="ignore"):
        Q.integrate_radial_1d(lambda r: 1 / (r - r[3]), 0, 1, level=4)
    assert info.value.location is not None


def test_sphere_rules():
    for n, m in ((2, 16), (3, 16)):
        rule = Q.sphere_rule(n, m)
        assert np.isclose(rule.weights.sum(), Q.sphere_area(n))
        assert np.allclose(np.linalg.norm(rule.nodes, axis=1), 1)
    # x^2 over S^2 = 4 pi / 3
    rule = Q.sphere_rule(3, 16)
    assert np.isclose(np.sum(rule.weights * rule.nodes[:, 0] ** 2), 4 * math.pi / 3)
    with pytest.raises(NotImplementedError):
        Q.sphere_rule(4, 8)


@given(k=st.integers(0, 15))
def test_circle_trapezoid_exact_for_low_trig(k):
    rule = Q.sphere_rule(2, 16)
    th = np.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
    exact = 2 * math.pi if k == 0 else 0.0
    assert abs(np.sum(rule.weights * np.cos(k * th)) - exact) <= 1e-12


def test_annulus_volume_and_moment():
    rule = Q.AnnulusRule(2, 0.2, 0.9, level=5)
    v, _ = Q.integrate_annulus(lambda x: np.ones(len(x)), rule)
    assert np.isclose(v, rule.volume())
    v, _ = Q.integrate_annulus(lambda x: np.sum(x * x, axis=1), Q.AnnulusRule(2, 0, 1, level=5))
    assert np.isclose(v, math.pi / 2)


@pytest.mark.parametrize("n", [2, 3])
def test_support_restricted_rule_matches_closed_form(n):
    # int (1 - s)^3 over a ball of radius rho = |B_rho| * 6 / ((n+2)(n+4)(n+6)) * n... computed directly
    c, rho = np.array([0.3, -0.2, 0.1][:n]), 0.25
    f = lambda x: np.clip(1 - np.sum((x - c) ** 2, axis=1) / rho ** 2, 0, None) ** 3  # noqa: E731
    # radial oracle: |S^{n-1}| int_0^rho (1 - r^2/rho^2)^3 r^{n-1} dr
    exact = Q.sphere_area(n) * integrate.quad(lambda r: (1 - r * r / rho ** 2) ** 3 * r ** (n - 1), 0, rho)[0]
    rule = Q.AnnulusRule(n, 0.0, 1.0, (), 7, support=(tuple(c), rho))
    v, _ = Q.integrate_annulus(f, rule)
    assert abs(v - exact) <= 1e-12


def test_monte_carlo_is_seeded():
    rule = Q.MonteCarloRule(4, 0, 1, 20000, seed=3)
    a = Q.integrate_monte_carlo(lambda x: np.ones(len(x)), rule)
    b = Q.integrate_monte_carlo(lambda x: np.ones(len(x)), rule)
    assert a == b
    assert np.isclose(a[0], Q.ball_volume(4))
    v, se = Q.integrate_monte_carlo(lambda x: np.sum(x * x, axis=1), rule)
    # int_B |x|^2 = |S^3| / 6
    assert abs(v - Q.sphere_area(4) / 6) <= 5 * se
