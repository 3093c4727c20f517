import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad as scipy_quad

from detlab import fields as F
from detlab import quasimono as Q
from detlab import scalarlaws as L
from detlab.residuals import QuadSpec

LAW = L.identity()

# exact values of Q(eps) for h = id, n = 2, a = 1/2 (piecewise polynomial integrals done by hand)
EXACT_Q = {
    0.2: Fraction(3059, 24000),
    0.1: Fraction(461, 4000),
    0.05: Fraction(4303, 48000),
    0.02: Fraction(1769, 150000),
    0.01: Fraction(-47329, 400000),
}


def test_rho_endpoints_and_slope():
    p = Q.QMProfileParams(2, 0.5, 0.1)
    rho, drho = Q.rho_profile(p, np.array([0.0, 0.2, 0.45, 0.5, 1.0]))
    assert np.allclose(rho, [-1, -1, -0.75, -0.5, 0.0])
    assert drho[2] == pytest.approx(5.0)
    p3 = Q.QMProfileParams(3, 0.6, 0.2)
    assert Q.rho_profile(p3, np.array([0.6]))[0][0] == pytest.approx(-1 / 3)


@given(st.integers(2, 5), st.floats(0.1, 0.9), st.floats(0.01, 0.99))
def test_rho_is_continuous(n, a, frac):
    p = Q.QMProfileParams(n, a, frac * a)
    for r0 in (p.b, p.a):
        left, right = Q.rho_profile(p, np.array([r0 - 1e-12, r0 + 1e-12]))[0]
        assert abs(left - right) <= 1e-9 * (1 + 1 / p.epsilon)


def test_parameters_rejected():
    with pytest.raises(ValueError):
        Q.QMProfileParams(2, 0.5, 0.5)
    with pytest.raises(ValueError):
        Q.QMProfileParams(2, 1.0, 0.1)


def test_integrand_hand_values():
    p = Q.QMProfileParams(2, 0.5, 0.1)
    # r = 0.45: rho = -3/4, rho' = 5, argument 5/8, factor -3/2
    assert Q.qm_integrand(LAW, p, np.array([0.45]))[0] == pytest.approx(-0.421875, abs=1e-15)
    # r = 0.75: rho = -1/4, rho' = 1, factor vanishes
    assert Q.qm_integrand(LAW, p, np.array([0.75]))[0] == pytest.approx(0.0, abs=1e-15)
    r = np.linspace(0.01, 0.39, 50)
    assert np.all(Q.qm_integrand(L.exponential(), p, r) == 0)
    with pytest.raises(F.SingularPointError):
        Q.qm_integrand(LAW, p, np.array([0.4]))


def test_q_matches_exact_rationals():
    for eps, exact in EXACT_Q.items():
        q, err = Q.q_value(LAW, Q.QMProfileParams(2, 0.5, eps))
        assert abs(q - float(exact)) <= 1e-13
        assert err <= 1e-12


def test_q_matches_scipy_for_nonlinear_law():
    p = Q.QMProfileParams(3, 0.5, 0.05)
    law = L.exp_normalized()
    ref = sum(scipy_quad(lambda r: Q.qm_integrand(law, p, np.array([r]))[0], lo, hi, epsabs=1e-13)[0]
              for lo, hi in p.pieces)
    assert abs(Q.q_value(law, p)[0] - ref) <= 1e-10


def test_sweep_sign_change():
    eps = sorted(EXACT_Q, reverse=True)
    res = Q.qm_sweep(LAW, 0.5, eps, growth=L.GrowthParams(0.5, 2.0, 0.0, 0.0))
    assert res.first_negative == 0.01
    assert [row.epsilon for row in res.rows] == eps
    qs = [row.Q for row in res.rows]
    assert all(x > y for x, y in zip(qs, qs[1:]))
    assert res.csv_rows()[0][0] == 0.2
    assert res.to_dict()["first_negative"] == 0.01


def test_sweep_growth_violation():
    with pytest.raises(ValueError):
        Q.qm_sweep(L.exponential(), 0.5, [0.1], growth=L.GrowthParams(0.5, 2.0, 0.0, 0.0))


def test_max_argument():
    p = Q.QMProfileParams(2, 0.5, 0.1)
    # attained at r = 1 on the outer piece: 1 + 1 * 1 * 1
    assert Q.max_argument(p) == pytest.approx(2.0)
    # middle piece peaks at r = a with 1/4 + 1/2 * 5 * 1/2
    assert Q.max_argument(Q.QMProfileParams(2, 0.5, 0.05)) == pytest.approx(0.25 + 0.5 * 10 * 0.5)


def test_volume_probe_matches_reduction():
    p = Q.QMProfileParams(2, 0.5, 0.01)
    vol, red = Q.volume_vs_reduced(LAW, p, QuadSpec(level=7))
    assert abs(vol - red) <= 0.01 * abs(red)
    assert vol < 0
    assert red == pytest.approx(2 * math.pi * float(EXACT_Q[0.01]), rel=1e-12)


def test_probe_zero_and_degenerate_matrix(rng):
    zero = F.bump_test_field([0.1, 0.0], 0.3, [0.0, 0.0])
    vals, low = Q.quasimonotonicity_probe(LAW, np.eye(2), [zero], QuadSpec(level=5))
    assert vals == [0.0] and low == 0.0
    fields = [F.random_bump(rng, 2) for _ in range(4)]
    vals, low = Q.quasimonotonicity_probe(L.power(1.0), np.zeros((2, 2)), fields, QuadSpec(level=6))
    assert low >= -1e-12
