import math

import numpy as np
import pytest

from detlab import fields as F
from detlab import residuals as R
from detlab import scalarlaws as L
from detlab import solutions as S
from detlab.quadrature import MonteCarloRule, sphere_area

LAW = L.identity()
Q8 = R.QuadSpec(level=8, trace_levels=3)


def three_region(n=2, **kw):
    p = S.Ex1Params(n=n, lambda1=-2.0 if n == 2 else 2.0, **kw)
    return p, F.radial_field(S.ex1_profile(p))


def test_report_shape():
    z = F.bump_test_field([0.1, 0.0], 0.3, [1, 0])
    rep = R.weak_residual(LAW, F.identity_field(2), z, Q8)
    d = rep.to_dict()
    assert set(d) == {"id", "value", "error_estimate", "level", "trace", "metadata"}
    assert len(d["trace"]) == 3 and d["trace"][-1] == d["value"] and d["level"] == 8


def test_weak_residual_identity_map(rng):
    for law in (LAW, L.exponential(), L.cubic()):
        z = F.random_bump(rng, 2)
        assert abs(R.weak_residual(law, F.identity_field(2), z, Q8).value) <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_weak_residual_three_region(rng, n):
    _, u = three_region(n)
    q = R.QuadSpec(level=8 if n == 2 else 6, trace_levels=2)
    worst = max(abs(R.weak_residual(LAW, u, F.random_bump(rng, n), q).value) for _ in range(5))
    assert worst <= 1e-6


def test_weak_residual_bump_around_origin():
    _, u = three_region(2)
    z = F.bump_test_field([0.05, -0.02], 0.7, [0.6, 0.8])
    assert abs(R.weak_residual(LAW, u, z, Q8).value) <= 1e-6


def test_weak_residual_non_solution_matches_independent_quadrature():
    # phi(r) = r is not a solution; reference from scipy dblquad in polar coordinates about the bump centre
    prof = F.RadialProfile(2, (F.ProfilePiece(0, 1, lambda r: r, lambda r: np.ones_like(r)),), name="r")
    z = F.bump_test_field([0.3, 0.1], 0.4, [0.6, 0.8])
    rep = R.weak_residual(LAW, F.radial_field(prof), z, R.QuadSpec(level=8, trace_levels=4))
    assert abs(rep.value - (-0.050891229363881796)) <= 1e-12
    assert np.ptp(rep.trace) <= 1e-12 and abs(rep.value) >= 1e-3


def test_weak_residual_is_linear_in_test_field(rng):
    _, u = three_region(2)
    z1, z2 = F.random_bump(rng, 2), F.random_bump(rng, 2)
    both = F.TestField(2, lambda x: z1(x) + z2(x), lambda x: z1.jacobian(x) + z2.jacobian(x), support=None)
    q = R.QuadSpec(level=7, trace_levels=1, use_support=False)
    parts = R.weak_residual(LAW, u, z1, q).value + R.weak_residual(LAW, u, z2, q).value
    assert abs(R.weak_residual(LAW, u, both, q).value - parts) <= 1e-10


def test_null_lagrangian(rng):
    A = rng.standard_normal((2, 2))
    z = F.random_bump(rng, 2)
    assert abs(R.null_lagrangian_residual(F.linear_field(A), z, R.QuadSpec(level=3)).value) <= 1e-15
    _, u = three_region(2)
    assert abs(R.null_lagrangian_residual(u, F.random_bump(rng, 2), Q8).value) <= 1e-6
    v = F.random_polynomial_field(2, rng)
    assert abs(R.null_lagrangian_residual(v, z, Q8).value) <= 1e-8


def test_integrand_error_on_undeclared_singularity():
    bad = F.RadialProfile(2, (F.ProfilePiece(0, 1, lambda r: np.sqrt(np.abs(r - 0.5)),
                                             lambda r: 0.5 / np.sqrt(np.abs(r - 0.5)) * np.sign(r - 0.5),
                                             lambda r: np.where(r == r, np.nan, 0.0)),))
    z = F.bump_test_field([0.5, 0.0], 0.2, [1, 0])
    with pytest.raises(Exception) as info:
        R.weak_residual(LAW, F.radial_field(bad), z, R.QuadSpec(level=4))
    assert "non-finite" in str(info.value)


def test_parts_identity(rng):
    z = F.random_bump(rng, 2)
    w = F.random_polynomial_field(2, rng)
    gap = R.parts_identity_gap(F.constant_scalar(1.0), w, z, Q8).value
    assert abs(gap - abs(R.null_lagrangian_residual(w, z, Q8).value)) <= 1e-15
    assert R.parts_identity_gap(F.coordinate_scalar(0), F.identity_field(2), z, Q8).value <= 1e-8
    rep = R.parts_identity_gap(F.squared_norm_scalar(), w, z, Q8)
    assert rep.value <= 1e-7 and abs(rep.metadata["lhs"]) > 1e-4


def test_composite_field_gap(rng):
    z = F.random_bump(rng, 2)
    assert R.composite_field_gap(LAW, F.identity_field(2), z, Q8).value <= 1e-10
    assert R.composite_field_gap(LAW, F.linear_field(rng.standard_normal((2, 2))), z, Q8).value <= 1e-10
    w = F.polynomial_field([[1, 0], [0, 1], [0, 2], [2, 0]], [[1, 0, 0.1, 0], [0, 1, 0, 0.1]])
    for law in (LAW, L.exp_normalized(), L.cubic()):
        rep = R.composite_field_gap(law, w, z, Q8)
        assert rep.value <= 1e-7 and abs(rep.metadata["lhs"]) > 1e-5
    _, u = three_region(2)
    with pytest.raises(F.UnsupportedFieldError):
        R.composite_field_gap(LAW, u, z, Q8)


def test_radial_reduction():
    one = F.RadialProfile(2, (F.ProfilePiece(0, 1, lambda r: np.ones_like(r), lambda r: np.zeros_like(r)),))
    bz = F.bump_test_field([0.5, 0.1], 0.15, [1, 0])
    zero = R.radial_reduction_gap(lambda r: np.zeros_like(r), one, bz, 0.3, 0.7, Q8)
    assert zero.value == 0
    rep = R.radial_reduction_gap(lambda r: np.ones_like(r), one, bz, 0.3, 0.7, Q8)
    assert rep.value <= 1e-8 and abs(rep.metadata["volume"]) <= 1e-8
    cp = S.classification_profile(2, 1.5, 0.2)
    rep = R.radial_reduction_gap(lambda r: LAW(np.full_like(r, 1.5)), cp, bz, 0.3, 0.7, Q8)
    assert rep.value <= 1e-7


def test_weak_residual_agrees_with_reduction_for_radial_data():
    # phi(r) = r, h(det) = 2 r^2, radial test field: volume residual vs 1-D reduction
    prof = F.RadialProfile(2, (F.ProfilePiece(0, 1, lambda r: r, lambda r: np.ones_like(r)),), name="r")
    z = F.radial_test_field(F.Bump1D(0.35, 0.65), prof)
    weak = R.weak_residual(LAW, F.radial_field(prof), z, Q8)
    red = R.radial_reduction_gap(lambda r: 2 * r * r, prof, z, 0.3, 0.7, Q8)
    assert abs(weak.value - red.metadata["reduced"]) <= red.value + weak.error_estimate + 1e-9
    assert abs(weak.value) > 1e-3


def test_change_of_variables():
    one = lambda y: np.ones(len(y))  # noqa: E731
    assert R.change_of_variables_gap(F.identity_field(2), one, quad=Q8).value <= 1e-12
    rep = R.change_of_variables_gap(F.linear_field(2 * np.eye(2)), one, quad=Q8)
    assert rep.value <= 1e-10 and np.isclose(rep.metadata["lhs"], 4 * math.pi)
    cf = S.classification_field(2, 1.5, 0.2)
    rep = R.change_of_variables_gap(cf, lambda y: np.sum(y * y, axis=1), F.AnnulusSupport(0.3, 0.9), Q8)
    assert rep.value <= 1e-7
    with pytest.raises(F.UnsupportedFieldError):
        R.change_of_variables_gap(F.linear_field(np.diag([1.0, 2.0])), one, quad=Q8)


def test_constancy_reports():
    sampler = MonteCarloRule(2, 0.0, 1.0, 20000, seed=4)
    rep = R.hdet_constancy_report(LAW, S.classification_field(2, 1.5, 0.2), sampler)
    assert rep.single_cluster and abs(rep.cluster_centers[0] - 1.5) <= 1e-12
    assert rep.cluster_spreads[0] <= 1e-10
    assert sum(rep.histogram_counts) == rep.sample_count
    ident = R.hdet_constancy_report(L.exponential(), F.identity_field(2), sampler)
    assert ident.single_cluster and np.isclose(ident.cluster_centers[0], math.e)
    p, u = three_region(2)
    rep = R.hdet_constancy_report(LAW, u, MonteCarloRule(2, 0, 1, 100000, seed=1))
    assert np.allclose(rep.cluster_centers, [-2.0, 0.0, 1.0], atol=1e-9)
    expect = [p.a ** 2, p.b ** 2 - p.a ** 2, 1 - p.b ** 2]
    assert np.allclose(rep.cluster_masses, expect, rtol=0.05)
    assert rep.essential_min <= rep.essential_max


def test_linear_functionals_for_linear_map():
    A = np.array([[1.2, 0.3], [-0.1, 0.9]])
    law = L.exp_normalized()
    f = R.linear_boundary_functionals(law, F.linear_field(A), A, R.QuadSpec(level=5))
    dA = np.linalg.det(A)
    hA = law(np.array([dA]))[0]
    d = f.to_dict()
    assert np.isclose(d["lambda_normalized"], hA * dA, rtol=1e-12)
    assert np.allclose(d["B_normalized"], hA * np.array([[0.9, 0.1], [-0.3, 1.2]]), rtol=1e-12)
    assert f.gap <= 1e-10
    mu, stab = R.mu_estimate(law, F.linear_field(A), A, R.QuadSpec(level=5))
    assert abs(mu - 1) <= 1e-12 and stab <= 1e-12


@pytest.mark.parametrize("n", [2, 3])
def test_linear_functionals_three_region(n):
    p = S.Ex1Params(n=n, lambda1=0.0)
    u = F.radial_field(S.ex1_profile(p))
    A = S.ex1_boundary_matrix(p)
    f = R.linear_boundary_functionals(LAW, u, A, R.QuadSpec(level=8 if n == 2 else 6))
    assert f.gap <= 1e-5
    mu, stab = R.mu_estimate(LAW, u, A, R.QuadSpec(level=8 if n == 2 else 6))
    assert stab <= 1e-3
    # h = id closed form 1 / (1 - b^n), reported by the estimator
    assert abs(mu - 1 / (1 - p.b ** n)) <= 1e-8


@pytest.mark.parametrize("n", [2, 3])
def test_linear_functionals_gap_with_inner_determinant(n):
    # lambda1 != 0: gap = h(lambda1) lambda1 |S^{n-1}| a^n / n
    p = S.Ex1Params(n=n, lambda1=-2.0 if n == 2 else 2.0)
    u = F.radial_field(S.ex1_profile(p))
    f = R.linear_boundary_functionals(LAW, u, S.ex1_boundary_matrix(p), R.QuadSpec(level=8 if n == 2 else 6))
    expect = p.lambda1 * p.lambda1 * sphere_area(n) * p.a ** n / n
    assert abs(f.gap - expect) <= 1e-6


def test_linear_functionals_vanish_without_outer_determinant():
    p = S.Ex1Params(n=2, lambda1=-2.0, lambda2=0.0)
    u = F.radial_field(S.ex1_profile(p))
    f = R.linear_boundary_functionals(LAW, u, np.zeros((2, 2)), Q8)
    # the inner region still contributes lambda1 h(lambda1) |B_a|; outside a the integrands vanish
    assert np.isclose(f.lambda_val, 4 * math.pi * p.a ** 2, rtol=1e-10)
    with pytest.raises(ValueError):
        S.Ex1Params(n=2, lambda1=0.0, lambda2=0.0)


def test_boundary_precondition():
    with pytest.raises(R.PreconditionError):
        R.linear_boundary_functionals(LAW, F.identity_field(2), 2 * np.eye(2), Q8)
    with pytest.raises(ZeroDivisionError):
        R.mu_estimate(LAW, F.linear_field(np.zeros((2, 2))), np.zeros((2, 2)), Q8)


def test_mu_for_classification_fields():
    u = S.classification_field(2, 1.5, 0.0)
    mu, _ = R.mu_estimate(LAW, u, np.eye(2) * np.sqrt(1.5), Q8)
    assert abs(mu - 1) <= 1e-6
    # c != 0 leaves W^{1,n} at the origin: det average is lam while det A = lam + c
    u = S.classification_field(2, 1.5, 0.2)
    mu, _ = R.mu_estimate(LAW, u, np.eye(2) * np.sqrt(1.7), Q8)
    assert abs(mu - 1.5 * 1.5 / 1.7 ** 2) <= 1e-10


def test_energy_comparison(rng):
    zero = F.bump_test_field([0.1, 0.1], 0.2, [0.0, 0.0])
    assert R.energy_comparison(LAW, F.identity_field(2), [zero], Q8) == [0.0]
    pert = [F.random_bump(rng, 2, amplitude=0.4) for _ in range(10)]
    assert min(R.energy_comparison(LAW, F.identity_field(2), pert, R.QuadSpec(level=6))) >= -1e-8
    bump_law = L.ScalarLaw("bump", lambda t: np.exp(-t * t), primitive=lambda t: t)
    with pytest.raises(R.PreconditionError):
        R.energy_comparison(bump_law, F.identity_field(2), pert)
    _, u = three_region(2)
    with pytest.raises(R.PreconditionError):
        R.energy_comparison(LAW, u, pert, sampler=MonteCarloRule(2, 0, 1, 1000))


def test_tolerance_schedule():
    assert R.tolerance_schedule(3) == 4.0 ** -3
    assert R.tolerance_schedule(30) == 1e-10
