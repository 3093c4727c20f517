import numpy as np
import pytest

from detlab import fields as F
from detlab import solutions as S

CASES = [(2, 1.5, 0.2, 1), (2, 1.5, 0.2, -1), (3, 1.5, 0.2, 1), (3, -1.0, 0.3, 1), (2, 0.0, 1.0, 1)]


def _points(rng, n, m):
    g = rng.standard_normal((m, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True) * rng.uniform(0.05, 1.0, m)[:, None]


@pytest.mark.parametrize("n,lam,c,branch", CASES)
def test_classification_determinant_and_ode(rng, n, lam, c, branch):
    prof = S.classification_profile(n, lam, c, branch)
    x = _points(rng, n, 10 ** 4)
    d = F.radial_jacobian(prof, x)[1]
    assert np.max(np.abs(d - lam)) <= 1e-12
    r = np.linalg.norm(x, axis=1)
    phi, dphi, _ = prof.evaluate(r)
    assert np.max(np.abs(phi ** n + r * dphi * phi ** (n - 1) - lam)) <= 1e-12 * max(1, np.abs(phi).max() ** n)


def test_classification_special_cases(rng):
    ident = S.classification_profile(2, 1.0, 0.0)
    r = np.linspace(0.1, 1, 7)
    assert np.allclose(ident.phi(r), 1)
    circle = S.classification_profile(2, 0.0, 1.0)
    assert np.allclose(circle.phi(r), 1 / r)
    with pytest.raises(F.DomainError):
        S.classification_profile(2, -1.0, 0.5)


@pytest.mark.parametrize("n,l1", [(2, -2.0), (3, 2.0)])
def test_three_region_determinant(rng, n, l1):
    p = S.Ex1Params(n=n, lambda1=l1)
    prof = S.ex1_profile(p)
    x = _points(rng, n, 5000)
    r = np.linalg.norm(x, axis=1)
    x = x[(np.abs(r - p.a) > 1e-6) & (np.abs(r - p.b) > 1e-6)]
    r = np.linalg.norm(x, axis=1)
    d = F.radial_jacobian(prof, x)[1]
    expect = np.where(r < p.a, p.lambda1, np.where(r < p.b, 0.0, p.lambda2))
    assert np.max(np.abs(d - expect)) <= 1e-10
    phi1 = prof.phi(np.array([1.0]))[0]
    assert np.isclose(phi1, S.nth_root(p.lambda2 * (1 - p.b ** n), n))
    # continuity at the breakpoints
    for s in (p.a, p.b):
        assert prof.phi(np.array([s]))[0] == 0
        assert abs(prof.pieces[0 if s == p.a else 1].phi(np.array([s]))[0]) <= 1e-15


def test_three_region_parameter_validation():
    with pytest.raises(ValueError):
        S.Ex1Params(n=2, lambda1=2.0)
    with pytest.raises(ValueError):
        S.Ex1Params(n=2, lambda2=-1.0)
    with pytest.raises(ValueError):
        S.Ex1Params(a=0.7, b=0.6)
    with pytest.raises(ValueError):
        S.Ex1Params(lambda1=1.0, lambda2=1.0)
    assert S.Ex1Params(n=3, lambda1=2.0).lambda1 == 2.0


def test_three_region_singular_tags():
    p = S.Ex1Params(n=2, lambda1=-2.0)
    radii = {s.radius: s.exponent for s in S.ex1_profile(p).singular}
    assert radii == {0.0: -1.0, 0.4: -0.5, 0.6: -0.5}
    p0 = S.Ex1Params(n=2, lambda1=0.0)
    assert {s.radius for s in S.ex1_profile(p0).singular} == {0.6}


def test_packing_outside_and_single_ball(rng):
    spec = S.row_packing(3, 2)
    u = S.ex2_packing(spec)
    far = np.array([[0.0, 0.9], [0.0, -0.95]])
    assert np.all(u(far) == 0) and np.all(u.jacobian(far) == 0)
    single = S.ex2_packing(S.row_packing(1, 2))
    ref = F.radial_field(S.ex1_profile(S.Ex1Params(n=2, a=0.5, b=0.5, lambda1=-2.0, lambda2=0.0)))
    x = _points(rng, 2, 200) * 0.99
    assert np.allclose(single(x), ref(x)) and np.allclose(single.jacobian(x), ref.jacobian(x))


def test_packing_chain_rule(rng):
    spec = S.row_packing(3, 2)
    u = S.ex2_packing(spec)
    c, r = spec.balls[1]
    x = np.asarray(c) + _points(rng, 2, 50) * r * 0.95
    z = (x - np.asarray(c)) / r
    z = z[np.abs(np.linalg.norm(z, axis=1) - 0.5) > 1e-3]
    x = np.asarray(c) + z * r
    assert np.max(np.abs(u.jacobian(x) - F.fd_jacobian(u.value_fn, x, 1e-7))) <= 1e-5


def test_packing_rejects_overlap():
    with pytest.raises(ValueError):
        S.PackingSpec((((0.0, 0.0), 0.5), ((0.5, 0.0), 0.3)), ((2.0, 0.5), (1.5, 0.5)))
    with pytest.raises(ValueError):
        S.row_packing(17)


@pytest.mark.parametrize("n,l1", [(2, -2.0), (3, 2.0)])
def test_blowup_exponent(n, l1):
    u = F.radial_field(S.ex1_profile(S.Ex1Params(n=n, lambda1=l1)))
    thr = n / (n - 1)
    rep = S.sobolev_blowup_exponent(u, 0.6, [0.75 * thr, thr])
    target = 1 / n - 1
    assert abs(rep.exponent_fit - target) <= 0.15 * abs(target)
    assert rep.reliable
    assert rep.finite[0.75 * thr] and not rep.finite[thr]


def test_blowup_requires_tagged_radius():
    u = S.classification_field(2, 1.5, 0.2)
    with pytest.raises(S.PreconditionError):
        S.sobolev_blowup_exponent(u, 0.5, [1.0])
