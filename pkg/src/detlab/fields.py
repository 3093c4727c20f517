"""Vector fields with analytic Jacobians, radial profiles and test fields.

All evaluators are vectorised: points come in as ``(N, n)`` arrays, values go
out as ``(N, n)`` and Jacobians as ``(N, n, n)`` with ``J[k, i, j] = d u_i / d x_j``.
"""

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import algebra
from .quadrature import cap_nodes, sphere_area, sphere_rule


class SingularPointError(ValueError):
    pass


class DomainError(ValueError):
    pass


class UnsupportedFieldError(ValueError):
    pass


# supports and patches ----------------------------------------------------------

@dataclass(frozen=True)
class BallSupport:
    center: tuple
    radius: float

    def contains(self, x, closed=True):
        d = np.linalg.norm(np.asarray(x) - np.asarray(self.center), axis=-1)
        return d <= self.radius if closed else d < self.radius


@dataclass(frozen=True)
class AnnulusSupport:
    """Origin-centred shell ``r_inner <= |x| <= r_outer``."""

    r_inner: float
    r_outer: float

    def contains(self, x, closed=True):
        r = np.linalg.norm(np.asarray(x), axis=-1)
        if closed:
            return (r >= self.r_inner) & (r <= self.r_outer)
        return (r > self.r_inner) & (r < self.r_outer)


@dataclass(frozen=True)
class SingularRadius:
    """``|Du| ~ |r - radius|**exponent`` near the sphere ``|x - center| = radius``."""

    radius: float
    exponent: float


@dataclass(frozen=True)
class Patch:
    """Ball on which a field has radial structure about ``center``."""

    center: tuple
    radius: float
    singular: tuple = ()


# fields -----------------------------------------------------------------------------

@dataclass(frozen=True)
class VectorField:
    dim: int
    value_fn: Callable
    jacobian_fn: Callable
    kind: str = "custom"
    hessian_fn: Optional[Callable] = None
    triple_fn: Optional[Callable] = None
    patches: tuple = ()
    zero_outside: bool = False
    image_fn: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.value_fn(np.atleast_2d(np.asarray(x, dtype=float)))

    def jacobian(self, x):
        return self.jacobian_fn(np.atleast_2d(np.asarray(x, dtype=float)))

    def hessian(self, x):
        """``H[k, i, j, l] = d^2 u_i / dx_j dx_l``."""
        if self.hessian_fn is None:
            raise UnsupportedFieldError(f"{self.kind} field has no second derivatives")
        return self.hessian_fn(np.atleast_2d(np.asarray(x, dtype=float)))

    def triple(self, x):
        """(Du, det Du, cof Du) at the points."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.triple_fn is not None:
            return self.triple_fn(x)
        J = self.jacobian_fn(x)
        return J, algebra.det(J), algebra.cofactor(J)

    @property
    def singular(self):
        return tuple(s for p in self.patches for s in p.singular)

    def descriptor(self):
        return {"kind": self.kind, "dim": self.dim, **self.meta}


@dataclass(frozen=True)
class TestField(VectorField):
    support: object = None  # BallSupport, AnnulusSupport, or None (whole working domain)


@dataclass(frozen=True)
class ScalarField:
    value_fn: Callable
    grad_fn: Callable
    name: str = "scalar"

    def __call__(self, x):
        return self.value_fn(np.atleast_2d(np.asarray(x, dtype=float)))

    def grad(self, x):
        return self.grad_fn(np.atleast_2d(np.asarray(x, dtype=float)))


def coordinate_scalar(k):
    def grad(x):
        g = np.zeros_like(x)
        g[:, k] = 1.0
        return g
    return ScalarField(lambda x: x[:, k].copy(), grad, f"x{k + 1}")


def squared_norm_scalar():
    return ScalarField(lambda x: np.sum(x * x, axis=1), lambda x: 2 * x, "|x|^2")


def constant_scalar(c=1.0):
    return ScalarField(lambda x: np.full(len(x), float(c)), lambda x: np.zeros_like(x), f"const {c}")


def _rank_one(p, q, omega):
    """``p I + q omega (x) omega`` for arrays p, q of shape (N,)."""
    n = omega.shape[-1]
    return p[:, None, None] * np.eye(n) + q[:, None, None] * omega[:, :, None] * omega[:, None, :]


def linear_field(A):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    return VectorField(
        n,
        lambda x: x @ A.T,
        lambda x: np.broadcast_to(A, (len(x), n, n)).copy(),
        "linear",
        hessian_fn=lambda x: np.zeros((len(x), n, n, n)),
        image_fn=lambda region: _linear_image(A, region),
        meta={"A": A.tolist()},
    )


def identity_field(n):
    return linear_field(np.eye(n))


def _linear_image(A, region):
    s = np.linalg.svd(A, compute_uv=False)
    if not np.allclose(s, s[0]) or np.linalg.det(A) == 0:
        raise UnsupportedFieldError("image region only known for nonsingular conformal linear maps")
    if isinstance(region, AnnulusSupport):
        return AnnulusSupport(s[0] * region.r_inner, s[0] * region.r_outer)
    raise UnsupportedFieldError("image region only known for origin-centred annuli")


def _multi_indices(n, degree):
    return np.array([e for e in itertools.product(range(degree + 1), repeat=n) if sum(e) <= degree])


def _powers(x, exps):
    """``prod_k x_k**e_k`` for every exponent row; exponents may be negative (treated as 0 factor)."""
    safe = np.clip(exps, 0, None)
    return np.prod(x[:, None, :] ** safe[None, :, :], axis=2)


def polynomial_field(exps, coefs):
    """``u_i(x) = sum_t coefs[i, t] x**exps[t]``."""
    exps = np.asarray(exps, dtype=int)
    coefs = np.asarray(coefs, dtype=float)
    n = exps.shape[1]

    def value(x):
        return _powers(x, exps) @ coefs.T

    def jac(x):
        J = np.empty((len(x), coefs.shape[0], n))
        for j in range(n):
            e = exps.copy()
            e[:, j] -= 1
            J[:, :, j] = (_powers(x, e) * exps[:, j]) @ coefs.T
        return J

    def hess(x):
        H = np.empty((len(x), coefs.shape[0], n, n))
        for j in range(n):
            for l in range(n):
                e = exps.copy()
                e[:, j] -= 1
                fac = exps[:, j].astype(float).copy()
                fac *= e[:, l]
                e[:, l] -= 1
                H[:, :, j, l] = (_powers(x, e) * fac) @ coefs.T
        return H

    return VectorField(n, value, jac, "polynomial", hessian_fn=hess,
                       meta={"exps": exps.tolist(), "coefs": coefs.tolist()})


def random_polynomial_field(n, rng, degree=3, scale=0.3):
    """Identity plus random monomials of total degree <= ``degree``."""
    exps = _multi_indices(n, degree)
    coefs = scale * rng.uniform(-1, 1, size=(n, len(exps)))
    for i in range(n):
        unit = np.zeros(n, dtype=int)
        unit[i] = 1
        t = int(np.flatnonzero((exps == unit).all(axis=1))[0])
        coefs[i, t] += 1.0
    return polynomial_field(exps, coefs)


# radial profiles ----------------------------------------------------------------

@dataclass(frozen=True)
class ProfilePiece:
    lo: float
    hi: float
    phi: Callable
    dphi: Callable
    stretch: Optional[Callable] = None  # d(r phi)/dr, when a cancellation-free form is known


@dataclass(frozen=True)
class RadialProfile:
    """Piecewise profile phi on (0, 1] generating ``u(x) = phi(|x|) x``."""

    dim: int
    pieces: tuple
    singular: tuple = ()
    name: str = "profile"
    params: dict = field(default_factory=dict)
    continuity_tol: float = 1e-10

    def __post_init__(self):
        for left, right in zip(self.pieces[:-1], self.pieces[1:]):
            if abs(left.hi - right.lo) > 1e-15:
                raise ValueError("profile pieces must tile the interval")
            r = np.array([right.lo])
            jump = abs(float(left.phi(r)[0]) - float(right.phi(r)[0]))
            if not jump <= self.continuity_tol:
                raise ValueError(f"profile discontinuous at r={right.lo}: jump {jump:g}")

    @property
    def breakpoints(self):
        return tuple(p.lo for p in self.pieces[1:])

    def _split(self, r):
        return np.searchsorted(np.array(self.breakpoints), r, side="right")

    def evaluate(self, r):
        """phi, phi', and the radial stretch (r phi)' at radii r; breakpoints take the right piece."""
        r = np.asarray(r, dtype=float)
        idx = self._split(r)
        phi = np.empty_like(r)
        dphi = np.empty_like(r)
        st = np.empty_like(r)
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if not mask.any():
                continue
            rk = r[mask]
            with np.errstate(divide="ignore", invalid="ignore"):
                phi[mask] = piece.phi(rk)
                dphi[mask] = piece.dphi(rk)
                st[mask] = piece.stretch(rk) if piece.stretch else phi[mask] + rk * dphi[mask]
        return phi, dphi, st

    def phi(self, r):
        return self.evaluate(r)[0]


def _check_radii(profile, r):
    if np.any(r <= 0):
        raise SingularPointError("radial field evaluated at the origin")
    for s in profile.singular:
        if s.exponent != 0 and s.radius > 0 and np.any(np.abs(r - s.radius) <= 4 * np.finfo(float).eps * s.radius):
            raise SingularPointError(f"radial field evaluated on singular radius {s.radius}")


def radial_jacobian(profile, x):
    """Closed-form (Du, det Du, cof Du) for ``u = phi(|x|) x``.

    With sigma = (r phi)' the radial stretch: Du = phi I + (sigma - phi) w(x)w,
    det Du = phi**(n-1) sigma, cof Du = phi**(n-2) sigma I + (phi**(n-1) - phi**(n-2) sigma) w(x)w.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    r = np.linalg.norm(x, axis=1)
    _check_radii(profile, r)
    omega = x / r[:, None]
    phi, _, sigma = profile.evaluate(r)
    Du = _rank_one(phi, sigma - phi, omega)
    pn2 = phi ** (n - 2)
    detDu = phi ** (n - 1) * sigma
    cofDu = _rank_one(pn2 * sigma, phi ** (n - 1) - pn2 * sigma, omega)
    return Du, detDu, cofDu


def patch_radii(profile):
    """Declared singular radii plus grade-only tags at the origin and untagged breakpoints."""
    tagged = {s.radius for s in profile.singular}
    kinks = tuple(SingularRadius(bp, 0.0) for bp in (0.0, *profile.breakpoints) if bp not in tagged)
    return tuple(profile.singular) + kinks


def radial_field(profile, patch_radius=1.0):
    n = profile.dim

    def value(x):
        r = np.linalg.norm(x, axis=1)
        _check_radii(profile, r)
        return profile.phi(r)[:, None] * x

    def image(region):
        if not isinstance(region, AnnulusSupport):
            raise UnsupportedFieldError("radial image known only for origin-centred annuli")
        lo, hi = region.r_inner, region.r_outer
        grid = np.linspace(max(lo, 1e-12), hi, 257)
        rr = np.abs(grid * profile.phi(grid))
        if not (np.all(np.diff(rr) > 0) and np.all(profile.evaluate(grid)[2] * np.sign(profile.phi(grid)) > 0)):
            raise UnsupportedFieldError("radial map not monotone on the region")
        inner = 0.0 if lo == 0 else float(rr[0])
        return AnnulusSupport(inner, float(rr[-1]))

    return VectorField(
        n, value,
        lambda x: radial_jacobian(profile, x)[0],
        "radial",
        triple_fn=lambda x: radial_jacobian(profile, x),
        patches=(Patch(tuple(np.zeros(n)), patch_radius, patch_radii(profile)),),
        image_fn=image,
        meta={"profile": profile.name, **profile.params},
    )


# spherical means -----------------------------------------------------------------------

def sphere_mean(v, r, rule):
    """Average of the scalar field ``v`` over the sphere of radius ``r`` under a SphereRule."""
    if len(rule.weights) == 0:
        raise ValueError("degenerate sphere rule: no nodes")
    vals = np.asarray(v(r * rule.nodes), dtype=float)
    return float(np.sum(rule.weights * vals) / sphere_area(rule.dim))


def sphere_mean_supported(v, r, n, support, m=64):
    """Sphere average of a function vanishing outside the ball ``support``; nodes only on the cap inside it."""
    c = np.asarray(support.center, dtype=float)
    rho = support.radius
    d = float(np.linalg.norm(c))
    if d < 1e-14 or r + d <= rho:
        return sphere_mean(v, r, sphere_rule(n, m))
    if abs(r - d) >= rho:
        return 0.0
    kappa = (r * r + d * d - rho * rho) / (2 * r * d)
    dirs, w = cap_nodes(n, c, np.array([kappa]), m)
    vals = np.asarray(v(r * dirs[0]), dtype=float)
    return float(np.sum(w[0] * vals) / sphere_area(n))


def spherical_mean_derivative_gap(v, grad_v, r, rule, step=1e-4):
    """``|d/dr M(v)(r) - M(grad v . x)(r) / r|`` with a central difference of width ``step``."""
    left = sphere_mean(v, r - step, rule)
    right = sphere_mean(v, r + step, rule)
    fd = (right - left) / (2 * step)
    exact = sphere_mean(lambda x: np.sum(grad_v(x) * x, axis=1), r, rule) / r
    return abs(fd - exact)


# test fields ------------------------------------------------------------------------------

def bump_test_field(center, radius, direction, sharpness=3, domain_radius=1.0):
    """``zeta(x) = (1 - s)**k direction`` with ``s = |x - center|**2 / radius**2``, zero for s >= 1.

    ``sharpness`` is the exponent k (k >= 2 keeps zeta C^1).
    """
    c = np.asarray(center, dtype=float)
    e = np.asarray(direction, dtype=float)
    k = float(sharpness)
    if k < 2:
        raise ValueError("sharpness below 2 loses C^1 regularity")
    if np.linalg.norm(c) + radius >= domain_radius:
        raise DomainError("bump support must lie strictly inside the working domain")
    n = len(c)

    def value(x):
        s = np.sum((x - c) ** 2, axis=1) / radius ** 2
        eta = np.where(s < 1, np.clip(1 - s, 0, None) ** k, 0.0)
        return eta[:, None] * e[None, :]

    def jac(x):
        y = x - c
        s = np.sum(y * y, axis=1) / radius ** 2
        deta = np.where(s < 1, -k * np.clip(1 - s, 0, None) ** (k - 1), 0.0)
        grad = deta[:, None] * 2 * y / radius ** 2
        return e[None, :, None] * grad[:, None, :]

    def hess(x):
        y = x - c
        s = np.sum(y * y, axis=1) / radius ** 2
        inside = s < 1
        one = np.clip(1 - s, 0, None)
        d1 = np.where(inside, -k * one ** (k - 1), 0.0)
        d2 = np.where(inside, k * (k - 1) * one ** (k - 2), 0.0)
        a = 2 / radius ** 2
        H2 = d2[:, None, None] * a * a * y[:, :, None] * y[:, None, :] + d1[:, None, None] * a * np.eye(n)
        return e[None, :, None, None] * H2[:, None, :, :]

    return TestField(n, value, jac, "bump", hessian_fn=hess,
                     meta={"center": c.tolist(), "radius": radius, "direction": e.tolist(),
                           "sharpness": k},
                     support=BallSupport(tuple(c), radius))


def random_bump(rng, n, domain_radius=1.0, r_range=(0.1, 0.35), amplitude=1.0):
    radius = rng.uniform(*r_range)
    while True:
        c = rng.uniform(-1, 1, n) * (domain_radius - radius)
        if np.linalg.norm(c) + radius < domain_radius * 0.98:
            break
    e = rng.standard_normal(n)
    e = amplitude * e / np.linalg.norm(e)
    return bump_test_field(c, radius, e, domain_radius=domain_radius)


@dataclass(frozen=True)
class Bump1D:
    """``eta(r) = amp (1 - t**2)**3`` with t mapping [lo, hi] onto [-1, 1]; zero outside."""

    lo: float
    hi: float
    amp: float = 1.0

    def _t(self, r):
        return (2 * r - self.lo - self.hi) / (self.hi - self.lo)

    def __call__(self, r):
        t = self._t(np.asarray(r, dtype=float))
        return np.where(np.abs(t) < 1, self.amp * np.clip(1 - t * t, 0, None) ** 3, 0.0)

    def derivative(self, r):
        t = self._t(np.asarray(r, dtype=float))
        dt = 2 / (self.hi - self.lo)
        return np.where(np.abs(t) < 1, self.amp * 3 * np.clip(1 - t * t, 0, None) ** 2 * (-2 * t) * dt, 0.0)


def radial_test_field(eta, profile):
    """``zeta(x) = eta(r) / (r**n phi(r)**(n-1)) x``; the test field making r^(n-2) phi^(n-1) psi = eta."""
    n = profile.dim
    probe = np.linspace(eta.lo, eta.hi, 513)
    if np.any(profile.phi(probe) == 0):
        raise ZeroDivisionError("profile vanishes inside the support of eta")

    def q_and_dq(r):
        inside = (r > eta.lo) & (r < eta.hi)
        q = np.zeros_like(r)
        dq = np.zeros_like(r)
        if inside.any():
            ri = r[inside]
            phi, dphi, _ = profile.evaluate(ri)
            den = ri ** n * phi ** (n - 1)
            dden = n * ri ** (n - 1) * phi ** (n - 1) + (n - 1) * ri ** n * phi ** (n - 2) * dphi
            e0, e1 = eta(ri), eta.derivative(ri)
            q[inside] = e0 / den
            dq[inside] = e1 / den - e0 * dden / den ** 2
        return q, dq

    def value(x):
        r = np.linalg.norm(x, axis=1)
        return q_and_dq(r)[0][:, None] * x

    def jac(x):
        r = np.linalg.norm(x, axis=1)
        q, dq = q_and_dq(r)
        omega = x / np.where(r > 0, r, 1.0)[:, None]
        return _rank_one(q, r * dq, omega)

    return TestField(n, value, jac, "radial-test",
                     meta={"eta": [eta.lo, eta.hi, eta.amp], "profile": profile.name},
                     support=AnnulusSupport(eta.lo, eta.hi))


def pullback_test_field(outer, u):
    """``zeta(x) = outer(u(x))`` with ``D zeta = D outer(u(x)) Du(x)``."""
    return TestField(
        u.dim,
        lambda x: outer.value_fn(u.value_fn(x)),
        lambda x: outer.jacobian_fn(u.value_fn(x)) @ u.jacobian_fn(x),
        "pullback",
        meta={"outer": outer.descriptor(), "map": u.descriptor()},
        support=None,
    )


def polynomial_test_field(exps, coefs):
    """A smooth field used as a test function that need not vanish on the boundary."""
    p = polynomial_field(exps, coefs)
    return TestField(p.dim, p.value_fn, p.jacobian_fn, "polynomial-test", hessian_fn=p.hessian_fn,
                     meta=p.meta, support=None)


def fd_jacobian(fn, x, step=1e-5):
    """Central-difference Jacobian of a vectorised map."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    cols = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        cols.append((fn(x + e) - fn(x - e)) / (2 * step))
    return np.stack(cols, axis=-1)
