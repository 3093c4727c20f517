"""Failure of quasimonotonicity for sigma(A) = h(det A) cof A.

The radial perturbation ``phi(x) = rho(|x|) x`` collapses the inner ball
``|x| < b`` to the origin (rho = -1 there), stretches the thin shell
``b < r < a`` and relaxes linearly to zero at ``r = 1``.  The quantity

    Q(eps) = int_0^1 P(r) dr,   omega_n Q(eps) = int_B sigma(I + D phi) : D phi,

turns negative once the shell is thin enough.
"""

from dataclasses import dataclass

import numpy as np

from . import algebra
from .fields import Patch, SingularPointError, SingularRadius, TestField
from .quadrature import integrate_radial_1d, sphere_area
from .residuals import QuadSpec, integrate_trace, integration_rules
from .scalarlaws import check_growth


@dataclass(frozen=True)
class QMProfileParams:
    n: int = 2
    a: float = 0.5
    epsilon: float = 0.1

    def __post_init__(self):
        if not (0 < self.epsilon < self.a < 1):
            raise ValueError(f"need 0 < epsilon < a < 1, got epsilon={self.epsilon}, a={self.a}")
        if self.n < 2:
            raise ValueError("dimension must be at least 2")

    @property
    def b(self):
        return self.a - self.epsilon

    @property
    def pieces(self):
        return ((0.0, self.b), (self.b, self.a), (self.a, 1.0))


def rho_pieces(p):
    """Per-piece (rho, rho') as functions of r."""
    n, a, eps = p.n, p.a, p.epsilon
    mid = (n - 1) / (n * eps)
    outer = 1.0 / (n * (1 - a))
    return (
        (lambda r: -np.ones_like(r), lambda r: np.zeros_like(r)),
        (lambda r: mid * (r - a) - 1.0 / n, lambda r: np.full_like(r, mid)),
        (lambda r: outer * (r - 1), lambda r: np.full_like(r, outer)),
    )


def rho_profile(p, r):
    """(rho, rho') at radii r in [0, 1]; breakpoints take the right-hand piece."""
    r = np.asarray(r, dtype=float)
    idx = np.searchsorted(np.array([p.b, p.a]), r, side="right")
    rho = np.empty_like(r)
    drho = np.empty_like(r)
    for k, (f, df) in enumerate(rho_pieces(p)):
        m = idx == k
        rho[m] = f(r[m])
        drho[m] = df(r[m])
    return rho, drho


def _p_of(law, n, rho, drho, r):
    one = 1 + rho
    arg = one ** n + one ** (n - 1) * drho * r
    factor = n * rho * one ** (n - 1) + (1 + n * rho) * one ** (n - 2) * drho * r
    return law(arg) * factor * r ** (n - 1)


def qm_integrand(law, p, r):
    """P(r) = h((1+rho)^n + (1+rho)^(n-1) rho' r) (n rho (1+rho)^(n-1) + (1+n rho)(1+rho)^(n-2) rho' r) r^(n-1)."""
    r = np.asarray(r, dtype=float)
    if np.any((r == p.b) | (r == p.a)):
        raise SingularPointError("P(r) is evaluated off the breakpoints of rho")
    rho, drho = rho_profile(p, r)
    return _p_of(law, p.n, rho, drho, r)


def max_argument(p, points=2049):
    """Largest argument passed to h over the profile."""
    vals = []
    for (lo, hi), (f, df) in zip(p.pieces, rho_pieces(p)):
        r = np.linspace(lo, hi, points)
        one = 1 + f(r)
        vals.append(np.max(one ** p.n + one ** (p.n - 1) * df(r) * r))
    return float(max(vals))


@dataclass
class SweepRow:
    epsilon: float
    Q: float
    error_estimate: float
    max_argument: float


@dataclass
class SweepResult:
    rows: list
    first_negative: object
    a: float
    n: int
    level: int

    def to_dict(self):
        return {
            "a": self.a, "n": self.n, "level": self.level, "first_negative": self.first_negative,
            "rows": [{"epsilon": r.epsilon, "Q": r.Q, "error_estimate": r.error_estimate,
                      "max_argument": r.max_argument} for r in self.rows],
        }

    def csv_rows(self):
        return [(r.epsilon, r.Q, r.error_estimate) for r in self.rows]


def q_value(law, p, level=8):
    """``Q(eps)`` integrated piecewise; returns (value, error estimate)."""
    total, err = 0.0, 0.0
    for (lo, hi), (f, df) in zip(p.pieces, rho_pieces(p)):
        def g(r, f=f, df=df):
            return _p_of(law, p.n, f(r), df(r), r)

        v, e = integrate_radial_1d(g, lo, hi, level=level)
        total += float(v)
        err += float(e)
    return total, err


def qm_sweep(law, a, epsilons, level=8, n=2, growth=None):
    """Q(eps) for each eps; ``first_negative`` is the largest eps with Q < -error estimate.

    With ``growth`` (GrowthParams) given, the law's derivative bounds are checked
    on [0, max argument] first and a failure raises ValueError.
    """
    rows = []
    for eps in epsilons:
        p = QMProfileParams(n, a, eps)
        top = max_argument(p)
        if growth is not None:
            rep = check_growth(law, growth, np.linspace(0.0, top, 513))
            if not rep.ok:
                raise ValueError(f"growth bounds fail at {rep.failures[:3]} for epsilon={eps}")
        q, e = q_value(law, p, level)
        rows.append(SweepRow(float(eps), q, e, top))
    negatives = [r.epsilon for r in rows if r.Q < -r.error_estimate]
    return SweepResult(rows, max(negatives) if negatives else None, a, n, level)


def rho_test_field(p):
    """``phi(x) = rho(|x|) x``; vanishes on the unit sphere, kinks declared at b and a."""
    n = p.n

    def value(x):
        r = np.linalg.norm(x, axis=1)
        return rho_profile(p, r)[0][:, None] * x

    def jac(x):
        r = np.linalg.norm(x, axis=1)
        rho, drho = rho_profile(p, r)
        omega = x / np.where(r > 0, r, 1.0)[:, None]
        return rho[:, None, None] * np.eye(n) + (drho * r)[:, None, None] * omega[:, :, None] * omega[:, None, :]

    kinks = (SingularRadius(0.0, 0.0), SingularRadius(p.b, 0.0), SingularRadius(p.a, 0.0))
    return TestField(n, value, jac, "rho", patches=(Patch(tuple(np.zeros(n)), 1.0, kinks),),
                     meta={"a": p.a, "epsilon": p.epsilon}, support=None)


def quasimonotonicity_probe(law, A, test_fields, quad=QuadSpec()):
    """``int sigma(A + D phi) : D phi`` over the unit ball for each phi; returns (values, minimum)."""
    A = np.asarray(A, dtype=float)
    values = []
    for phi in test_fields:
        def F(x, phi=phi):
            Dphi = phi.jacobian(x)
            X = A + Dphi
            return law(algebra.det(X)) * algebra.inner(algebra.cofactor(X), Dphi)

        trace = integrate_trace(
            F, lambda lev, phi=phi: integration_rules(phi, phi.support, quad, lev, "smooth"),
            quad, A.shape[0])
        values.append(float(trace[-1]))
    return values, min(values) if values else None


def volume_vs_reduced(law, p, quad=QuadSpec()):
    """(volume probe at A = I, omega_n Q(eps)) for the rho perturbation."""
    vol = quasimonotonicity_probe(law, np.eye(p.n), [rho_test_field(p)], quad)[0][0]
    return vol, sphere_area(p.n) * q_value(law, p, quad.level)[0]
