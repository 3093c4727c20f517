"""Planar differential relations ``Dv = h(det Du) Du`` and ``Dv = h(det Du) J Du``.

The two forms are exchanged by ``v -> J v``.  The module measures how far a
concrete pair is from the relation, evaluates averaged wedge products of the
Jacobian rows, and builds the plateau pair whose determinant vanishes on an
inner disk.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import algebra
from .fields import ProfilePiece, RadialProfile, SingularRadius, VectorField, radial_field
from .quadrature import ball_volume
from .residuals import QuadSpec, integrate_trace, integration_rules
from .scalarlaws import Monotone

J = algebra.J2


@dataclass(frozen=True)
class PairField:
    u: VectorField
    v: VectorField
    declared_mu: Optional[float] = None

    def __post_init__(self):
        if self.u.dim != 2 or self.v.dim != 2:
            raise ValueError("pair fields are planar")


def entry_sum_norm(M):
    return np.sum(np.abs(M), axis=(-2, -1))


def linear_pair(A, B):
    from .fields import linear_field
    return PairField(linear_field(A), linear_field(B))


def k_membership_distance(law, upper, lower, variant="scriptK"):
    """Distance of ``[upper; lower]`` to K (``lower = h(det upper) J upper``) or
    scriptK (``lower = h(det upper) upper``), in the entry-sum norm."""
    upper = np.asarray(upper, dtype=float)
    lower = np.asarray(lower, dtype=float)
    hd = law(algebra.det(upper))
    hd = np.asarray(hd)[..., None, None]
    if variant == "K":
        target = hd * (J @ upper)
    elif variant == "scriptK":
        target = hd * upper
    else:
        raise ValueError(f"variant must be 'K' or 'scriptK', got {variant!r}")
    return entry_sum_norm(lower - target)


def _pair_rules(pair, quad, kind):
    holder = pair.u if pair.u.patches else (pair.v if pair.v.patches else pair.u)
    return lambda lev: integration_rules(holder, None, quad, lev, kind)


def relation_deficiency(law, pair, quad=QuadSpec()):
    """``int |h(det Du) Du - Dv|`` over the unit disk."""
    def F(x):
        Du, d, _ = pair.u.triple(x)
        return entry_sum_norm(law(d)[:, None, None] * Du - pair.v.jacobian(x))

    return float(integrate_trace(F, _pair_rules(pair, quad, "du"), quad, 2)[-1])


def wedge_functionals(law, pair, quad=QuadSpec()):
    """Disk averages of the wedges of the rows alpha^i of Du and beta^i of Dv.

    Returns m11 = <a1 ^ b1>, m22 = <a2 ^ b2>, m12 = <a1 ^ b2>, m21 = <b1 ^ a2>
    and lambda_est = <h(det Du) det Du>.
    """
    def F(x):
        Du, d, _ = pair.u.triple(x)
        Dv = pair.v.jacobian(x)
        a1, a2, b1, b2 = Du[:, 0], Du[:, 1], Dv[:, 0], Dv[:, 1]
        return np.stack([
            algebra.wedge2(a1, b1), algebra.wedge2(a2, b2),
            algebra.wedge2(a1, b2), algebra.wedge2(b1, a2),
            law(d) * d,
        ], axis=-1)

    vals = np.asarray(integrate_trace(F, _pair_rules(pair, quad, "det"), quad, 2)[-1]) / ball_volume(2)
    keys = ("m11", "m22", "m12", "m21", "lambda_est")
    return {k: float(v) for k, v in zip(keys, vals)}


def plateau_profile(lam):
    """``phi = 0`` for r <= r0 and ``sqrt(lam - (lam - 1) / r**2)`` beyond, r0 = sqrt((lam - 1) / lam)."""
    if not lam > 1:
        raise ValueError("need lambda > 1")
    r0 = float(np.sqrt((lam - 1) / lam))

    def radicand(r):
        # lam r^2 - (lam - 1) in factored form, exact zero at r0
        return lam * (r - r0) * (r + r0)

    def phi(r):
        return np.sqrt(radicand(r)) / r

    def stretch(r):
        return lam * r / np.sqrt(radicand(r))

    def dphi(r):
        return (stretch(r) - phi(r)) / r

    zero = lambda r: np.zeros_like(r)  # noqa: E731
    pieces = (ProfilePiece(0.0, r0, zero, zero, zero), ProfilePiece(r0, 1.0, phi, dphi, stretch))
    return RadialProfile(2, pieces, (SingularRadius(r0, -0.5),), name="plateau", params={"lam": lam})


def plateau_pair(law, lam):
    """``u = phi(|x|) x`` with the plateau profile and ``v = h(lam) u``."""
    if law.monotone != Monotone.STRICT:
        raise ValueError("the pair needs a strictly increasing law")
    u = radial_field(plateau_profile(lam))
    mu = float(law(np.array([lam]))[0])

    def triple(x):
        Du, d, cof = u.triple(x)
        return mu * Du, mu * mu * d, mu * cof

    v = VectorField(2, lambda x: mu * u.value_fn(x), lambda x: mu * u.jacobian_fn(x), "radial-scaled",
                    triple_fn=triple, patches=u.patches, meta={"scale": mu, **u.meta})
    return PairField(u, v, mu)


def dirichlet_residual(pair, mu, samples=256):
    """Max deviation of u from x and of v from mu x on the unit circle."""
    th = 2 * np.pi * np.arange(samples) / samples
    x = np.stack([np.cos(th), np.sin(th)], axis=1)
    return {
        "u_boundary_gap": float(np.max(np.abs(pair.u(x) - x))),
        "v_boundary_gap": float(np.max(np.abs(pair.v(x) - mu * x))),
    }


def det_positivity_report(pair, sampler, eps_grid=(0.01, 0.1, 0.5)):
    """Sampled essential infimum of det Du and the fraction of samples below each threshold."""
    d = pair.u.triple(sampler.samples())[1]
    return {
        "ess_inf_det": float(np.min(d)),
        "fraction_below": {str(e): float(np.mean(d < e)) for e in eps_grid},
        "sample_count": int(len(d)),
    }
