"""Weak-form residuals, integral-identity gaps and constancy/energy diagnostics.

Every integral is evaluated on a ladder of quadrature levels; the report
carries the whole ladder (``trace``) and uses the last step as its error
estimate.
"""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import algebra
from .fields import AnnulusSupport, BallSupport, UnsupportedFieldError
from .quadrature import (
    AnnulusRule,
    MonteCarloRule,
    Singularity,
    _apply,
    ball_volume,
    integrate_monte_carlo,
    sphere_area,
    sphere_rule,
)
from .fields import sphere_mean, sphere_mean_supported
from .scalarlaws import Monotone, big_h


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature settings shared by all residuals.

    ``trace_levels`` consecutive levels ending at ``level`` are evaluated.
    With ``use_support=False`` test-field supports are ignored and the whole
    working domain is integrated (useful when comparing several test fields on
    one common rule).
    """

    level: int = 8
    sphere_nodes: Optional[int] = None
    trace_levels: int = 2
    domain_radius: float = 1.0
    use_support: bool = True
    mc_samples: int = 2 ** 18
    seed: int = 0

    @property
    def levels(self):
        first = max(1, self.level - self.trace_levels + 1)
        return list(range(first, self.level + 1))


def tolerance_schedule(level, scale=1.0):
    """``max(1e-10, scale * 4**-level)``."""
    return max(1e-10, scale * 4.0 ** -level)


def _to_json(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, dict):
        return {k: _to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_to_json(v) for v in x]
    return x


@dataclass
class ResidualReport:
    id: str
    value: object
    error_estimate: float
    level: int
    trace: list
    metadata: dict = field(default_factory=dict)

    def to_dict(self):
        return _to_json({
            "id": self.id, "value": self.value, "error_estimate": self.error_estimate,
            "level": self.level, "trace": self.trace, "metadata": self.metadata,
        })

    def contraction_ratios(self):
        """Successive ratios ``|t_k| / |t_{k+1}|`` of the trace."""
        t = np.abs(np.asarray(self.trace, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            return (t[:-1] / t[1:]).tolist()


def _report(id_, trace, levels, metadata):
    trace = [np.asarray(v, dtype=float) for v in trace]
    err = float(np.max(np.abs(trace[-1] - trace[-2]))) if len(trace) > 1 else float("inf")
    value = trace[-1].item() if trace[-1].ndim == 0 else trace[-1]
    tr = [t.item() if t.ndim == 0 else t for t in trace]
    return ResidualReport(id_, value, err, levels[-1], tr, metadata)


# rule construction -----------------------------------------------------------------------

def integrand_exponent(kind, tag, n):
    """Exponent of the integrand near a singular sphere where ``|Du| ~ d**tag.exponent``.

    ``kind`` names the worst factor in the integrand: ``cof`` (cofactor
    entries), ``det`` (determinant, bounded for the families here), ``du``
    (Jacobian entries) or ``smooth`` (grading only).
    """
    g = tag.exponent
    if tag.radius == 0 or g == 0 or kind in ("smooth", "det"):
        return 0.0
    if kind == "cof":
        return (n - 1) * g + n - 2
    if kind == "du":
        return g
    raise ValueError(f"unknown integrand kind {kind!r}")


def _sings(patch, kind, n):
    return tuple(Singularity(s.radius, integrand_exponent(kind, s, n)) for s in patch.singular)


def _clear_of_singular(patch, c, rho):
    d = float(np.linalg.norm(np.asarray(c) - np.asarray(patch.center)))
    if d + rho >= patch.radius:
        return False
    for s in patch.singular:
        if s.radius == 0 and d <= rho:
            return False
        if s.radius > 0 and abs(d - s.radius) <= rho:
            return False
    return True


def integration_rules(u, support, quad, level, kind="cof"):
    """Product rules covering the part of the domain where the integrand can be nonzero."""
    n = u.dim
    m = quad.sphere_nodes
    patches = u.patches if u is not None else ()
    if not quad.use_support:
        support = None
    if isinstance(support, BallSupport):
        c, rho = tuple(support.center), support.radius
        if not patches or any(_clear_of_singular(p, c, rho) for p in patches):
            return [AnnulusRule(n, 0.0, rho, (), level, m, center=c)]
        rules, covered = [], False
        for p in patches:
            d = float(np.linalg.norm(np.asarray(c) - np.asarray(p.center)))
            if d >= p.radius + rho:
                continue
            covered |= d + rho <= p.radius * (1 + 1e-12)
            rules.append(AnnulusRule(n, 0.0, p.radius, _sings(p, kind, n), level, m,
                                     center=p.center, support=(c, rho)))
        if not covered and not u.zero_outside:
            raise ValueError("test-field support leaves the region where the field is described")
        return rules
    if isinstance(support, AnnulusSupport):
        if not patches:
            return [AnnulusRule(n, support.r_inner, support.r_outer, (), level, m)]
        rules = []
        for p in patches:
            if np.any(np.asarray(p.center) != 0):
                raise ValueError("annular supports need patches centred at the origin")
            hi = min(support.r_outer, p.radius)
            if support.r_outer > p.radius and not u.zero_outside:
                raise ValueError("test-field support leaves the region where the field is described")
            if support.r_inner < hi:
                rules.append(AnnulusRule(n, support.r_inner, hi, _sings(p, kind, n), level, m))
        return rules
    R = quad.domain_radius
    if not patches:
        return [AnnulusRule(n, 0.0, R, (), level, m)]
    if not u.zero_outside and not any(
        np.all(np.asarray(p.center) == 0) and p.radius >= R for p in patches
    ):
        raise ValueError("field patches do not cover the working domain")
    return [AnnulusRule(n, 0.0, p.radius, _sings(p, kind, n), level, m, center=p.center) for p in patches]


def integrate_trace(F, rules_at, quad, dim):
    """Values of ``sum over rules_at(level)`` for each level in ``quad.levels``."""
    if dim >= 4:
        vals = []
        for lev in quad.levels:
            total = 0.0
            for rule in rules_at(lev):
                mc = MonteCarloRule(dim, rule.r_inner, rule.r_outer, quad.mc_samples,
                                    seed=quad.seed + lev, center=rule.center)
                total = total + integrate_monte_carlo(F, mc)[0]
            vals.append(total)
        return vals
    out = []
    for lev in quad.levels:
        total = 0.0
        for rule in rules_at(lev):
            total = total + _apply(F, rule)
        out.append(total)
    return out


def _descr(obj):
    if obj is None:
        return None
    return obj.descriptor() if hasattr(obj, "descriptor") else str(obj)


# residuals ------------------------------------------------------------------------------

def weak_residual(law, u, zeta, quad=QuadSpec()):
    """``int h(det Du) cof Du : D zeta``."""
    def F(x):
        _, d, cof = u.triple(x)
        return law(d) * algebra.inner(cof, zeta.jacobian(x))

    trace = integrate_trace(F, lambda lev: integration_rules(u, zeta.support, quad, lev, "cof"), quad, u.dim)
    return _report("weak_residual", trace, quad.levels,
                   {"law": _descr(law), "field": _descr(u), "test": _descr(zeta)})


def null_lagrangian_residual(u, zeta, quad=QuadSpec()):
    """``int cof Du : D zeta``; vanishes for every u."""
    def F(x):
        return algebra.inner(u.triple(x)[2], zeta.jacobian(x))

    trace = integrate_trace(F, lambda lev: integration_rules(u, zeta.support, quad, lev, "cof"), quad, u.dim)
    return _report("null_lagrangian", trace, quad.levels, {"field": _descr(u), "test": _descr(zeta)})


def parts_identity_gap(a, w, zeta, quad=QuadSpec()):
    """``int a cof Dw : D zeta + int (cof Dw) grad a . zeta`` (zero by integration by parts)."""
    def F(x):
        cof = w.triple(x)[2]
        lhs = a(x) * algebra.inner(cof, zeta.jacobian(x))
        rhs = np.einsum("nij,nj,ni->n", cof, a.grad(x), zeta(x))
        return np.stack([lhs, rhs], axis=-1)

    trace = integrate_trace(F, lambda lev: integration_rules(w, zeta.support, quad, lev, "cof"), quad, w.dim)
    sides = np.asarray(trace[-1])
    gaps = [abs(float(t[0] + t[1])) for t in trace]
    rep = _report("parts_identity_gap", gaps, quad.levels,
                  {"scalar": a.name, "field": _descr(w), "test": _descr(zeta),
                   "lhs": float(sides[0]), "rhs": float(-sides[1])})
    return rep


def composite_field_gap(law, w, phivec, quad=QuadSpec()):
    """``|int h(det Dw) cof Dw : D((Dw) phi) - int H(det Dw) div phi|``."""
    if w.hessian_fn is None:
        raise UnsupportedFieldError(f"{w.kind} field has no second derivatives")

    def F(x):
        Dw, d, cof = w.triple(x)
        Hw = w.hessian(x)
        P = phivec(x)
        DP = phivec.jacobian(x)
        D_comp = np.einsum("nikj,nk->nij", Hw, P) + Dw @ DP
        lhs = law(d) * algebra.inner(cof, D_comp)
        rhs = big_h(law, d) * np.trace(DP, axis1=1, axis2=2)
        return np.stack([lhs, rhs], axis=-1)

    trace = integrate_trace(F, lambda lev: integration_rules(w, phivec.support, quad, lev, "du"), quad, w.dim)
    gaps = [abs(float(t[0] - t[1])) for t in trace]
    last = np.asarray(trace[-1])
    return _report("composite_field_gap", gaps, quad.levels,
                   {"law": _descr(law), "field": _descr(w), "test": _descr(phivec),
                    "lhs": float(last[0]), "rhs": float(last[1])})


def _psi_function(v, n, m):
    """``psi(r) = M(v . x)(r)`` using cap nodes when v has a ball support."""
    def vx(x):
        return np.sum(v(x) * x, axis=1)

    if isinstance(v.support, BallSupport) and np.linalg.norm(v.support.center) > 1e-14:
        return lambda r: sphere_mean_supported(vx, r, n, v.support, m)
    rule = sphere_rule(n, m)
    return lambda r: sphere_mean(vx, r, rule)


def radial_reduction_gap(q, profile, v, a, b, quad=QuadSpec(), fd_step=2.5e-4):
    """Volume integral of ``q(|x|) cof Du : Dv`` over ``a < |x| < b`` against its 1-D reduction.

    The reduction is ``omega_n int_a^b q (r**(n-2) phi**(n-1) psi)' dr`` with
    ``psi = M(v . x)``; the derivative is a fourth-order central difference of
    step ``fd_step`` around each radial node.
    """
    from .fields import radial_field
    from .quadrature import default_sphere_nodes, radial_rule

    n = profile.dim
    u = radial_field(profile)
    sings = tuple(Singularity(s.radius, integrand_exponent("cof", s, n)) for s in u.patches[0].singular)

    def F(x):
        r = np.linalg.norm(x, axis=1)
        return q(r) * algebra.inner(u.triple(x)[2], v.jacobian(x))

    region = AnnulusSupport(a, b)
    support = v.support if quad.use_support else None
    lo, hi = a, b
    transitions = []
    if isinstance(support, AnnulusSupport):
        lo, hi = max(a, support.r_inner), min(b, support.r_outer)
    elif isinstance(support, BallSupport):
        d, rho = float(np.linalg.norm(support.center)), support.radius
        transitions = [t for t in (d - rho, d + rho, rho - d) if a < t < b]
    if not hi > lo:
        return _report("radial_reduction_gap", [0.0] * len(quad.levels), quad.levels,
                       {"profile": profile.name, "a": a, "b": b, "test": _descr(v)})
    sings = tuple(s for s in sings if lo <= s.location <= hi)
    barriers = sorted({lo, hi, *transitions})
    graded = sings + tuple(Singularity(t, 0.0) for t in transitions)

    def vol_rules(lev):
        if isinstance(support, BallSupport):
            return [AnnulusRule(n, lo, hi, sings, lev, quad.sphere_nodes,
                                support=(tuple(support.center), support.radius))]
        return [AnnulusRule(n, lo, hi, sings, lev, quad.sphere_nodes)]

    volume_trace = integrate_trace(F, vol_rules, quad, n)

    omega = sphere_area(n)

    def reduced(lev):
        m = quad.sphere_nodes or default_sphere_nodes(lev)
        psi = _psi_function(v, n, m)

        def G(r):
            phi = profile.phi(np.atleast_1d(r))
            return r ** (n - 2) * phi ** (n - 1) * psi(float(r))

        r_nodes, w = radial_rule(lo, hi, graded, lev)
        vals = np.empty_like(r_nodes)
        for k, r in enumerate(r_nodes):
            # keep the five-point stencil on one side of every kink of psi
            gap = min(abs(r - t) for t in barriers)
            hk = min(fd_step, 0.45 * gap)
            d1 = (-G(r + 2 * hk) + 8 * G(r + hk) - 8 * G(r - hk) + G(r - 2 * hk)) / (12 * hk)
            vals[k] = float(np.squeeze(d1))
        return omega * float(np.sum(w * q(r_nodes) * vals))

    reduced_trace = [reduced(lev) for lev in quad.levels]
    gaps = [abs(float(x) - y) for x, y in zip(volume_trace, reduced_trace)]
    return _report("radial_reduction_gap", gaps, quad.levels,
                   {"profile": profile.name, "a": a, "b": b, "test": _descr(v),
                    "volume": float(volume_trace[-1]), "reduced": reduced_trace[-1],
                    "region": [region.r_inner, region.r_outer]})


def change_of_variables_gap(w, g, region=AnnulusSupport(0.0, 1.0), quad=QuadSpec()):
    """``|int_E g(w(x)) |det Dw| dx - int_{w(E)} g(y) dy|`` for an injective w with known image."""
    if w.image_fn is None:
        raise UnsupportedFieldError("image of the region is not known for this map")
    image = w.image_fn(region)
    n = w.dim

    def lhs_F(x):
        return g(w(x)) * np.abs(w.triple(x)[1])

    def lhs_rules(lev):
        if w.patches:
            p = w.patches[0]
            return [AnnulusRule(n, region.r_inner, region.r_outer, _sings(p, "det", n), lev, quad.sphere_nodes)]
        return [AnnulusRule(n, region.r_inner, region.r_outer, (), lev, quad.sphere_nodes)]

    lhs = integrate_trace(lhs_F, lhs_rules, quad, n)
    rhs = integrate_trace(g, lambda lev: [AnnulusRule(n, image.r_inner, image.r_outer, (), lev,
                                                      quad.sphere_nodes)], quad, n)
    gaps = [abs(float(x) - float(y)) for x, y in zip(lhs, rhs)]
    return _report("change_of_variables_gap", gaps, quad.levels,
                   {"field": _descr(w), "lhs": float(lhs[-1]), "rhs": float(rhs[-1]),
                    "image": [image.r_inner, image.r_outer]})


# diagnostics --------------------------------------------------------------------------

@dataclass
class ConstancyReport:
    essential_min: float
    essential_max: float
    histogram_edges: list
    histogram_counts: list
    cluster_centers: list
    cluster_masses: list
    cluster_spreads: list
    sample_count: int
    merge_radius: float = 1e-6
    note: str = ("constancy is checked on samples only; integrability of h(det Du) "
                 "is not assessed")

    @property
    def single_cluster(self):
        return len(self.cluster_centers) == 1

    def to_dict(self):
        return _to_json(self.__dict__)


def hdet_constancy_report(law, u, sampler, merge_radius=1e-6, bins=32):
    """Distribution of ``h(det Du)`` over Monte Carlo samples, with gap-based clustering."""
    x = sampler.samples()
    vals = np.sort(np.asarray(law(u.triple(x)[1]), dtype=float))
    splits = np.flatnonzero(np.diff(vals) > merge_radius) + 1
    groups = np.split(vals, splits)
    lo, hi = vals[0], vals[-1]
    if hi - lo < merge_radius:
        lo, hi = lo - merge_radius, hi + merge_radius
    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    return ConstancyReport(
        float(vals[0]), float(vals[-1]), edges.tolist(), counts.tolist(),
        [float(g.mean()) for g in groups], [len(g) / len(vals) for g in groups],
        [float(g[-1] - g[0]) for g in groups], len(vals), merge_radius,
    )


@dataclass
class LinearFunctionals:
    lambda_val: float
    B: np.ndarray
    gap: float
    volume: float
    level: int
    boundary_gap: float

    def to_dict(self):
        return _to_json({
            "lambda": self.lambda_val, "B": self.B, "gap": self.gap,
            "lambda_normalized": self.lambda_val / self.volume, "B_normalized": self.B / self.volume,
            "level": self.level, "boundary_gap": self.boundary_gap,
        })


def boundary_trace_gap(u, A, samples=100, seed=0):
    rng = np.random.default_rng(seed)
    n = u.dim
    g = rng.standard_normal((samples, n))
    x = g / np.linalg.norm(g, axis=1, keepdims=True)
    return float(np.max(np.abs(u(x) - x @ np.asarray(A).T)))


def linear_boundary_functionals(law, u, A, quad=QuadSpec(), boundary_tol=1e-8):
    """``lambda = int h(det Du) det Du`` and ``B = int h(det Du) cof Du`` over the unit ball.

    Returns the functionals at ``quad.level`` with ``gap = ||B A^T - lambda I||_inf``.
    """
    A = np.asarray(A, dtype=float)
    bgap = boundary_trace_gap(u, A)
    if not bgap <= boundary_tol:
        raise PreconditionError(f"boundary trace differs from A x by {bgap:g}")
    n = u.dim

    def lam_F(x):
        d = u.triple(x)[1]
        return law(d) * d

    def B_F(x):
        _, d, cof = u.triple(x)
        return (law(d)[:, None, None] * cof).reshape(len(x), -1)

    q1 = QuadSpec(quad.level, quad.sphere_nodes, 1, quad.domain_radius, False, quad.mc_samples, quad.seed)
    # each functional gets the Jacobi weight of its own integrand
    lam = float(integrate_trace(lam_F, lambda lev: integration_rules(u, None, q1, lev, "det"), q1, n)[-1])
    B = np.asarray(integrate_trace(B_F, lambda lev: integration_rules(u, None, q1, lev, "cof"), q1, n)[-1])
    B = B.reshape(n, n)
    gap = float(algebra.inf_norm(B @ A.T - lam * np.eye(n)))
    return LinearFunctionals(lam, B, gap, ball_volume(n, quad.domain_radius), quad.level, bgap)


def mu_estimate(law, u, A, quad=QuadSpec()):
    """``mu = (lambda / |Omega|) / (h(det A) det A)`` and its change from the previous level."""
    A = np.asarray(A, dtype=float)
    dA = float(algebra.det(A))
    if dA == 0 or float(law(np.array([dA]))[0]) == 0:
        raise ZeroDivisionError("h(det A) det A vanishes")
    denom = float(law(np.array([dA]))[0]) * dA
    mus = []
    for lev in (quad.level - 1, quad.level):
        q = QuadSpec(lev, quad.sphere_nodes, 1, quad.domain_radius, quad.use_support, quad.mc_samples, quad.seed)
        f = linear_boundary_functionals(law, u, A, q)
        mus.append(f.lambda_val / f.volume / denom)
    return mus[-1], abs(mus[-1] - mus[-2])


def energy_comparison(law, u, perturbations, quad=QuadSpec(), sampler=None):
    """``int f(det D(u + zeta)) - int f(det Du)`` over each perturbation's support."""
    if law.monotone not in (Monotone.STRICT, Monotone.NONDECREASING):
        raise PreconditionError(f"law {law.name} is not declared nondecreasing")
    if sampler is not None:
        rep = hdet_constancy_report(law, u, sampler)
        if not rep.single_cluster:
            raise PreconditionError("h(det Du) is not constant on the sampled domain")

    deltas = []
    for zeta in perturbations:
        def F(x, zeta=zeta):
            Du, d, _ = u.triple(x)
            return law.f(algebra.det(Du + zeta.jacobian(x))) - law.f(d)

        trace = integrate_trace(F, lambda lev: integration_rules(u, zeta.support, quad, lev, "det"), quad, u.dim)
        deltas.append(float(trace[-1]))
    return deltas


def config_digest(obj):
    return hashlib.sha256(json.dumps(_to_json(obj), sort_keys=True).encode()).hexdigest()
