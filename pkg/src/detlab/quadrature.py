"""Quadrature on intervals, spheres, balls and annuli.

Radial integrals use composite Gauss-Legendre panels, geometrically graded
toward declared singular radii.  The panel touching a singular radius uses a
Gauss-Jacobi rule carrying the declared algebraic weight ``|r - s|**gamma``, so
integrands of the form ``|r - s|**gamma * smooth`` converge at the smooth rate.

Angular integrals use the trapezoid rule on circles and a Gauss x trapezoid
product on the 2-sphere.  When the integrand is known to vanish outside a ball
(the support of a test field), the angular domain at each radius is cut down to
the arc/cap inside that ball so the support boundary never sits inside a cell.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi

GAUSS_ORDER = 8


class NonIntegrableError(ValueError):
    pass


class IntegrandError(FloatingPointError):
    """Integrand returned a non-finite value at a quadrature node."""

    def __init__(self, location, value=None):
        self.location = np.asarray(location)
        super().__init__(f"non-finite integrand value {value!r} at node {self.location.tolist()}")


@dataclass(frozen=True)
class Singularity:
    """Integrand behaves like ``|r - location|**exponent`` next to ``location``.

    ``exponent == 0`` only asks for mesh grading.
    """

    location: float
    exponent: float = 0.0


def sphere_area(n):
    """Surface measure of the unit sphere in R^n."""
    return 2 * math.pi ** (n / 2) / gamma_fn(n / 2)


def ball_volume(n, radius=1.0):
    return sphere_area(n) * radius ** n / n


# 1-D rules -------------------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre01(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return (x + 1) / 2, w / 2


@lru_cache(maxsize=None)
def gauss_jacobi01(m, gamma):
    """Nodes/weights on [0, 1] exact for ``t**gamma * p(t)``, deg p < 2m.

    Weights are divided by the weight function, so the rule is applied to the
    full integrand (singular factor included).
    """
    if gamma == 0:
        return gauss_legendre01(m)
    x, w = roots_jacobi(m, 0.0, gamma)
    t = (x + 1) / 2
    return t, w * 2.0 ** (-gamma - 1) * t ** (-gamma)


def _panel(lo, hi, gamma_lo=None, gamma_hi=None, order=GAUSS_ORDER):
    """One panel; a Jacobi weight is attached to at most one end."""
    if gamma_lo is not None:
        t, w = gauss_jacobi01(order, float(gamma_lo))
        return lo + (hi - lo) * t, (hi - lo) * w
    if gamma_hi is not None:
        t, w = gauss_jacobi01(order, float(gamma_hi))
        return hi - (hi - lo) * t, (hi - lo) * w
    t, w = gauss_legendre01(order)
    return lo + (hi - lo) * t, (hi - lo) * w


def _graded_edges(p, H, w_min):
    """Geometric edges p + H 2**-j, j = 0..D, innermost width <= w_min."""
    depth = max(0, math.ceil(math.log2(H / w_min))) if H > w_min else 0
    return [H * 2.0 ** -j for j in range(depth + 1)]


def radial_rule(a, b, singularities=(), level=8, order=GAUSS_ORDER, panels_per_unit=None):
    """Composite graded Gauss rule on (a, b).

    Uniform panels of width about ``2**-(level-3)`` cover each smooth piece;
    next to a singular location the panel is split geometrically (ratio 1/2)
    down to width ``2**-(level+6)`` and the innermost panel gets the Jacobi
    weight of the declared exponent.  No node lands on a singular location.
    """
    if not b > a:
        raise ValueError(f"empty interval ({a}, {b})")
    for s in singularities:
        if s.exponent <= -1:
            raise NonIntegrableError(f"exponent {s.exponent} at r={s.location} is not integrable")
    if panels_per_unit is None:
        panels_per_unit = 2.0 ** (level - 3)
    w_min = 2.0 ** -(level + 6)
    scale = max(1.0, abs(a), abs(b))
    tol = 1e-14 * scale

    graded = {}
    for s in singularities:
        if a - tol <= s.location <= b + tol:
            loc = min(max(s.location, a), b)
            graded[loc] = min(graded.get(loc, 0.0), s.exponent) if loc in graded else s.exponent
    cuts = sorted({a, b, *[p for p in graded if a + tol < p < b - tol]})

    def exponent_at(p):
        for q, g in graded.items():
            if abs(q - p) <= tol:
                return g
        return None

    nodes, weights = [], []
    for p, q in zip(cuts[:-1], cuts[1:]):
        g_lo, g_hi = exponent_at(p), exponent_at(q)
        L = q - p
        N = max(1, math.ceil(L * panels_per_unit - 1e-9))
        if g_lo is not None and g_hi is not None:
            N = max(N, 2)
        edges = np.linspace(p, q, N + 1)
        for k in range(N):
            lo, hi = edges[k], edges[k + 1]
            if k == 0 and g_lo is not None:
                offs = _graded_edges(p, hi - lo, w_min)
                for o_out, o_in in zip(offs[:-1], offs[1:]):
                    x, w = _panel(p + o_in, p + o_out, order=order)
                    nodes.append(x)
                    weights.append(w)
                x, w = _panel(p, p + offs[-1], gamma_lo=g_lo, order=order)
                nodes.append(x)
                weights.append(w)
            elif k == N - 1 and g_hi is not None:
                offs = _graded_edges(q, hi - lo, w_min)
                for o_out, o_in in zip(offs[:-1], offs[1:]):
                    x, w = _panel(q - o_out, q - o_in, order=order)
                    nodes.append(x)
                    weights.append(w)
                x, w = _panel(q - offs[-1], q, gamma_hi=g_hi, order=order)
                nodes.append(x)
                weights.append(w)
            else:
                x, w = _panel(lo, hi, order=order)
                nodes.append(x)
                weights.append(w)
    x = np.concatenate(nodes)
    w = np.concatenate(weights)
    order_idx = np.argsort(x, kind="stable")
    return x[order_idx], w[order_idx]


def _check_finite(vals, where):
    vals = np.asarray(vals)
    if not np.all(np.isfinite(vals)):
        flat = vals.reshape(vals.shape[0], -1) if vals.ndim > 1 else vals[:, None]
        bad = np.flatnonzero(~np.all(np.isfinite(flat), axis=1))[0]
        raise IntegrandError(where[bad], flat[bad].tolist())


def _weighted_sum(w, vals):
    vals = np.asarray(vals, dtype=float)
    return np.sum(w.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals, axis=0)


def integrate_radial_1d(g, a, b, singularities=(), level=8, order=GAUSS_ORDER):
    """``int_a^b g`` at ``level``; error estimate is the change from ``level - 1``."""
    vals = []
    for lev in (level - 1, level):
        x, w = radial_rule(a, b, singularities, lev, order)
        gx = g(x)
        _check_finite(gx, x)
        vals.append(_weighted_sum(w, gx))
    value = vals[1]
    return value, np.max(np.abs(vals[1] - vals[0]))


# sphere rules ------------------------------------------------------------------

@dataclass(frozen=True)
class SphereRule:
    dim: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ValueError("degenerate sphere rule: no nodes")


def sphere_rule(n, m=32):
    """Trapezoid on the circle (m nodes) or Gauss-in-z x trapezoid-in-azimuth on S^2."""
    if m < 1:
        raise ValueError("degenerate sphere rule: no nodes")
    if n == 2:
        th = 2 * np.pi * np.arange(m) / m
        return SphereRule(2, np.stack([np.cos(th), np.sin(th)], axis=1), np.full(m, 2 * np.pi / m))
    if n == 3:
        mz = max(2, m // 2)
        z, wz = np.polynomial.legendre.leggauss(mz)
        ph = 2 * np.pi * np.arange(m) / m
        Z, PH = np.meshgrid(z, ph, indexing="ij")
        s = np.sqrt(1 - Z ** 2)
        nodes = np.stack([s * np.cos(PH), s * np.sin(PH), Z], axis=-1).reshape(-1, 3)
        weights = (wz[:, None] * np.full(m, 2 * np.pi / m)[None, :]).ravel()
        return SphereRule(3, nodes, weights)
    raise NotImplementedError("product sphere rules exist for n = 2, 3 only")


def _frame(axis):
    """Orthonormal frame whose last vector is ``axis`` (n = 3)."""
    e = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(e[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(e, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(e, e1)
    return e1, e2, e


def cap_nodes(n, axis, cos_max, m):
    """Nodes on the unit-sphere caps ``{w : w.axis/|axis| > cos_max}``, one cap per entry of ``cos_max``.

    Returns directions ``(R, K, n)`` and weights ``(R, K)``.
    """
    cos_max = np.atleast_1d(np.asarray(cos_max, dtype=float))
    theta_max = np.arccos(np.clip(cos_max, -1.0, 1.0))
    panels = max(1, math.ceil(m / (8 if n == 2 else 16)))
    t, wt = gauss_legendre01(GAUSS_ORDER)
    u = ((np.arange(panels)[:, None] + t[None, :]) / panels).ravel()
    wu = np.tile(wt / panels, panels)
    if n == 2:
        base = math.atan2(axis[1], axis[0])
        # arc [base - tmax, base + tmax], parameter u in [0, 1]
        th = base + theta_max[:, None] * (2 * u[None, :] - 1)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        w = 2 * theta_max[:, None] * wu[None, :]
        return dirs, w
    if n == 3:
        e1, e2, e = _frame(np.asarray(axis, dtype=float))
        th = theta_max[:, None] * u[None, :]                      # (R, P)
        ph = 2 * np.pi * np.arange(m) / m                          # (M,)
        st, ct = np.sin(th), np.cos(th)
        dirs = (st[..., None, None] * (np.cos(ph)[:, None] * e1 + np.sin(ph)[:, None] * e2)
                + ct[..., None, None] * e)                          # (R, P, M, 3)
        w = (theta_max[:, None] * wu[None, :] * st)[..., None] * np.full(m, 2 * np.pi / m)
        R = len(theta_max)
        return dirs.reshape(R, -1, 3), w.reshape(R, -1)
    raise NotImplementedError("cap rules exist for n = 2, 3 only")


def default_sphere_nodes(level):
    return max(8, 4 * level)


# annulus / ball product rule ---------------------------------------------------

@dataclass(frozen=True)
class AnnulusRule:
    """Product rule on ``{r_inner < |x - center| < r_outer}``.

    ``support = (c, rho)`` declares that the integrand vanishes outside the ball
    ``B(c, rho)``; the rule then only places nodes inside it.
    """

    dim: int
    r_inner: float
    r_outer: float
    singularities: tuple = ()
    level: int = 8
    sphere_nodes: Optional[int] = None
    center: Optional[tuple] = None
    support: Optional[tuple] = None

    def __post_init__(self):
        if not (0 <= self.r_inner < self.r_outer):
            raise ValueError("need 0 <= r_inner < r_outer")

    def at_level(self, level):
        return replace(self, level=level)

    @property
    def m(self):
        return self.sphere_nodes or default_sphere_nodes(self.level)

    def _origin(self):
        return np.zeros(self.dim) if self.center is None else np.asarray(self.center, dtype=float)

    def points(self):
        """Nodes ``(N, dim)`` and weights ``(N,)``; empty arrays if the support misses the annulus."""
        n = self.dim
        origin = self._origin()
        r_lo, r_hi = self.r_inner, self.r_outer
        sings = list(self.singularities)
        offset = None
        rho = None
        if self.support is not None:
            c, rho = self.support
            offset = np.asarray(c, dtype=float) - origin
            d = float(np.linalg.norm(offset))
            r_lo, r_hi = max(r_lo, d - rho), min(r_hi, d + rho)
            for p in (d - rho, d + rho, rho - d):
                if r_lo < p < r_hi:
                    sings.append(Singularity(p, 0.0))
            if d <= 1e-14 * max(1.0, rho):
                offset = None  # concentric: full spheres up to rho
            for p in (r_lo, r_hi):
                if p in (d - rho, d + rho) and p > 0:
                    sings.append(Singularity(p, 0.0))
        if r_hi <= r_lo:
            return np.zeros((0, n)), np.zeros(0)
        r, wr = radial_rule(r_lo, r_hi, tuple(sings), self.level)
        radial_w = wr * r ** (n - 1)
        if offset is None:
            sr = sphere_rule(n, self.m)
            pts = origin + r[:, None, None] * sr.nodes[None, :, :]
            w = radial_w[:, None] * sr.weights[None, :]
            return pts.reshape(-1, n), w.ravel()
        d = float(np.linalg.norm(offset))
        kappa = (r ** 2 + d ** 2 - rho ** 2) / (2 * r * d)
        full = kappa <= -1
        out_p, out_w = [], []
        if full.any():
            sr = sphere_rule(n, self.m)
            out_p.append((r[full, None, None] * sr.nodes[None]).reshape(-1, n))
            out_w.append((radial_w[full, None] * sr.weights[None]).ravel())
        cap = (~full) & (kappa < 1)
        if cap.any():
            dirs, wc = cap_nodes(n, offset, kappa[cap], self.m)
            out_p.append((r[cap, None, None] * dirs).reshape(-1, n))
            out_w.append((radial_w[cap, None] * wc).ravel())
        if not out_p:
            return np.zeros((0, n)), np.zeros(0)
        return origin + np.concatenate(out_p), np.concatenate(out_w)

    def volume(self):
        return ball_volume(self.dim, self.r_outer) - ball_volume(self.dim, self.r_inner)


def _apply(F, rule):
    x, w = rule.points()
    if len(w) == 0:
        return 0.0
    vals = F(x)
    _check_finite(vals, x)
    return _weighted_sum(w, vals)


def integrate_annulus(F, rule):
    """Integrate ``F`` (vectorised over points) with ``rule``; returns (value, error estimate).

    The error estimate is the change from ``rule.level - 1``.  Dimensions
    n >= 4 fall back to Monte Carlo with a standard-error estimate.
    """
    if rule.dim >= 4:
        mc = MonteCarloRule(rule.dim, rule.r_inner, rule.r_outer, 2 ** (rule.level + 8), seed=0,
                            center=rule.center)
        return integrate_monte_carlo(F, mc)
    coarse = _apply(F, rule.at_level(rule.level - 1)) if rule.level > 1 else None
    fine = _apply(F, rule)
    err = np.max(np.abs(np.asarray(fine) - np.asarray(coarse))) if coarse is not None else np.inf
    return fine, float(err)


def integrate_rules(F, rules):
    """Sum of ``integrate_annulus`` over several rules (errors added)."""
    total, err = 0.0, 0.0
    for rule in rules:
        v, e = integrate_annulus(F, rule)
        total = total + v
        err += e
    return total, err


# Monte Carlo -------------------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloRule:
    dim: int
    r_inner: float
    r_outer: float
    sample_count: int
    seed: int = 0
    center: Optional[tuple] = None

    def samples(self):
        rng = np.random.default_rng(self.seed)
        g = rng.standard_normal((self.sample_count, self.dim))
        dirs = g / np.linalg.norm(g, axis=1, keepdims=True)
        u = rng.random(self.sample_count)
        n = self.dim
        r = (self.r_inner ** n + u * (self.r_outer ** n - self.r_inner ** n)) ** (1.0 / n)
        origin = np.zeros(n) if self.center is None else np.asarray(self.center, dtype=float)
        return origin + r[:, None] * dirs

    def volume(self):
        return ball_volume(self.dim, self.r_outer) - ball_volume(self.dim, self.r_inner)


def integrate_monte_carlo(F, rule):
    """Uniform-sampling estimate scaled by the region volume; returns (value, standard error)."""
    x = rule.samples()
    vals = np.asarray(F(x), dtype=float)
    _check_finite(vals, x)
    vol = rule.volume()
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(len(x)) if len(x) > 1 else np.inf
    return vol * mean, float(np.max(vol * np.asarray(se)))
