"""Explicit solution families: radial classification profiles, piecewise
profiles with a flat middle region, ball packings of them, and Sobolev
blow-up diagnostics near singular spheres."""

from dataclasses import dataclass, field

import numpy as np

from .fields import (
    patch_radii,
    DomainError,
    Patch,
    ProfilePiece,
    RadialProfile,
    SingularRadius,
    VectorField,
    radial_field,
    radial_jacobian,
)
from .quadrature import integrate_radial_1d, sphere_area


class PreconditionError(ValueError):
    pass


def nth_root(t, n, branch=1):
    """Real n-th root: sign-preserving for odd n, ``branch * t**(1/n)`` for even n."""
    t = np.asarray(t, dtype=float)
    if n % 2:
        return np.sign(t) * np.abs(t) ** (1.0 / n)
    return branch * t ** (1.0 / n)


def _root_derivative_factor(t, n, branch=1):
    """``d/dt root(t) * n``, i.e. ``|t|**(1/n - 1)`` times the branch sign."""
    with np.errstate(divide="ignore"):
        return (1 if n % 2 else branch) * np.abs(t) ** (1.0 / n - 1.0)


# classification family ------------------------------------------------------------

def classification_profile(n, lam, c, branch=1, samples=1024):
    """``phi(r) = (lam + c / r**n)**(1/n)``; the generated map has det Du = lam."""
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    r_probe = np.linspace(1.0 / samples, 1.0, samples)
    t_probe = lam + c / r_probe ** n
    if n % 2 == 0 and np.any(t_probe <= 0):
        raise DomainError("lam + c / r**n must stay positive on (0, 1] for even n")
    if n % 2 == 1 and np.any(t_probe == 0):
        raise DomainError("lam + c / r**n vanishes at a sampled radius")

    def t_of(r):
        return lam + c / r ** n

    def phi(r):
        return nth_root(t_of(r), n, branch)

    def stretch(r):
        return lam * _root_derivative_factor(t_of(r), n, branch)

    def dphi(r):
        return -c * r ** (-n - 1) * _root_derivative_factor(t_of(r), n, branch)

    singular = []
    if c != 0:
        singular.append(SingularRadius(0.0, -1.0))
    if n % 2 == 1 and lam != 0 and -c / lam > 0:
        r_zero = (-c / lam) ** (1.0 / n)
        if 0 < r_zero < 1:
            singular.append(SingularRadius(r_zero, 1.0 / n - 1.0))
    return RadialProfile(
        n, (ProfilePiece(0.0, 1.0, phi, dphi, stretch),), tuple(singular),
        name="classification", params={"lam": lam, "c": c, "branch": branch},
    )


def classification_field(n, lam, c, branch=1):
    return radial_field(classification_profile(n, lam, c, branch))


# three-region profile -----------------------------------------------------------------

@dataclass(frozen=True)
class Ex1Params:
    """Radii ``0 < a <= b < 1`` and the determinant values inside ``a`` and outside ``b``."""

    n: int = 2
    a: float = 0.4
    b: float = 0.6
    lambda1: float = -2.0
    lambda2: float = 1.0
    branch: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("dimension must be at least 2")
        if not (0 < self.a <= self.b < 1):
            raise ValueError(f"need 0 < a <= b < 1, got a={self.a}, b={self.b}")
        if self.lambda1 == self.lambda2:
            raise ValueError("lambda1 and lambda2 must differ")
        if self.n % 2 == 0:
            # lambda1 (r^n - a^n) >= 0 on (0, a] and lambda2 (r^n - b^n) >= 0 on (b, 1]
            if self.lambda1 > 0:
                raise ValueError("even n needs lambda1 <= 0 (radicand lambda1 (r^n - a^n) must be >= 0)")
            if self.lambda2 < 0:
                raise ValueError("even n needs lambda2 >= 0 (radicand lambda2 (r^n - b^n) must be >= 0)")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")


def _root_piece(lo, hi, n, lam, s, branch):
    """Piece with ``r phi = root(lam (r**n - s**n))``."""
    if lam == 0:
        return _zero_piece(lo, hi)

    def g(r):
        return lam * (r ** n - s ** n)

    def phi(r):
        return nth_root(g(r), n, branch) / r

    def stretch(r):
        return lam * r ** (n - 1) * _root_derivative_factor(g(r), n, branch)

    def dphi(r):
        return (stretch(r) - phi(r)) / r

    return ProfilePiece(lo, hi, phi, dphi, stretch)


def _zero_piece(lo, hi):
    zero = lambda r: np.zeros_like(r)  # noqa: E731
    return ProfilePiece(lo, hi, zero, zero, zero)


def ex1_profile(p):
    """Profile with det Du = lambda1 on r < a, 0 on a < r < b, lambda2 on r > b."""
    n = p.n
    pieces = [_root_piece(0.0, p.a, n, p.lambda1, p.a, p.branch)]
    if p.b > p.a:
        pieces.append(_zero_piece(p.a, p.b))
    pieces.append(_root_piece(p.b, 1.0, n, p.lambda2, p.b, p.branch))
    gamma = 1.0 / n - 1.0
    singular = []
    if p.lambda1 != 0:
        singular += [SingularRadius(0.0, -1.0), SingularRadius(p.a, gamma)]
    if p.lambda2 != 0:
        singular.append(SingularRadius(p.b, gamma))
    return RadialProfile(
        n, tuple(pieces), tuple(singular), name="three-region",
        params={"a": p.a, "b": p.b, "lambda1": p.lambda1, "lambda2": p.lambda2, "branch": p.branch},
    )


def ex1_boundary_matrix(p):
    """Matrix A with u = A x on the unit sphere."""
    return float(nth_root(p.lambda2 * (1 - p.b ** p.n), p.n, p.branch)) * np.eye(p.n)


# ball packing ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PackingSpec:
    """Disjoint balls ``(center, radius)`` inside the unit ball, each carrying ``(t, a)``."""

    balls: tuple
    per_ball: tuple
    margin: float = 1e-9

    def __post_init__(self):
        if len(self.balls) != len(self.per_ball):
            raise ValueError("one (t, a) pair per ball")
        if not self.balls:
            raise ValueError("at least one ball")
        centers = [np.asarray(c, dtype=float) for c, _ in self.balls]
        radii = [float(r) for _, r in self.balls]
        for c, r in zip(centers, radii):
            if r <= 0 or np.linalg.norm(c) + r > 1 + 1e-12:
                raise ValueError(f"ball ({c.tolist()}, {r}) not inside the unit ball")
        for i in range(len(centers)):
            for j in range(i):
                gap = np.linalg.norm(centers[i] - centers[j]) - radii[i] - radii[j]
                if gap <= self.margin:
                    raise ValueError(f"balls {j} and {i} overlap or touch")

    @property
    def dim(self):
        return len(self.balls[0][0])


def default_schedule(count, n):
    """``t_i = 1 + 1/i`` and ``a_i = 1/2``; the sign of t flips for even n so radicands stay nonnegative."""
    sign = -1.0 if n % 2 == 0 else 1.0
    return tuple((sign * (1 + 1.0 / i), 0.5) for i in range(1, count + 1))


def row_packing(count, n=2):
    """``count`` equal balls along the first axis, for desk-scale experiments (count <= 16)."""
    if not 1 <= count <= 16:
        raise ValueError("ball count must be in 1..16")
    if count == 1:
        balls = ((tuple(np.zeros(n)), 1.0),)
    else:
        pitch = 2.0 / count
        radius = 0.45 * pitch
        balls = []
        for i in range(count):
            c = np.zeros(n)
            c[0] = -1 + pitch * (i + 0.5)
            balls.append((tuple(c), radius))
        # shrink so every ball sits inside the unit ball
        scale = min(1.0, min(0.98 / (abs(c[0]) + radius) for c, radius in balls))
        balls = tuple((tuple(np.asarray(c) * scale), r * scale) for c, r in balls)
    return PackingSpec(tuple(balls), default_schedule(count, n))


def ball_profiles(spec):
    n = spec.dim
    return [ex1_profile(Ex1Params(n=n, a=a, b=a, lambda1=t, lambda2=0.0)) for t, a in spec.per_ball]


def ex2_packing(spec):
    """``u(x) = r_i u_i((x - c_i) / r_i)`` on ball i, zero elsewhere."""
    n = spec.dim
    profiles = ball_profiles(spec)
    centers = np.array([c for c, _ in spec.balls], dtype=float)
    radii = np.array([r for _, r in spec.balls], dtype=float)

    def locate(x):
        d = np.linalg.norm(x[:, None, :] - centers[None], axis=2) / radii[None]
        inside = d < 1
        idx = np.where(inside.any(axis=1), np.argmax(inside, axis=1), -1)
        return idx

    def value(x):
        out = np.zeros_like(x)
        idx = locate(x)
        for i, prof in enumerate(profiles):
            m = idx == i
            if m.any():
                z = (x[m] - centers[i]) / radii[i]
                out[m] = radii[i] * prof.phi(np.linalg.norm(z, axis=1))[:, None] * z
        return out

    def triple(x):
        N = len(x)
        Du = np.zeros((N, n, n))
        det = np.zeros(N)
        cof = np.zeros((N, n, n))
        idx = locate(x)
        for i, prof in enumerate(profiles):
            m = idx == i
            if m.any():
                Du[m], det[m], cof[m] = radial_jacobian(prof, (x[m] - centers[i]) / radii[i])
        return Du, det, cof

    patches = tuple(
        Patch(tuple(c), float(r), tuple(SingularRadius(s.radius * r, s.exponent) for s in patch_radii(prof)))
        for c, r, prof in zip(centers, radii, profiles)
    )
    return VectorField(
        n, value, lambda x: triple(x)[0], "packed", triple_fn=triple, patches=patches,
        zero_outside=True,
        meta={"balls": [[list(c), r] for c, r in spec.balls], "per_ball": [list(q) for q in spec.per_ball]},
    )


# Sobolev blow-up ------------------------------------------------------------------------

@dataclass
class BlowupReport:
    radius: float
    side: int
    distances: list
    norms: list
    exponent_fit: float
    reliable: bool
    p_grid: list
    shell_ratios: dict = field(default_factory=dict)
    finite: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "radius": self.radius, "side": self.side, "exponent_fit": self.exponent_fit,
            "reliable": self.reliable, "distances": self.distances, "norms": self.norms,
            "shell_ratios": {str(p): v for p, v in self.shell_ratios.items()},
            "finite": {str(p): v for p, v in self.finite.items()},
        }


def _radial_du_norm(field_, r):
    n = field_.dim
    x = np.zeros((len(r), n))
    x[:, 0] = r
    Du = field_.jacobian(x)
    return np.linalg.norm(Du, axis=(1, 2))


def sobolev_blowup_exponent(field_, singular_radius, p_grid, shells=range(4, 13), finite_ratio=0.95):
    """Fit ``|Du| ~ |r - s|**gamma`` on dyadic shells and classify ``int |Du|**p`` near ``s``.

    The shell integrals ``I_k`` over ``2**-(k+1) < |r - s| < 2**-k`` shrink
    geometrically when ``|Du|**p`` is integrable; a tail ratio
    ``I_{k+1} / I_k`` below ``finite_ratio`` is reported as finite.
    """
    tagged = [s for s in field_.singular if s.exponent != 0 and abs(s.radius - singular_radius) <= 1e-12]
    if not tagged or singular_radius <= 0:
        raise PreconditionError(f"radius {singular_radius} is not a tagged singular radius of the field")
    if field_.kind != "radial":
        raise PreconditionError("blow-up diagnostics need a radial field centred at the origin")
    s = singular_radius
    d = 2.0 ** -np.array(list(shells), dtype=float)

    probe = 2.0 ** -8
    sides = [side for side in (1, -1) if 0 < s + side * probe < 1]
    side = max(sides, key=lambda sd: float(_radial_du_norm(field_, np.array([s + sd * probe]))[0]))

    norms = _radial_du_norm(field_, s + side * d)
    valid = np.isfinite(norms) & (norms > 0)
    reliable = int(valid.sum()) >= 5
    if valid.sum() >= 2:
        slope = np.polyfit(np.log(d[valid]), np.log(norms[valid]), 1)[0]
    else:
        slope = float("nan")

    n = field_.dim
    omega = sphere_area(n)
    ratios, finite = {}, {}
    for p in p_grid:
        def g(r, p=p):
            return omega * _radial_du_norm(field_, r) ** p * r ** (n - 1)

        shell_vals = []
        for dk in d:
            lo, hi = sorted((s + side * dk / 2, s + side * dk))
            shell_vals.append(float(integrate_radial_1d(g, lo, hi, level=5)[0]))
        shell_vals = np.array(shell_vals)
        tail = shell_vals[-5:]
        ratio = float(np.mean(tail[1:] / tail[:-1]))
        ratios[p] = ratio
        finite[p] = bool(ratio < finite_ratio)
    return BlowupReport(float(s), side, d.tolist(), norms.tolist(), float(slope), reliable,
                        list(p_grid), ratios, finite)
