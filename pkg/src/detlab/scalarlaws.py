"""Scalar nonlinearities h(t) with primitive f(t) = int_0^t h and H(t) = t h(t) - f(t)."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np


class UnsupportedLawError(ValueError):
    """Raised when a law lacks the derivative or primitive an operation needs."""


class Monotone(str, Enum):
    STRICT = "strictlyIncreasing"
    NONDECREASING = "nondecreasing"
    NONE = "none"


@dataclass(frozen=True)
class ScalarLaw:
    name: str
    evaluate: Callable
    derivative: Optional[Callable] = None
    primitive: Optional[Callable] = None
    monotone: Monotone = Monotone.NONE
    params: dict = field(default_factory=dict)
    use_fallback: bool = True

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))

    def f(self, t):
        """Primitive ``f(t) = int_0^t h``; composite Gauss when no closed form is registered."""
        if self.primitive is not None:
            return self.primitive(np.asarray(t, dtype=float))
        if not self.use_fallback:
            raise UnsupportedLawError(f"law {self.name!r} has no primitive")
        return np.vectorize(lambda s: primitive_fallback(self, s))(t)

    def dh(self, t):
        if self.derivative is None:
            raise UnsupportedLawError(f"law {self.name!r} has no derivative")
        return self.derivative(np.asarray(t, dtype=float))

    def descriptor(self):
        return {"name": self.name, **self.params}


@dataclass(frozen=True)
class GrowthParams:
    """Two-sided bound ``lam * t**k1 <= h'(t) <= Lam * (t**k2 + 1)`` for t >= 0."""

    lam: float
    Lam: float
    k1: float
    k2: float

    def __post_init__(self):
        if not (self.Lam > self.lam > 0):
            raise ValueError("need Lam > lam > 0")
        if not (0 <= self.k1 <= self.k2 < self.k1 + 1):
            raise ValueError("need 0 <= k1 <= k2 < k1 + 1")


@dataclass
class GrowthReport:
    ok: bool
    failures: list


def big_h(law, t):
    """``H(t) = t h(t) - f(t)``."""
    t = np.asarray(t, dtype=float)
    return t * law(t) - law.f(t)


_GL_CACHE = {}


def _gauss01(m):
    if m not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(m)
        _GL_CACHE[m] = ((x + 1) / 2, w / 2)
    return _GL_CACHE[m]


def primitive_fallback(law, t, level=8, order=8):
    """``int_0^t h`` by composite Gauss-Legendre on ``2**level`` equal panels."""
    t = float(t)
    if t == 0.0:
        return 0.0
    x, w = _gauss01(order)
    edges = np.linspace(0.0, t, 2 ** level + 1)
    width = np.diff(edges)
    nodes = edges[:-1, None] + width[:, None] * x[None, :]
    vals = law.evaluate(nodes)
    return float(np.sum(width[:, None] * w[None, :] * vals))


def check_growth(law, g, grid):
    """Report grid points where the two-sided derivative bound fails.

    Only t >= 0 is accepted; the bound says nothing about negative arguments.
    """
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0):
        raise ValueError("growth bounds are only checked on t >= 0")
    d = law.dh(grid)
    lower = g.lam * grid ** g.k1
    upper = g.Lam * (grid ** g.k2 + 1)
    bad = (d < lower) | (d > upper)
    return GrowthReport(ok=not bool(bad.any()), failures=[float(t) for t in grid[bad]])


def check_monotone(law, interval=(-4.0, 4.0), points=1024):
    """Sampled monotonicity check on a uniform grid; returns True if the declared flag holds."""
    t = np.linspace(interval[0], interval[1], points)
    d = np.diff(law(t))
    if law.monotone == Monotone.STRICT:
        return bool(np.all(d > 0))
    if law.monotone == Monotone.NONDECREASING:
        return bool(np.all(d >= 0))
    return True


# registry ------------------------------------------------------------------

def identity():
    return ScalarLaw("identity", lambda t: t, lambda t: np.ones_like(t), lambda t: t * t / 2,
                     Monotone.STRICT)


def power(k=2.0, scale=1.0):
    """``h(t) = scale * t |t|**(k-1)``, odd extension of a power law."""
    if k <= 0:
        raise ValueError("power law needs k > 0")
    return ScalarLaw(
        "power",
        lambda t: scale * t * np.abs(t) ** (k - 1),
        lambda t: scale * k * np.abs(t) ** (k - 1),
        lambda t: scale * np.abs(t) ** (k + 1) / (k + 1),
        Monotone.STRICT if scale > 0 else Monotone.NONE,
        {"k": k, "scale": scale},
    )


def exponential():
    return ScalarLaw("exp", np.exp, np.exp, lambda t: np.expm1(t), Monotone.STRICT)


def exp_normalized():
    """``h(t) = (e^t - 1)/(e - 1)``: h(0) = 0, h(1) = 1, strictly increasing."""
    c = math.e - 1
    return ScalarLaw("exp_normalized", lambda t: np.expm1(t) / c, lambda t: np.exp(t) / c,
                     lambda t: (np.expm1(t) - t) / c, Monotone.STRICT)


def constant(value=1.0):
    return ScalarLaw("constant", lambda t: np.full_like(t, value, dtype=float),
                     lambda t: np.zeros_like(t), lambda t: value * t,
                     Monotone.NONDECREASING, {"value": value})


def cubic():
    """``h(t) = t**3``; primitive left to quadrature on purpose."""
    return ScalarLaw("cubic", lambda t: t ** 3, lambda t: 3 * t ** 2, None, Monotone.STRICT)


REGISTRY = {
    "identity": identity,
    "power": power,
    "exp": exponential,
    "exp_normalized": exp_normalized,
    "constant": constant,
    "cubic": cubic,
}


def law_from_descriptor(desc):
    """Build a law from ``{"name": ..., **params}``."""
    if isinstance(desc, str):
        desc = {"name": desc}
    desc = dict(desc)
    name = desc.pop("name", None)
    if name not in REGISTRY:
        raise ValueError(f"unknown law {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](**desc)
