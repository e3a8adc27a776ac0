"""Target potentials f with pi(x) proportional to exp(-f(x)).

A :class:`Potential` bundles the potential, its gradient, the minimizer and
the class constants used by the step-size schedules and warm starts::

    ||grad f(x)||   <= K1 * (1 + ||x - mode||**(alpha - 1))
    ||hess f(x)||   <= K2 * (1 + ||x||**(alpha - 2))
    f(y) - f(x) - grad f(x).(y - x) >= m/2 ||y - x||**2
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Potential",
    "pi1",
    "pi2",
    "radial_alpha",
    "gaussian",
    "make_target",
    "eval_potential",
    "eval_gradient",
    "check_growth_constants",
    "finite_difference_check",
    "sample_ball",
]


@dataclass(frozen=True)
class Potential:
    """Unnormalized negative log-density with declared regularity constants.

    ``m`` is 0 for potentials that are convex but not strongly convex
    (``pi2`` and ``radial_alpha`` with ``alpha > 2``).
    """

    dim: int
    f: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    mode: np.ndarray
    alpha: float
    m: float
    K1: float
    K2: float
    gamma: float
    name: str = "custom"

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        mode = np.asarray(self.mode, dtype=float).reshape(-1)
        if mode.shape != (self.dim,):
            raise ValueError(f"mode has shape {mode.shape}, expected ({self.dim},)")
        object.__setattr__(self, "mode", mode)
        if self.alpha < 2 or self.gamma < 2:
            raise ValueError("alpha and gamma must be >= 2")
        if self.m < 0 or self.K1 <= 0 or self.K2 <= 0:
            raise ValueError("constants must satisfy m >= 0, K1 > 0, K2 > 0")

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(
                f"{self.name}: point has shape {x.shape}, expected ({self.dim},)"
            )
        return x

    def value(self, x) -> float:
        return float(self.f(self._check(x)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad(self._check(x)), dtype=float)

    def with_constants(self, **changes) -> "Potential":
        """Copy with some declared constants replaced (e.g. a looser ``K1``)."""
        return dataclasses.replace(self, **changes)


# Builtin targets. Bodies skip the shape check; the Potential methods do it.

def pi1(dim: int, a: float = 1.0) -> Potential:
    """f(x) = ||x||^4/4 + a||x||^2/2, strongly convex with m = a."""
    if a <= 0:
        raise ValueError("a must be positive")

    def f(x):
        r2 = x @ x
        return 0.25 * r2 * r2 + 0.5 * a * r2

    def grad(x):
        return (x @ x + a) * x

    k = 3.0 + a
    return Potential(dim, f, grad, np.zeros(dim), alpha=4.0, m=a, K1=k, K2=k,
                     gamma=4.0, name=f"pi1(a={a:g})")


def pi2(dim: int) -> Potential:
    """f(x) = ||x||^4/4 + x_1^2/2, quadratic only along the first axis."""

    def f(x):
        r2 = x @ x
        return 0.25 * r2 * r2 + 0.5 * x[0] * x[0]

    def grad(x):
        g = (x @ x) * x
        g[0] += x[0]
        return g

    return Potential(dim, f, grad, np.zeros(dim), alpha=4.0, m=0.0, K1=4.0, K2=4.0,
                     gamma=4.0, name="pi2")


def radial_alpha(dim: int, alpha: float) -> Potential:
    """f(x) = ||x||^alpha."""
    if alpha < 2:
        raise ValueError("alpha must be >= 2")

    def f(x):
        return float(np.sqrt(x @ x)) ** alpha

    def grad(x):
        r = float(np.sqrt(x @ x))
        if r == 0.0:
            return np.zeros_like(x)
        return alpha * r ** (alpha - 2) * x

    m = 2.0 if alpha == 2 else 0.0
    return Potential(dim, f, grad, np.zeros(dim), alpha=alpha, m=m, K1=alpha,
                     K2=alpha * (alpha - 1.0), gamma=alpha,
                     name=f"radial(alpha={alpha:g})")


def gaussian(dim: int, m: float = 1.0) -> Potential:
    """f(x) = m||x||^2/2."""
    if m <= 0:
        raise ValueError("m must be positive")

    def f(x):
        return 0.5 * m * (x @ x)

    def grad(x):
        return m * x

    return Potential(dim, f, grad, np.zeros(dim), alpha=2.0, m=m, K1=m, K2=m,
                     gamma=2.0, name=f"gaussian(m={m:g})")


def make_target(kind: str, dim: int, *, a: float = 1.0, alpha: float = 4.0,
                m: float = 1.0) -> Potential:
    """Build a builtin target by name: pi1, pi2, radial or gaussian."""
    if kind == "pi1":
        return pi1(dim, a)
    if kind == "pi2":
        return pi2(dim)
    if kind in ("radial", "radial_alpha"):
        return radial_alpha(dim, alpha)
    if kind == "gaussian":
        return gaussian(dim, m)
    raise ValueError(f"unknown target {kind!r}")


def eval_potential(target: Potential, x) -> float:
    return target.value(x)


def eval_gradient(target: Potential, x) -> np.ndarray:
    return target.gradient(x)


def sample_ball(rng: np.random.Generator, n: int, dim: int, radius: float,
                center=None) -> np.ndarray:
    """Uniform draws from the Euclidean ball, shape (n, dim)."""
    u = rng.standard_normal((n, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    pts = u * r[:, None]
    if center is not None:
        pts += center
    return pts


def check_growth_constants(target: Potential, n_samples: int = 1000,
                           radius: float = 3.0, seed: int = 0) -> dict:
    """Largest observed ``||grad f|| / (K1 (1 + ||x - mode||^(alpha-1)))``.

    Points are drawn uniformly in the ball of ``radius`` around the mode.
    """
    if n_samples < 1 or radius <= 0:
        raise ValueError("need n_samples >= 1 and radius > 0")
    rng = np.random.default_rng(seed)
    pts = sample_ball(rng, n_samples, target.dim, radius, target.mode)
    worst = 0.0
    for x in pts:
        dist = np.linalg.norm(x - target.mode)
        bound = target.K1 * (1.0 + dist ** (target.alpha - 1.0))
        worst = max(worst, np.linalg.norm(target.gradient(x)) / bound)
    return {"max_ratio": float(worst), "ok": bool(worst <= 1.0)}


def finite_difference_check(target: Potential, x, step: float = 1e-5) -> float:
    """Max over coordinates of |central difference - grad| / (1 + |grad|)."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = target._check(x)
    g = target.gradient(x)
    err = 0.0
    for i in range(target.dim):
        e = np.zeros(target.dim)
        e[i] = step
        fd = (target.value(x + e) - target.value(x - e)) / (2 * step)
        err = max(err, abs(fd - g[i]) / (1.0 + abs(g[i])))
    return float(err)
