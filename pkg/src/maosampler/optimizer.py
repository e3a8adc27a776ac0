"""Offline mode finding with a Bregman (relative-smoothness) gradient scheme.

Each iteration minimizes the linearization of ``f`` plus ``L D_h(x, x_i)``,
with reference function ``h(x) = ||x||^2/2 + ||x||^alpha/alpha``. Plain
gradient descent can diverge on quartic potentials for any fixed step; this
scheme does not, provided ``f`` is ``L``-smooth relative to ``h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .potentials import Potential

__all__ = [
    "OptimizerConfig",
    "OptimizerResult",
    "default_L_rel",
    "reference_value",
    "reference_gradient",
    "bregman_divergence",
    "solve_radial",
    "prox_step",
    "find_mode",
]


def default_L_rel(K2: float, alpha: float) -> float:
    """Conservative relative-smoothness constant ``4 K2 max(1, 2^(alpha-3))``."""
    return K2 * max(1.0, 2.0 ** (alpha - 3.0)) * 4.0


@dataclass(frozen=True)
class OptimizerConfig:
    L_rel: float
    max_iters: int = 10_000
    grad_tol: float = 1e-8
    alpha: float = 4.0

    def __post_init__(self):
        if self.L_rel <= 0 or self.max_iters < 1 or self.grad_tol <= 0:
            raise ValueError("L_rel, max_iters and grad_tol must be positive")
        if self.alpha < 2:
            raise ValueError("alpha must be >= 2")


@dataclass
class OptimizerResult:
    x_tilde: np.ndarray
    iters: int
    grad_norm: float
    converged: bool
    f_history: list = field(default_factory=list)


def reference_value(x, alpha: float) -> float:
    r = float(np.linalg.norm(x))
    return 0.5 * r * r + r ** alpha / alpha


def reference_gradient(x, alpha: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    return (1.0 + r ** (alpha - 2.0)) * x


def bregman_divergence(x, y, alpha: float) -> float:
    """``D_h(x, y) = h(x) - h(y) - <grad h(y), x - y>``; nonnegative."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (reference_value(x, alpha) - reference_value(y, alpha)
            - float(reference_gradient(y, alpha) @ (x - y)))


def solve_radial(norm_v: float, alpha: float, rtol: float = 1e-14) -> float:
    """Root ``rho >= 0`` of ``rho (1 + rho^(alpha-2)) = norm_v`` by bisection."""
    if norm_v < 0:
        raise ValueError("norm_v must be nonnegative")
    if norm_v == 0.0:
        return 0.0
    if alpha == 2.0:
        return 0.5 * norm_v
    lo, hi = 0.0, norm_v
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid * (1.0 + mid ** (alpha - 2.0)) < norm_v:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


def prox_step(x, grad, L_rel: float, alpha: float) -> np.ndarray:
    """Exact minimizer of ``<grad, y - x> + L_rel D_h(y, x)`` over y.

    The optimality condition ``grad h(y) = grad h(x) - grad / L_rel =: v`` is
    radial, so ``y = v / (1 + rho^(alpha-2))`` with ``rho = ||y||``.
    """
    if L_rel <= 0:
        raise ValueError("L_rel must be positive")
    v = reference_gradient(x, alpha) - np.asarray(grad, dtype=float) / L_rel
    rho = solve_radial(float(np.linalg.norm(v)), alpha)
    return v / (1.0 + rho ** (alpha - 2.0))


def find_mode(target: Potential, x0, config: OptimizerConfig) -> OptimizerResult:
    """Iterate :func:`prox_step` until ``||grad f|| <= grad_tol`` or ``max_iters``."""
    x = np.array(target._check(x0), dtype=float)
    if not np.all(np.isfinite(x)):
        raise FloatingPointError("iteration 0: starting point is not finite")
    g = target.gradient(x)
    gn = float(np.linalg.norm(g))
    history = [target.value(x)]
    it = 0
    while gn > config.grad_tol and it < config.max_iters:
        x = prox_step(x, g, config.L_rel, config.alpha)
        it += 1
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"iteration {it}: iterate is not finite")
        g = target.gradient(x)
        gn = float(np.linalg.norm(g))
        history.append(target.value(x))
    return OptimizerResult(x_tilde=x, iters=it, grad_norm=gn,
                           converged=gn <= config.grad_tol, f_history=history)
