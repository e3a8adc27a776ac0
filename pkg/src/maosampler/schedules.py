"""Closed-form step sizes and mixing-time bounds for the MAO chain.

Two regimes are covered. Under the weaker regime (``assumption="A"``) the
step is ``1 / (c r(s) d^(alpha-1))``; under the concentration regime
(``assumption="B"``) it is ``1 / (c tau(s) d^omega)`` with
``omega = max(2(alpha-1)/gamma, (gamma+alpha-2)/gamma)``. In both cases the
tail-mass parameter is ``s = eps^2 / (3 beta)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "Schedule",
    "radius_R",
    "radius_r",
    "tau_alpha",
    "omega_exponent",
    "step_size",
    "predicted_bounds",
    "delta_tolerance",
    "tail_mass",
]


def _log_inv(s: float) -> float:
    if not 0.0 < s <= 1.0:
        raise ValueError(f"s must lie in (0, 1], got {s}")
    return -math.log(s)


def radius_R(s: float, d: int) -> float:
    """R(s) = 1 + max((log(1/s)/d)^(1/4), (log(1/s)/d)^(1/2))."""
    u = _log_inv(s) / d
    return 1.0 + max(u ** 0.25, u ** 0.5)


def radius_r(s: float, d: int) -> float:
    """r(s) = max(R(s), R(1/2)); never below R(1/2)."""
    return max(radius_R(s, d), radius_R(0.5, d))


def tau_alpha(s: float, d: int, alpha: float) -> float:
    """Radius factor so that B(0, tau(s) d^(1/alpha)) holds mass >= 1 - s
    under the density proportional to exp(-||x||^alpha)."""
    L = _log_inv(s)
    return (1.0 / alpha + L / d + math.sqrt(2.0 * L / (d * alpha))) ** (1.0 / alpha)


def omega_exponent(alpha: float, gamma: float) -> float:
    return max(2.0 * (alpha - 1.0) / gamma, (gamma + alpha - 2.0) / gamma)


def tail_mass(eps: float, beta: float) -> float:
    return eps * eps / (3.0 * beta)


@dataclass(frozen=True)
class Schedule:
    eps: float
    beta: float
    d: int
    alpha: float
    gamma: float
    c: float
    s: float
    assumption: str
    radius: float  # r(s) under A, tau(s) under B
    omega: float
    h: float
    predicted_mixing_bound: float


def step_size(eps: float, beta: float, d: int, alpha: float, gamma: float,
              c: float = 1.0, assumption: str = "B", s: float | None = None) -> Schedule:
    """Warm-start step size and the matching mixing-time bound."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if beta < 1.0:
        raise ValueError(f"beta must be >= 1, got {beta}")
    if c <= 0:
        raise ValueError("c must be positive")
    if d < 1:
        raise ValueError("d must be a positive integer")
    if alpha < 2 or gamma < 2:
        raise ValueError("alpha and gamma must be >= 2")
    if s is None:
        s = tail_mass(eps, beta)
    assumption = assumption.upper()
    if assumption == "A":
        radius = radius_r(s, d)
        omega = alpha - 1.0
    elif assumption == "B":
        radius = tau_alpha(s, d, alpha)
        omega = omega_exponent(alpha, gamma)
    else:
        raise ValueError(f"assumption must be 'A' or 'B', got {assumption!r}")
    h = 1.0 / (c * radius * d ** omega)
    sched = Schedule(eps=eps, beta=beta, d=d, alpha=alpha, gamma=gamma, c=c, s=s,
                     assumption=assumption, radius=radius, omega=omega, h=h,
                     predicted_mixing_bound=math.nan)
    bound = predicted_bounds(sched, radius)["mixing_upper"]
    return replace(sched, predicted_mixing_bound=bound)


def predicted_bounds(schedule: Schedule, tau_or_r: float) -> dict:
    """``c * tau_or_r * d^omega * log(log(beta)/eps)``.

    The log-log factor is clamped below at 1, which also covers ``beta <= e``.
    The bound itself is never reported below one step.
    """
    if schedule.beta <= math.e:
        factor = 1.0
    else:
        factor = max(1.0, math.log(math.log(schedule.beta) / schedule.eps))
    bound = max(1.0, schedule.c * tau_or_r * schedule.d ** schedule.omega * factor)
    return {"mixing_upper": bound, "warm_log_log": factor}


def delta_tolerance(h: float, eps: float, c: float = 1.0) -> float:
    """Mode-accuracy target ``min(c log(1/eps) / h, sqrt(h))``."""
    if h <= 0:
        raise ValueError("h must be positive")
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    return min(c * math.log(1.0 / eps) / h, math.sqrt(h))
