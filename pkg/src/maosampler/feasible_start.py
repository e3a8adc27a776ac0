"""Warm initial distribution mu0 proportional to exp(-f0) and its warmness.

``f0(x) = K2 (||x||^2/2 + ||x||^alpha / (alpha (alpha - 1)))`` dominates any
potential in the class with the same ``K2`` (after shifting both minima to
the origin), so ``mu0 / pi`` is bounded by the ratio of normalizing constants.
The closed form for that bound is :func:`log_beta`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from .potentials import Potential

__all__ = [
    "FeasibleStart",
    "log_beta",
    "sample_start",
    "verify_warmness_grid",
    "radial_alpha_radii",
    "radial_alpha_ball_mass",
]

_LOG_CUTOFF = 50.0  # exp(-50) ~ 2e-22 relative density at the table ends


def log_beta(K2: float, alpha: float, m: float, d: int) -> float:
    """Log of the warmness constant of mu0 with respect to an m-strongly convex target."""
    if K2 <= 0 or m <= 0 or d < 1:
        raise ValueError("need K2 > 0, m > 0 and d >= 1")
    if alpha < 2:
        raise ValueError("alpha must be >= 2")
    return (0.5 * d * math.log(2.0 / m)
            + special.gammaln(0.5 * d + 1.0)
            - special.gammaln(d / alpha)
            - math.log(d)
            + math.log(alpha)
            + 0.5 * K2
            + (d / alpha) * math.log(2.0 * K2 / (alpha * (alpha - 1.0))))


@dataclass(frozen=True, eq=False)
class FeasibleStart:
    K2: float
    alpha: float
    m: float
    d: int
    mode_shift: np.ndarray | None = None
    table_size: int = 1024

    def __post_init__(self):
        if self.K2 <= 0 or self.alpha < 2 or self.d < 1:
            raise ValueError("need K2 > 0, alpha >= 2 and d >= 1")
        shift = np.zeros(self.d) if self.mode_shift is None else self.mode_shift
        shift = np.asarray(shift, dtype=float).reshape(-1)
        if shift.shape != (self.d,):
            raise ValueError("mode_shift must have length d")
        object.__setattr__(self, "mode_shift", shift)

    @classmethod
    def from_potential(cls, target: Potential, K2: float | None = None) -> "FeasibleStart":
        return cls(K2=target.K2 if K2 is None else K2, alpha=target.alpha, m=target.m,
                   d=target.dim, mode_shift=target.mode)

    @property
    def log_beta(self) -> float:
        return log_beta(self.K2, self.alpha, self.m, self.d)

    def radial_f0(self, r):
        r = np.asarray(r, dtype=float)
        a = self.alpha
        return self.K2 * (0.5 * r * r + r ** a / (a * (a - 1.0)))

    def f0(self, x) -> float:
        r = float(np.linalg.norm(np.asarray(x, dtype=float) - self.mode_shift))
        return float(self.radial_f0(r))

    def _log_radial(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            lead = 0.0 if self.d == 1 else (self.d - 1) * np.log(r)
        return lead - self.radial_f0(r)

    def _radial_peak(self) -> float:
        if self.d == 1:
            return 0.0
        # (d-1)/r = K2 (r + r^(alpha-1)/(alpha-1)) has one positive root.
        def slope(r):
            return (self.d - 1) / r - self.K2 * (r + r ** (self.alpha - 1) / (self.alpha - 1))
        hi = 1.0
        while slope(hi) > 0:
            hi *= 2.0
        return optimize.brentq(slope, 1e-300, hi, xtol=1e-14)

    @cached_property
    def _inverse_cdf(self) -> PchipInterpolator:
        peak = self._radial_peak()
        top = float(self._log_radial(peak)) if self.d > 1 else float(self._log_radial(0.0))

        def dens(r):
            return math.exp(float(self._log_radial(r)) - top)

        r_hi = max(peak, 1.0)
        while self._log_radial(r_hi) - top > -_LOG_CUTOFF:
            r_hi *= 1.5
        r_lo = 0.0
        if self.d > 1:
            lo, hi = 0.0, peak
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if mid == 0.0 or self._log_radial(mid) - top < -_LOG_CUTOFF:
                    lo = mid
                else:
                    hi = mid
            r_lo = lo
        edges = np.linspace(r_lo, r_hi, self.table_size + 1)
        pieces = np.empty(self.table_size)
        for i in range(self.table_size):
            val, _ = integrate.quad(dens, edges[i], edges[i + 1], epsabs=0.0, epsrel=1e-12)
            pieces[i] = val
        if not np.all(np.isfinite(pieces)):
            raise FloatingPointError("radial CDF tabulation produced non-finite values")
        cdf = np.concatenate([[0.0], np.cumsum(pieces)])
        cdf /= cdf[-1]
        keep = np.concatenate([[True], np.diff(cdf) > 0])
        return PchipInterpolator(cdf[keep], edges[keep])

    def sample_radius(self, u) -> np.ndarray:
        return np.asarray(self._inverse_cdf(np.asarray(u, dtype=float)))


def sample_start(fs: FeasibleStart, n: int, seed: int = 0) -> np.ndarray:
    """``n`` draws from mu0: radius by inverse CDF, direction uniform on the sphere."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    radii = fs.sample_radius(rng.random(n))
    u = rng.standard_normal((n, fs.d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return fs.mode_shift + radii[:, None] * u


def verify_warmness_grid(fs: FeasibleStart, target: Potential, lo: float, hi: float,
                         n_points: int = 8001, tail_tol: float = 1e-10) -> dict:
    """Grid check in one dimension that ``sup log(mu0/pi) <= log_beta``."""
    if fs.d != 1 or target.dim != 1:
        raise ValueError("grid verification is only available in dimension 1")
    xs = np.linspace(lo, hi, n_points)
    f_t = np.array([target.value(np.array([x])) for x in xs])
    f_0 = np.array([fs.f0(np.array([x])) for x in xs])

    def log_norm(fv):
        shift = fv.min()
        return math.log(integrate.trapezoid(np.exp(-(fv - shift)), xs)) - shift

    lz_t = log_norm(f_t)
    lz_0 = log_norm(f_0)

    def tail(fun, lz, a, b):
        val, _ = integrate.quad(lambda x: math.exp(-fun(x) - lz), a, b)
        return val

    def ft(x):
        return target.value(np.array([x]))

    def f0(x):
        return fs.f0(np.array([x]))

    leak = max(tail(ft, lz_t, -np.inf, lo), tail(ft, lz_t, hi, np.inf),
               tail(f0, lz_0, -np.inf, lo), tail(f0, lz_0, hi, np.inf))
    if leak > tail_tol:
        raise ValueError(f"grid [{lo}, {hi}] too narrow: boundary mass {leak:.3g}")
    log_ratio = (-f_0 - lz_0) - (-f_t - lz_t)
    worst = float(log_ratio.max())
    lb = fs.log_beta
    return {"max_log_ratio": worst, "log_beta": lb, "ok": worst <= lb + 1e-6}


def radial_alpha_radii(d: int, alpha: float, n: int, seed: int = 0) -> np.ndarray:
    """Radii ``||X||`` for X with density proportional to exp(-||x||^alpha).

    ``||X||^alpha`` is Gamma(d/alpha, 1) distributed.
    """
    rng = np.random.default_rng(seed)
    return rng.gamma(d / alpha, 1.0, size=n) ** (1.0 / alpha)


def radial_alpha_ball_mass(rho: float, d: int, alpha: float) -> float:
    """Exact mass of the ball B(0, rho) under exp(-||x||^alpha)."""
    return float(special.gammainc(d / alpha, rho ** alpha))
