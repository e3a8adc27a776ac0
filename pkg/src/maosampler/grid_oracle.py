"""Brute-force verification of a sampler's kernel on a one-dimensional grid.

The continuous transition kernel is replaced by a row-stochastic matrix over
cell midpoints: off-diagonal entries are ``(1 - zeta) q(x_i, x_j) A(x_i, x_j) dx``
and the diagonal absorbs rejections, laziness and the cell's own mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .potentials import Potential
from .samplers import ProposalKernel

__all__ = [
    "Grid",
    "GridKernel",
    "StationaryResult",
    "MixingResult",
    "discretize",
    "stationary",
    "lp_divergence",
    "total_variation",
    "mixing_trajectory",
    "discretize_density",
]


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n_cells: int

    def __post_init__(self):
        if not self.hi > self.lo or self.n_cells < 2:
            raise ValueError("grid needs hi > lo and at least 2 cells")

    @property
    def dx(self) -> float:
        return (self.hi - self.lo) / self.n_cells

    @property
    def midpoints(self) -> np.ndarray:
        return self.lo + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class GridKernel:
    grid: Grid
    P: np.ndarray
    pi_disc: np.ndarray
    zeta: float
    leakage: float

    def row_sum_error(self) -> float:
        return float(np.abs(self.P.sum(axis=1) - 1.0).max())

    def reversibility_residual(self) -> float:
        flow = self.pi_disc[:, None] * self.P
        return float(np.abs(flow - flow.T).max())


def discretize_density(f_values: np.ndarray) -> np.ndarray:
    """Normalized cell masses from potential values at the midpoints."""
    w = np.exp(-(f_values - f_values.min()))
    return w / w.sum()


def _log_q_matrix(means: np.ndarray, ys: np.ndarray, h: float) -> np.ndarray:
    diff = ys[None, :] - means[:, None]
    return -diff * diff / (4.0 * h) - 0.5 * math.log(4.0 * math.pi * h)


def discretize(kernel: ProposalKernel, target: Potential, zeta: float, grid: Grid,
               max_leakage: float = 1e-6) -> GridKernel:
    """Cell-midpoint discretization of the zeta-lazy Metropolis-Hastings kernel."""
    if target.dim != 1:
        raise ValueError("grid discretization needs a one-dimensional target")
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    xs = grid.midpoints
    dx = grid.dx
    n = xs.size
    h = kernel.h

    def fvals(pts):
        with np.errstate(over="ignore"):
            return np.array([target.f(np.array([p])) for p in pts])

    def means(pts):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.array([kernel.mean(target, np.array([p]))[0] for p in pts])

    f_in = fvals(xs)
    m_in = means(xs)
    log_pi = -f_in

    lq = _log_q_matrix(m_in, xs, h)
    with np.errstate(invalid="ignore"):
        log_r = (log_pi[None, :] - log_pi[:, None]) + lq.T - lq
    P = (1.0 - zeta) * np.exp(lq + np.minimum(0.0, log_r)) * dx
    np.fill_diagonal(P, 0.0)
    off = P.sum(axis=1)
    if np.any(off > 1.0 + 1e-12):
        raise ValueError("grid too coarse for this step size: off-diagonal mass exceeds 1")
    P[np.diag_indices(n)] = 1.0 - off

    # Mass beyond the grid: extend by 12 proposal deviations on both sides.
    pad = 12.0 * math.sqrt(2.0 * h) + 1.0
    n_pad = int(math.ceil(pad / dx))
    outside = np.concatenate([grid.lo - (np.arange(n_pad)[::-1] + 0.5) * dx,
                              grid.hi + (np.arange(n_pad) + 0.5) * dx])
    f_out = fvals(outside)
    m_out = means(outside)
    shift = f_in.min()
    z_in = np.exp(-(f_in - shift)).sum()
    target_out = float(np.nan_to_num(np.exp(-(f_out - shift))).sum() / z_in)
    lq_out = _log_q_matrix(m_in, outside, h)
    lq_back = _log_q_matrix(m_out, xs, h).T
    with np.errstate(invalid="ignore", over="ignore"):
        log_r_out = (-f_out[None, :] - log_pi[:, None]) + lq_back - lq_out
        moves = np.nan_to_num(np.exp(lq_out + np.minimum(0.0, log_r_out))) * dx
    pi_disc = discretize_density(f_in)
    escape = float((1.0 - zeta) * (pi_disc @ moves.sum(axis=1)))
    leakage = max(target_out, escape)
    if leakage > max_leakage:
        raise ValueError(f"boundary leakage {leakage:.3g} exceeds {max_leakage:g}; widen the grid")
    return GridKernel(grid=grid, P=P, pi_disc=pi_disc, zeta=zeta, leakage=leakage)


@dataclass(frozen=True)
class StationaryResult:
    distribution: np.ndarray
    tv_to_target: float
    iterations: int


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def stationary(gk: GridKernel, tol: float = 1e-12, max_iter: int = 1_000_000) -> StationaryResult:
    """Power iteration from the uniform distribution."""
    n_comp, _ = connected_components(gk.P > 0.0, directed=True, connection="strong")
    if n_comp != 1:
        raise ValueError(f"kernel is reducible ({n_comp} communicating classes)")
    n = gk.P.shape[0]
    mu = np.full(n, 1.0 / n)
    for it in range(1, max_iter + 1):
        nxt = mu @ gk.P
        nxt /= nxt.sum()
        change = float(np.abs(nxt - mu).sum())
        mu = nxt
        if change <= tol:
            return StationaryResult(mu, total_variation(mu, gk.pi_disc), it)
    raise RuntimeError(f"power iteration did not converge in {max_iter} steps")


def lp_divergence(mu: np.ndarray, nu: np.ndarray, p: float) -> float:
    """``(sum |mu/nu - 1|^p nu)^(1/p)``; p = 1 is twice the total variation."""
    ratio = mu / nu
    return float((np.abs(ratio - 1.0) ** p @ nu) ** (1.0 / p))


@dataclass(frozen=True)
class MixingResult:
    divergences: np.ndarray
    t_mix: int | None  # None when eps is not reached within the step cap


def mixing_trajectory(gk: GridKernel, mu0: np.ndarray, eps: float, p: float = 2,
                      max_steps: int = 100_000, n_steps: int | None = None) -> MixingResult:
    """Divergences ``d_p(mu0 P^k, pi)`` for k = 0, 1, ...

    Stops at the first k with divergence <= eps unless ``n_steps`` asks for a
    fixed-length trajectory.
    """
    mu = np.asarray(mu0, dtype=float)
    if mu.shape != gk.pi_disc.shape or np.any(mu < 0):
        raise ValueError("mu0 must be a nonnegative vector over the grid cells")
    mu = mu / mu.sum()
    cap = max_steps if n_steps is None else n_steps
    divs = [lp_divergence(mu, gk.pi_disc, p)]
    t_mix = 0 if divs[0] <= eps else None
    k = 0
    while k < cap and (n_steps is not None or t_mix is None):
        mu = mu @ gk.P
        k += 1
        divs.append(lp_divergence(mu, gk.pi_disc, p))
        if t_mix is None and divs[-1] <= eps:
            t_mix = k
    return MixingResult(np.array(divs), t_mix)
