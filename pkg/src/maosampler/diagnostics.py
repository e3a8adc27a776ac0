"""Autocorrelation, effective sample size and per-trace summaries."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .samplers import Trace

__all__ = [
    "DiagnosticsReport",
    "autocorrelation",
    "integrated_autocorr_time",
    "effective_sample_size",
    "summarize",
]


def _autocov_fft(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance (divide by n) at every lag 0..n-1."""
    n = x.size
    xc = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    fx = np.fft.rfft(xc, size)
    return np.fft.irfft(fx * np.conj(fx), size)[:n] / n


def autocorrelation(series, max_lag: int) -> np.ndarray:
    """Sample ACF ``gamma(k)/gamma(0)`` for k = 0..max_lag, biased normalization."""
    x = np.asarray(series, dtype=float).ravel()
    if not 1 <= max_lag < x.size:
        raise ValueError(f"need 1 <= max_lag < len(series), got max_lag={max_lag}, n={x.size}")
    acov = _autocov_fft(x)
    if not acov[0] > 0:
        raise ValueError("series is constant; autocorrelation undefined")
    acf = acov[: max_lag + 1] / acov[0]
    acf[0] = 1.0
    return acf


def integrated_autocorr_time(series) -> float:
    """Geyer initial monotone sequence estimate of ``1 + 2 sum_k rho(k)``.

    Pairs ``Gamma_k = rho(2k) + rho(2k+1)`` are summed until the first
    negative pair, each capped by its predecessor.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    acov = _autocov_fft(x)
    if not acov[0] > 0:
        raise ValueError("series is constant; ESS undefined")
    rho = acov / acov[0]
    total = 0.0
    prev = math.inf
    for k in range(n // 2):
        pair = rho[2 * k] + rho[2 * k + 1]
        if pair < 0:
            break
        pair = min(pair, prev)
        total += pair
        prev = pair
    return -1.0 + 2.0 * total


def effective_sample_size(series) -> float:
    """``n / tau_int``, clamped to (0, n]."""
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 100:
        raise ValueError(f"need at least 100 draws for ESS, got {n}")
    tau = integrated_autocorr_time(x)
    if tau <= 0:
        return float(n)
    return float(min(n, n / tau))


@dataclass(frozen=True)
class DiagnosticsReport:
    ess: np.ndarray
    acf: np.ndarray  # shape (dim, max_lag + 1)
    accept_rate: float
    n: int


def summarize(trace: Trace, max_lag: int | None = None) -> DiagnosticsReport:
    """Per-coordinate ESS and ACF plus the acceptance rate.

    Coordinates that never move, or traces shorter than 100 states, get NaN
    for the quantities that are undefined on them.
    """
    states = np.asarray(trace.states)
    n = states.shape[0]
    if n == 0:
        raise ValueError("empty trace")
    dim = states.shape[1]
    if max_lag is None:
        max_lag = min(n - 1, 10_000)
    ess = np.full(dim, math.nan)
    acf = np.full((dim, max_lag + 1), math.nan)
    for i in range(dim):
        col = states[:, i]
        if np.ptp(col) == 0:
            continue
        if max_lag >= 1:
            acf[i] = autocorrelation(col, max_lag)
        if n >= 100:
            ess[i] = effective_sample_size(col)
    return DiagnosticsReport(ess=ess, acf=acf, accept_rate=trace.accept_rate, n=n)
