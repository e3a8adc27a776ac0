"""Metropolis-Hastings chains: random walk (RWM), Langevin (MALA) and MAO.

All three kernels propose ``z ~ N(mean(x), 2h I)`` and differ only in the
proposal mean:

* ``rwm``:  ``x``
* ``mala``: ``x - h grad f(x)``
* ``mao``:  ``x - h (x - x_tilde)``, contracting towards a precomputed mode
  estimate ``x_tilde``.

Densities and acceptance ratios are handled in log space throughout;
``exp(-f)`` underflows long before the quartic targets reach their tails.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .potentials import Potential

__all__ = [
    "KINDS",
    "ACCEPTED",
    "REJECTED",
    "LAZY",
    "ChainDivergenceError",
    "ProposalKernel",
    "SamplerConfig",
    "Trace",
    "make_rng",
    "log_accept_ratio",
    "step",
    "run_chain",
    "expected_acceptance",
    "kl_gaussian_shift",
    "pinsker_tv_bound",
]

KINDS = ("rwm", "mala", "mao")

ACCEPTED = 1
REJECTED = 0
LAZY = -1

_SEED_MASK = (1 << 64) - 1


class ChainDivergenceError(RuntimeError):
    """The chain reached a state where the potential is not finite."""

    def __init__(self, iteration: int, message: str):
        super().__init__(f"iteration {iteration}: {message}")
        self.iteration = iteration


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed`` and extra stream keys.

    Distinct key tuples give statistically independent streams, so chains
    running side by side never share one.
    """
    entropy = [int(seed) & _SEED_MASK] + [int(k) & _SEED_MASK for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


@dataclass(frozen=True)
class ProposalKernel:
    kind: str
    h: float
    mode_estimate: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.h > 0:
            raise ValueError(f"step size must be positive, got {self.h}")
        if self.kind == "mao":
            if self.mode_estimate is None:
                raise ValueError("mao kernel needs a mode estimate")
            object.__setattr__(self, "mode_estimate",
                               np.asarray(self.mode_estimate, dtype=float).reshape(-1))

    def mean(self, target: Potential, x: np.ndarray) -> np.ndarray:
        if self.kind == "rwm":
            return x
        if self.kind == "mala":
            return x - self.h * target.grad(x)
        return x - self.h * (x - self.mode_estimate)

    def log_q(self, target: Potential, x: np.ndarray, z: np.ndarray) -> float:
        """Log density of proposing ``z`` from ``x``."""
        diff = z - self.mean(target, x)
        d = x.shape[0]
        return -(diff @ diff) / (4.0 * self.h) - 0.5 * d * math.log(4.0 * math.pi * self.h)


@dataclass(frozen=True)
class SamplerConfig:
    kernel: ProposalKernel
    zeta: float = 0.5
    n_iters: int = 1000
    burn_in: int = 0
    seed: int = 0
    record_stride: int = 1

    def __post_init__(self):
        if not 0.0 <= self.zeta < 1.0:
            raise ValueError(f"laziness zeta must lie in [0, 1), got {self.zeta}")
        if self.n_iters < 1:
            raise ValueError("n_iters must be positive")
        if not 0 <= self.burn_in < self.n_iters:
            raise ValueError("burn_in must satisfy 0 <= burn_in < n_iters")
        if self.record_stride < 1:
            raise ValueError("record_stride must be positive")


@dataclass(frozen=True)
class Trace:
    """Recorded chain after burn-in.

    ``outcomes[t]`` is the result (ACCEPTED, REJECTED or LAZY) of the step
    that produced ``states[t]``. ``accept_flags`` holds one entry per
    non-lazy post-burn-in step, recorded or not.
    """

    states: np.ndarray
    iters: np.ndarray
    outcomes: np.ndarray
    accept_flags: np.ndarray
    log_densities: np.ndarray
    meta: SamplerConfig
    n_steps: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def accept_rate(self) -> float:
        if self.accept_flags.size == 0:
            return math.nan
        return float(self.accept_flags.mean())

    @property
    def lazy_fraction(self) -> float:
        if self.n_steps == 0:
            return math.nan
        return 1.0 - self.accept_flags.size / self.n_steps


def log_accept_ratio(kernel: ProposalKernel, target: Potential, x, z) -> float:
    """``log[pi(z) q(z -> x) / (pi(x) q(x -> z))]`` with ``pi = exp(-f)``."""
    x = target._check(x)
    z = target._check(z)
    with np.errstate(over="ignore", invalid="ignore"):
        fx = target.f(x)
        if not np.isfinite(fx):
            raise ValueError("potential is not finite at the current state")
        fz = target.f(z)
        if not np.isfinite(fz):
            return -math.inf
        lr = fx - fz + kernel.log_q(target, z, x) - kernel.log_q(target, x, z)
    return float(lr) if lr == lr else -math.inf


def _propose(kernel, mean_x, rng, d):
    return mean_x + math.sqrt(2.0 * kernel.h) * rng.standard_normal(d)


def step(config: SamplerConfig, target: Potential, x, rng: np.random.Generator):
    """One transition of the zeta-lazy chain; returns ``(x_next, outcome)``."""
    x = target._check(x)
    if config.zeta > 0.0 and rng.random() < config.zeta:
        return x.copy(), LAZY
    kernel = config.kernel
    z = _propose(kernel, kernel.mean(target, x), rng, target.dim)
    lr = log_accept_ratio(kernel, target, x, z)
    if math.log1p(-rng.random()) < lr:
        return z, ACCEPTED
    return x.copy(), REJECTED


def run_chain(config: SamplerConfig, target: Potential, x0) -> Trace:
    """Run ``n_iters`` transitions from ``x0``.

    Uses the same random draws in the same order as repeated :func:`step`
    calls on ``make_rng(config.seed)``, with the per-state potential and
    proposal mean cached between steps.
    """
    x = np.array(target._check(x0), dtype=float)
    if not np.all(np.isfinite(x)):
        raise ChainDivergenceError(0, "initial state is not finite")
    kernel = config.kernel
    d = target.dim
    h = kernel.h
    sd = math.sqrt(2.0 * h)
    inv4h = 1.0 / (4.0 * h)
    zeta = config.zeta
    f = target.f
    rng = make_rng(config.seed)

    n_post = config.n_iters - config.burn_in
    n_rec = (n_post - 1) // config.record_stride + 1
    states = np.empty((n_rec, d))
    iters = np.empty(n_rec, dtype=np.int64)
    outcomes = np.empty(n_rec, dtype=np.int8)
    logd = np.empty(n_rec)
    flags = np.empty(n_post, dtype=np.int8)
    n_flags = 0
    rec = 0

    with np.errstate(over="ignore", invalid="ignore"):
        fx = f(x)
        if not np.isfinite(fx):
            raise ChainDivergenceError(0, "potential is not finite at the initial state")
        mx = kernel.mean(target, x)
        for t in range(1, config.n_iters + 1):
            if zeta > 0.0 and rng.random() < zeta:
                outcome = LAZY
            else:
                z = mx + sd * rng.standard_normal(d)
                fz = f(z)
                outcome = REJECTED
                if np.isfinite(fz):
                    mz = kernel.mean(target, z)
                    bz = x - mz
                    fw = z - mx
                    lr = fx - fz - (bz @ bz - fw @ fw) * inv4h
                    if math.log1p(-rng.random()) < lr:
                        x, fx, mx = z, fz, mz
                        outcome = ACCEPTED
                else:
                    rng.random()  # keep draw order aligned with step()
            if t > config.burn_in:
                k = t - config.burn_in - 1
                if outcome != LAZY:
                    flags[n_flags] = outcome
                    n_flags += 1
                if k % config.record_stride == 0:
                    states[rec] = x
                    iters[rec] = t
                    outcomes[rec] = outcome
                    logd[rec] = -fx
                    rec += 1
    return Trace(states=states, iters=iters, outcomes=outcomes,
                 accept_flags=flags[:n_flags].copy(), log_densities=logd,
                 meta=config, n_steps=n_post)


def expected_acceptance(kernel: ProposalKernel, target: Potential, x,
                        n: int = 10_000, seed: int = 0) -> float:
    """Monte Carlo estimate of ``E_z[min(1, a(x, z))]`` for one step from ``x``."""
    x = target._check(x)
    rng = make_rng(seed)
    mx = kernel.mean(target, x)
    total = 0.0
    for _ in range(n):
        z = _propose(kernel, mx, rng, target.dim)
        lr = log_accept_ratio(kernel, target, x, z)
        total += math.exp(min(0.0, lr))
    return total / n


def kl_gaussian_shift(mu1, mu2, h: float) -> float:
    """KL divergence between N(mu1, 2hI) and N(mu2, 2hI)."""
    if h <= 0:
        raise ValueError("h must be positive")
    diff = np.asarray(mu1, dtype=float) - np.asarray(mu2, dtype=float)
    return float(diff @ diff) / (4.0 * h)


def pinsker_tv_bound(kl: float) -> float:
    """Total-variation bound ``sqrt(2 KL)``."""
    return math.sqrt(2.0 * kl)
