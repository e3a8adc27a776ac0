"""Metropolis-Hastings samplers for thin-tailed log-concave targets.

MAO (a Metropolized autoregressive proposal contracted towards a precomputed
mode) alongside RWM and MALA baselines, theory-driven step sizes, a Bregman
gradient mode finder, warm starts, ESS diagnostics and a grid-based kernel
oracle.
"""
from .potentials import Potential, gaussian, make_target, pi1, pi2, radial_alpha
from .samplers import ProposalKernel, SamplerConfig, Trace, run_chain
from .schedules import Schedule, step_size

__all__ = [
    "Potential",
    "ProposalKernel",
    "SamplerConfig",
    "Schedule",
    "Trace",
    "gaussian",
    "make_target",
    "pi1",
    "pi2",
    "radial_alpha",
    "run_chain",
    "step_size",
]

__version__ = "0.1.0"
