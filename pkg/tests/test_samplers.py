import math

import numpy as np
import pytest
from scipy.stats import norm

from maosampler.potentials import Potential, gaussian, pi1, pi2, sample_ball
from maosampler.samplers import (
    ACCEPTED,
    LAZY,
    REJECTED,
    ChainDivergenceError,
    ProposalKernel,
    SamplerConfig,
    expected_acceptance,
    kl_gaussian_shift,
    log_accept_ratio,
    make_rng,
    pinsker_tv_bound,
    run_chain,
    step,
)
from maosampler.schedules import step_size


def kernel_for(kind, h, dim, mode=None):
    return ProposalKernel(kind, h, np.zeros(dim) if mode is None and kind == "mao" else mode)


def oracle_mean(kind, target, x, h, x_tilde):
    if kind == "rwm":
        return x
    if kind == "mala":
        return x - h * target.gradient(x)
    return x - h * (x - x_tilde)


def oracle_log_q(kind, target, x, z, h, x_tilde):
    return float(norm.logpdf(z, oracle_mean(kind, target, x, h, x_tilde),
                             math.sqrt(2 * h)).sum())


class TestKernel:
    def test_mao_needs_mode(self):
        with pytest.raises(ValueError):
            ProposalKernel("mao", 0.1)

    @pytest.mark.parametrize("kind,h", [("hmc", 0.1), ("rwm", 0.0), ("mala", -1.0)])
    def test_invalid(self, kind, h):
        with pytest.raises(ValueError):
            ProposalKernel(kind, h)

    @pytest.mark.parametrize("kind", ["rwm", "mala", "mao"])
    def test_log_q_matches_scipy(self, kind, rng):
        t = pi1(3)
        k = kernel_for(kind, 0.2, 3, mode=np.array([0.1, -0.2, 0.3]))
        x, z = rng.normal(size=3), rng.normal(size=3)
        assert k.log_q(t, x, z) == pytest.approx(
            oracle_log_q(kind, t, x, z, 0.2, k.mode_estimate), abs=1e-12)


class TestAcceptRatio:
    @pytest.mark.parametrize("kind", ["rwm", "mala", "mao"])
    def test_identical_points(self, kind):
        t = pi1(2)
        x = np.array([0.3, -1.2])
        assert log_accept_ratio(kernel_for(kind, 0.3, 2), t, x, x) == 0.0

    def test_rwm_symmetric(self):
        lr = log_accept_ratio(ProposalKernel("rwm", 0.37), gaussian(2, 1.0), [1.0, 0.0], [0.0, 0.0])
        assert lr == pytest.approx(0.5, abs=1e-15)

    def test_mao_hand_value(self):
        k = ProposalKernel("mao", 0.5, np.zeros(2))
        lr = log_accept_ratio(k, pi1(2), [1.0, 0.0], [0.5, 0.0])
        assert lr == pytest.approx(0.328125, abs=1e-14)

    @pytest.mark.parametrize("kind", ["rwm", "mala", "mao"])
    def test_matches_independent_formula(self, kind, rng):
        t = pi2(4)
        k = kernel_for(kind, 0.07, 4, mode=np.full(4, 0.05))
        for _ in range(50):
            x, z = rng.normal(size=4), rng.normal(size=4)
            expect = (t.value(x) - t.value(z)
                      + oracle_log_q(kind, t, z, x, 0.07, k.mode_estimate)
                      - oracle_log_q(kind, t, x, z, 0.07, k.mode_estimate))
            assert log_accept_ratio(k, t, x, z) == pytest.approx(expect, abs=1e-9)

    def test_non_finite_current_state_raises(self):
        t = Potential(1, lambda x: math.inf if x[0] > 1 else 0.0, np.zeros_like, np.zeros(1),
                      alpha=2.0, m=1.0, K1=1.0, K2=1.0, gamma=2.0)
        with pytest.raises(ValueError):
            log_accept_ratio(ProposalKernel("rwm", 0.1), t, [2.0], [0.0])
        assert log_accept_ratio(ProposalKernel("rwm", 0.1), t, [0.0], [2.0]) == -math.inf


def detailed_balance_residual(kind, target, n_pairs, seed, h=0.1):
    """Max violation of the log-space detailed-balance identity over random pairs."""
    rng = np.random.default_rng(seed)
    d = target.dim
    k = kernel_for(kind, h, d, mode=rng.normal(scale=0.1, size=d))
    xs = sample_ball(rng, n_pairs, d, 2.0)
    worst = 0.0
    for x in xs:
        z = k.mean(target, x) + math.sqrt(2 * h) * rng.standard_normal(d)
        lhs = -target.value(x) + k.log_q(target, x, z) + min(0.0, log_accept_ratio(k, target, x, z))
        rhs = -target.value(z) + k.log_q(target, z, x) + min(0.0, log_accept_ratio(k, target, z, x))
        worst = max(worst, abs(lhs - rhs))
    return worst


@pytest.mark.parametrize("kind", ["rwm", "mala", "mao"])
@pytest.mark.parametrize("dim", [1, 2, 8])
def test_detailed_balance(kind, dim):
    assert detailed_balance_residual(kind, pi1(dim), 500, seed=dim) <= 1e-10


def test_mao_equals_mala_on_standard_gaussian(rng):
    t = gaussian(3, 1.0)
    h = 0.3
    mala = ProposalKernel("mala", h)
    mao = ProposalKernel("mao", h, t.mode)
    for _ in range(100):
        x, z = rng.normal(size=3) * 2, rng.normal(size=3) * 2
        np.testing.assert_allclose(mao.mean(t, x), mala.mean(t, x), atol=1e-12)
        assert log_accept_ratio(mao, t, x, z) == pytest.approx(
            log_accept_ratio(mala, t, x, z), abs=1e-12)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(zeta=1.0), dict(zeta=-0.1), dict(n_iters=0),
                                    dict(burn_in=10, n_iters=10), dict(record_stride=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SamplerConfig(ProposalKernel("rwm", 0.1), **kw)


class TestStep:
    def test_determinism(self):
        cfg = SamplerConfig(ProposalKernel("mala", 0.2), zeta=0.3, seed=5)
        x = np.array([0.4, -0.1])
        a = step(cfg, pi1(2), x, make_rng(5))
        b = step(cfg, pi1(2), x, make_rng(5))
        assert a[1] == b[1]
        assert a[0].tobytes() == b[0].tobytes()

    def test_small_step_always_accepts(self):
        cfg = SamplerConfig(ProposalKernel("mao", 1e-6, np.zeros(2)), zeta=0.0,
                            n_iters=10_000, seed=3)
        tr = run_chain(cfg, pi1(2), [0.5, 0.5])
        assert tr.accept_rate >= 0.99

    def test_outcome_codes(self):
        cfg = SamplerConfig(ProposalKernel("rwm", 0.5), zeta=0.5)
        rng = make_rng(0)
        seen = {step(cfg, pi1(1), np.array([0.0]), rng)[1] for _ in range(200)}
        assert seen == {ACCEPTED, REJECTED, LAZY}

    def test_lazy_returns_copy(self):
        cfg = SamplerConfig(ProposalKernel("rwm", 0.5), zeta=0.999)
        x = np.array([1.0])
        out, tag = step(cfg, pi1(1), x, make_rng(0))
        assert tag == LAZY
        assert out is not x and out[0] == 1.0


class TestRunChain:
    def test_ten_states(self):
        cfg = SamplerConfig(ProposalKernel("rwm", 0.1), zeta=0.0, n_iters=10, burn_in=0)
        tr = run_chain(cfg, pi1(2), [0.0, 0.0])
        assert tr.states.shape == (10, 2)
        np.testing.assert_array_equal(tr.iters, np.arange(1, 11))

    def test_burn_in_and_stride(self):
        cfg = SamplerConfig(ProposalKernel("rwm", 0.1), zeta=0.0, n_iters=100, burn_in=20,
                            record_stride=7)
        tr = run_chain(cfg, pi1(2), [0.0, 0.0])
        np.testing.assert_array_equal(tr.iters, np.arange(21, 101, 7))
        assert tr.accept_flags.size == 80

    @pytest.mark.parametrize("kind", ["rwm", "mala", "mao"])
    def test_matches_repeated_step(self, kind):
        t = pi2(3)
        cfg = SamplerConfig(kernel_for(kind, 0.15, 3), zeta=0.25, n_iters=500, seed=11)
        tr = run_chain(cfg, t, [1.0, -1.0, 0.5])
        rng = make_rng(11)
        x = np.array([1.0, -1.0, 0.5])
        for i in range(500):
            x, tag = step(cfg, t, x, rng)
            assert tr.states[i].tobytes() == x.tobytes()
            assert tr.outcomes[i] == tag
            assert tr.log_densities[i] == -t.value(x)

    def test_seed_determinism(self):
        cfg = SamplerConfig(ProposalKernel("mala", 0.1), zeta=0.5, n_iters=2000, seed=9)
        a = run_chain(cfg, pi1(4), np.ones(4))
        b = run_chain(cfg, pi1(4), np.ones(4))
        assert a.states.tobytes() == b.states.tobytes()
        assert a.accept_flags.tobytes() == b.accept_flags.tobytes()

    def test_different_seeds_differ(self):
        base = dict(kernel=ProposalKernel("rwm", 0.1), n_iters=200)
        a = run_chain(SamplerConfig(seed=1, **base), pi1(2), np.zeros(2))
        b = run_chain(SamplerConfig(seed=2, **base), pi1(2), np.zeros(2))
        assert a.states.tobytes() != b.states.tobytes()

    def test_lazy_fraction(self):
        cfg = SamplerConfig(ProposalKernel("mao", 0.1, np.zeros(2)), zeta=0.5,
                            n_iters=100_000, seed=4)
        tr = run_chain(cfg, pi1(2), np.zeros(2))
        assert tr.lazy_fraction == pytest.approx(0.5, abs=0.01)
        assert np.mean(tr.outcomes == LAZY) == pytest.approx(0.5, abs=0.01)
        assert tr.accept_flags.size + np.sum(tr.outcomes == LAZY) == 100_000

    def test_accept_rate_excludes_lazy(self):
        cfg = SamplerConfig(ProposalKernel("mao", 1e-8, np.zeros(2)), zeta=0.5,
                            n_iters=2000, seed=4)
        tr = run_chain(cfg, pi1(2), np.zeros(2))
        assert tr.accept_rate == 1.0

    def test_non_finite_start(self):
        cfg = SamplerConfig(ProposalKernel("rwm", 0.1))
        with pytest.raises(ChainDivergenceError) as info:
            run_chain(cfg, pi1(2), [np.nan, 0.0])
        assert info.value.iteration == 0

    def test_stationary_moments_gaussian(self):
        t = gaussian(2, 2.0)
        cfg = SamplerConfig(ProposalKernel("mala", 0.2), zeta=0.0, n_iters=60_000,
                            burn_in=1000, seed=2)
        tr = run_chain(cfg, t, np.zeros(2))
        assert np.var(tr.states[:, 0]) == pytest.approx(0.5, rel=0.05)
        assert abs(np.mean(tr.states[:, 1])) < 0.03


class TestKL:
    def test_identical(self):
        assert kl_gaussian_shift([1.0, 2.0], [1.0, 2.0], 0.3) == 0.0

    def test_unit_shift(self):
        assert kl_gaussian_shift([1.0, 0.0], [0.0, 0.0], 0.5) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("h", [0.01, 0.5, 3.0])
    def test_overlap_threshold(self, h):
        kl = kl_gaussian_shift([math.sqrt(h / 2)], [0.0], h)
        assert kl == pytest.approx(1 / 8, rel=1e-14)
        assert pinsker_tv_bound(kl) == pytest.approx(0.5, rel=1e-14)

    def test_pinsker_dominates_exact_tv(self):
        h, shift = 0.2, 0.3
        exact = 2 * norm.cdf(shift / (2 * math.sqrt(2 * h))) - 1
        assert exact <= pinsker_tv_bound(kl_gaussian_shift([shift], [0.0], h))


def test_tail_contrast():
    t = pi1(2)
    x = np.array([10.0, 0.0])
    mala = expected_acceptance(ProposalKernel("mala", 0.05), t, x, 10_000, seed=0)
    mao = expected_acceptance(ProposalKernel("mao", 0.05, np.zeros(2)), t, x, 10_000, seed=0)
    assert mala < 0.01
    assert mao > mala


def test_pinned_protocol_step():
    sched = step_size(0.5, 10.0, 2, 4.0, 4.0)
    assert sched.h == pytest.approx(0.25427, abs=1e-5)


def _pinned_chain(kind, dim, seed=1):
    t = pi1(dim, 1.0)
    h = step_size(0.5, 10.0, dim, t.alpha, t.gamma).h
    cfg = SamplerConfig(ProposalKernel(kind, h, t.mode if kind == "mao" else None), zeta=0.0,
                        n_iters=100_000, burn_in=10_000, seed=seed)
    return run_chain(cfg, t, np.full(dim, 0.5))


def test_mala_reference_acceptance_d2():
    assert _pinned_chain("mala", 2).accept_rate == pytest.approx(0.827, abs=0.05)


@pytest.mark.xfail(strict=True, reason="MAO acceptance is about 0.70 under the pinned step "
                                       "rule, outside 0.632 +/- 0.05")
def test_mao_reference_acceptance_d2():
    assert _pinned_chain("mao", 2).accept_rate == pytest.approx(0.632, abs=0.05)
