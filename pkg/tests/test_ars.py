from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from gibbs_discovery.core.errors import SamplerError
from gibbs_discovery.samplers.ars import AdaptiveRejectionSampler, LogConcaveTarget, default_abscissae, sample_log_concave
from gibbs_discovery.samplers.rng import RngStream


def _normal() -> LogConcaveTarget:
    return LogConcaveTarget(log_density=lambda x: -0.5 * x * x, derivative=lambda x: -x)


def test_normal_draws_pass_ks():
    draws = sample_log_concave(_normal(), RngStream(11), size=5000, abscissae=[-1.0, 0.5, 2.0])
    assert stats.kstest(draws, "norm").pvalue > 0.01


def test_gamma_on_half_line_passes_ks():
    target = LogConcaveTarget(
        log_density=lambda x: 2.0 * math.log(x) - x,
        derivative=lambda x: 2.0 / x - 1.0,
        lower=0.0,
    )
    draws = sample_log_concave(target, RngStream(12), size=5000, abscissae=[1.0, 2.0, 4.0])
    assert draws.min() > 0.0
    assert stats.kstest(draws, stats.gamma(3.0).cdf).pvalue > 0.01


def test_brackets_one_sided_start():
    # every start lies right of the mode; the sampler must extend leftwards
    sampler = AdaptiveRejectionSampler(_normal(), [3.0, 4.0])
    assert sampler.envelope.x[0] < 0.0
    draws = sampler.draws(2000, RngStream(13))
    assert abs(float(np.mean(draws))) < 0.1


def test_hull_adapts_and_acceptance_is_high():
    sampler = AdaptiveRejectionSampler(_normal(), [-1.0, 1.0])
    start = len(sampler.envelope.x)
    sampler.draws(3000, RngStream(14))
    assert len(sampler.envelope.x) > start
    assert sampler.acceptance_rate > 0.9


def test_same_stream_same_draws():
    a = sample_log_concave(_normal(), RngStream(5, 3), size=500, abscissae=[-1.0, 1.0])
    b = sample_log_concave(_normal(), RngStream(5, 3), size=500, abscissae=[-1.0, 1.0])
    np.testing.assert_array_equal(a, b)


def test_convex_target_is_rejected():
    convex = LogConcaveTarget(log_density=lambda x: x * x, derivative=lambda x: 2.0 * x, lower=-1.0, upper=1.0)
    with pytest.raises(SamplerError):
        AdaptiveRejectionSampler(convex, [-0.5, 0.0, 0.5])


def test_no_abscissa_inside_support():
    target = LogConcaveTarget(log_density=lambda x: -x, derivative=lambda x: -1.0, lower=0.0)
    with pytest.raises(SamplerError):
        AdaptiveRejectionSampler(target, [-2.0, -1.0])


# ----------------------------- default abscissae -----------------------------

def test_default_abscissae_surround_the_mode():
    shifted = LogConcaveTarget(log_density=lambda x: -0.5 * (x - 40.0) ** 2, derivative=lambda x: 40.0 - x)
    points = default_abscissae(shifted)
    assert points[0] < 40.0 < points[-1]
    draws = sample_log_concave(shifted, RngStream(15), size=3000)
    assert stats.kstest(draws, stats.norm(40.0).cdf).pvalue > 0.01


def test_default_abscissae_on_half_line():
    gamma = LogConcaveTarget(log_density=lambda x: 2.0 * math.log(x) - x, derivative=lambda x: 2.0 / x - 1.0, lower=0.0)
    assert all(p > 0.0 for p in default_abscissae(gamma))
    draws = sample_log_concave(gamma, RngStream(16), size=3000)
    assert stats.kstest(draws, stats.gamma(3.0).cdf).pvalue > 0.01
    exponential = LogConcaveTarget(log_density=lambda x: -x, derivative=lambda x: -1.0, lower=0.0)
    draws = sample_log_concave(exponential, RngStream(17), size=3000)
    assert stats.kstest(draws, stats.expon().cdf).pvalue > 0.01


def test_default_abscissae_on_bounded_support():
    target = LogConcaveTarget(log_density=lambda x: 3.0 * math.log(x), derivative=lambda x: 3.0 / x, lower=0.0, upper=1.0)
    assert default_abscissae(target) == [0.25, 0.5, 0.75]
    assert 0.0 < sample_log_concave(target, RngStream(18)) < 1.0
