from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats

from gibbs_discovery.core.errors import DomainError
from gibbs_discovery.samplers import (
    ExpTiltedStableSampler,
    RngStream,
    sample_exp_tilted_stable,
    sample_poly_tilted_stable,
    sample_positive_stable,
    sample_W,
    sample_Zg,
    sample_Zp,
)


def _within(draws: np.ndarray, expected: float, k: float = 4.0) -> None:
    stderr = float(np.std(draws)) / math.sqrt(draws.size)
    assert abs(float(np.mean(draws)) - expected) <= k * stderr + 1e-12


# ----------------------------- stable family -----------------------------

@pytest.mark.parametrize("sigma", [0.3, 0.5, 0.8])
def test_stable_laplace_transform(sigma):
    s = sample_positive_stable(sigma, RngStream(1), size=100_000)
    for t in (0.5, 1.0, 2.0):
        _within(np.exp(-t * s), math.exp(-(t ** sigma)))


@pytest.mark.parametrize("sigma,b", [(0.5, 0.2), (0.5, 3.0), (0.25, 40.0), (0.8, 1.5)])
def test_exp_tilted_laplace_transform(sigma, b):
    r = sample_exp_tilted_stable(sigma, b, RngStream(2), size=20_000)
    assert r.min() > 0.0
    for t in (0.5, 2.0):
        _within(np.exp(-t * r), math.exp(b ** sigma - (b + t) ** sigma))


def test_exp_tilted_sampler_tracks_acceptance():
    sampler = ExpTiltedStableSampler(0.5, RngStream(3))
    sampler.draws(np.full(500, 5.0))
    assert 0.0 < sampler.acceptance_rate <= 1.0


@pytest.mark.parametrize("sigma,c", [(0.5, 2.0), (0.3, 7.0), (0.5, -0.5)])
def test_poly_tilted_negative_power_moment(sigma, c):
    # E[S^-sigma] under the tilt x^(-c sigma) is (1 + c) Gamma(1 + c sigma) / Gamma(1 + c sigma + sigma)
    s = sample_poly_tilted_stable(sigma, c, RngStream(4), size=20_000)
    expected = (1.0 + c) * math.exp(math.lgamma(1.0 + c * sigma) - math.lgamma(1.0 + c * sigma + sigma))
    _within(s ** (-sigma), expected)


def test_poly_tilted_zero_is_plain_stable():
    a = sample_poly_tilted_stable(0.4, 0.0, RngStream(9), size=10)
    b = sample_positive_stable(0.4, RngStream(9), size=10)
    np.testing.assert_allclose(a, b)


def test_poly_tilted_rejects_small_tilt():
    with pytest.raises(DomainError):
        sample_poly_tilted_stable(0.5, -1.0, RngStream(1))


# ----------------------------- posterior latents -----------------------------

@pytest.mark.parametrize("sigma,theta,n,k", [(0.5, 1.0, 10, 4), (0.3, 5.0, 40, 12), (0.7, -0.2, 25, 15)])
def test_w_mixture_over_zp_is_beta(sigma, theta, n, k):
    stream = RngStream(21)
    zp = sample_Zp(sigma, theta, k, stream, size=5000)
    w = sample_W(n - sigma * k, zp, sigma, stream)
    law = stats.beta(theta + sigma * k, n - sigma * k)
    assert stats.kstest(w, law.cdf).pvalue > 0.01


def test_zg_mean_matches_quadrature():
    sigma, tau, n, k = 0.5, 1.0, 10, 4

    def density(z):
        return z ** (sigma * k - 1.0) * (1.0 - tau / z) ** (n - 1) * math.exp(-(z ** sigma))

    mass, _ = integrate.quad(density, tau, math.inf, limit=200)
    first, _ = integrate.quad(lambda z: z * density(z), tau, math.inf, limit=200)
    draws = sample_Zg(sigma, tau, n, k, RngStream(22), size=20_000)
    assert draws.min() > tau
    _within(draws, first / mass)


def test_zg_single_observation():
    draws = sample_Zg(0.5, 2.0, 1, 1, RngStream(23), size=2000)
    # Y = Z^sigma is a unit exponential shifted to tau^sigma
    _within(draws ** 0.5 - 2.0 ** 0.5, 1.0)


def test_w_rejects_bad_arguments():
    with pytest.raises(DomainError):
        sample_W(0.0, 1.0, 0.5, RngStream(1))
    with pytest.raises(DomainError):
        sample_W(1.0, -1.0, 0.5, RngStream(1))


def test_streams_are_reproducible_and_distinct():
    a = sample_positive_stable(0.5, RngStream(7, 1), size=5)
    b = sample_positive_stable(0.5, RngStream(7, 1), size=5)
    c = sample_positive_stable(0.5, RngStream(7, 2), size=5)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
