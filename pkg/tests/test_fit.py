from __future__ import annotations

import math

import pytest

from gibbs_discovery.core.errors import DomainError, UnsupportedPriorError
from gibbs_discovery.core.settings import FitSettings
from gibbs_discovery.estimators import SampleSummary
from gibbs_discovery.fit import (
    fit,
    fit_sigma_only,
    log_likelihood_gg,
    log_likelihood_pd,
    log_likelihood_sigma_only,
)
from gibbs_discovery.gibbs_weights import PriorKind

TINY = SampleSummary.from_counts({1: 2, 2: 1})  # a, b, c, c


def test_pd_likelihood_of_small_partition():
    # EPPF of {a}, {b}, {c, c}: theta (theta+sigma)(theta+2 sigma) (1-sigma) / (theta)_4
    sigma, theta = 0.5, 1.0
    expected = theta * (theta + sigma) * (theta + 2 * sigma) * (1 - sigma) / (1.0 * 2.0 * 3.0 * 4.0)
    assert math.exp(log_likelihood_pd(TINY, sigma, theta)) == pytest.approx(expected)


def test_sigma_only_is_pd_at_zero_theta(aerobic):
    assert log_likelihood_sigma_only(aerobic, 0.6) == pytest.approx(log_likelihood_pd(aerobic, 0.6, 0.0))
    with pytest.raises(DomainError):
        log_likelihood_sigma_only(aerobic, 1.0)


def test_gg_likelihood_is_finite(aerobic):
    assert math.isfinite(log_likelihood_gg(aerobic, 0.684, 334.334))


def test_pd_likelihood_decreases_beyond_maximizer(aerobic):
    values = [log_likelihood_pd(aerobic, 0.669, theta) for theta in (60.0, 100.0, 200.0, 400.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_fit_aerobic_pd(aerobic):
    result = fit(aerobic, PriorKind.PD)
    assert result.converged
    assert result.prior.sigma == pytest.approx(0.669, abs=0.01)
    assert result.prior.theta == pytest.approx(46.241, rel=0.05)
    assert result.evaluations > 0
    assert result.multi_start_spread >= 0.0


def test_fit_is_reproducible_and_thread_independent(aerobic):
    a = fit(aerobic, PriorKind.PD, threads=1)
    b = fit(aerobic, PriorKind.PD, threads=4)
    assert a == b


@pytest.mark.slow
def test_fit_aerobic_gg_agrees_on_sigma(aerobic):
    gg = fit(aerobic, PriorKind.GG)
    pd = fit(aerobic, PriorKind.PD)
    assert gg.prior.sigma == pytest.approx(0.684, abs=0.02)
    assert abs(gg.prior.sigma - pd.prior.sigma) <= 0.02
    assert 334.334 / 2 <= gg.prior.tau <= 334.334 * 2


@pytest.mark.slow
def test_fit_anaerobic_pd(anaerobic):
    # the published counts miss 3 species and 42 observations, so only a loose match is expected
    result = fit(anaerobic, PriorKind.PD)
    assert result.prior.sigma == pytest.approx(0.656, abs=0.05)
    assert 155.408 / 1.5 <= result.prior.theta <= 155.408 * 1.5


def test_sigma_profile_is_nested_in_pd_fit(aerobic):
    profile = fit_sigma_only(aerobic)
    assert profile.prior.theta == 0.0
    assert 0.01 < profile.prior.sigma < 0.99
    # PD contains theta = 0, so its maximum cannot be lower
    assert fit(aerobic, PriorKind.PD).log_likelihood >= profile.log_likelihood - 1e-6


def test_fit_rejects_degenerate_and_generic():
    with pytest.raises(DomainError):
        fit(SampleSummary.from_counts({3: 1}), PriorKind.PD)
    with pytest.raises(UnsupportedPriorError):
        fit(TINY, PriorKind.GENERIC)


def test_small_budget_still_returns_a_prior(aerobic):
    result = fit(aerobic, PriorKind.PD, FitSettings(max_evaluations=5, sigma_grid=(0.5,), location_grid=(1.0,)))
    assert not result.converged
    assert 0.01 <= result.prior.sigma <= 0.99
