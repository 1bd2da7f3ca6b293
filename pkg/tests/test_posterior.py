from __future__ import annotations

import numpy as np
import pytest
from scipy import stats
from scipy.integrate import trapezoid

from gibbs_discovery.core.errors import DomainError, InfeasibleMomentsError, InvalidDiscoveryIndexError
from gibbs_discovery.estimators import SampleSummary, posterior_moment
from gibbs_discovery.gibbs_weights import PriorSpec, WeightTable, pd_log_h, unit_log_h
from gibbs_discovery.posterior import (
    ExactBeta,
    GGComposite,
    MomentSequence,
    check_moments,
    credible_interval,
    discovery_with_interval,
    moments_to_density,
    posterior_law,
    sample_posterior,
)
from gibbs_discovery.samplers.rng import RngStream

SMALL = SampleSummary.from_counts({1: 4, 2: 2, 3: 1, 5: 1})
TINY = SampleSummary.from_counts({1: 2, 2: 1, 3: 1})  # n = 7, k = 4

AEROBIC_INTERVALS = {0: (0.331, 0.391), 1: (0.095, 0.134), 5: (0.028, 0.052), 10: (0.034, 0.060)}
AEROBIC_GG_INTERVALS = {0: (0.3608, 0.3318, 0.3896), 1: (0.110, 0.0914, 0.130)}


# ----------------------------- laws -----------------------------

def test_pd_laws_are_beta(aerobic, aerobic_pd):
    sigma, theta = aerobic_pd.sigma, aerobic_pd.theta
    assert posterior_law(aerobic, aerobic_pd, 0) == ExactBeta(theta + sigma * 473, 959 - sigma * 473)
    law = posterior_law(aerobic, aerobic_pd, 1)
    assert law.a == pytest.approx((1 - sigma) * 346)
    assert law.a + law.b == pytest.approx(theta + 959)


def test_gg_law_is_composite(aerobic, aerobic_gg):
    law = posterior_law(aerobic, aerobic_gg, 5)
    assert isinstance(law, GGComposite)
    assert (law.n, law.k, law.l, law.m_l) == (959, 473, 5, 9)


def test_law_for_unobserved_frequency(aerobic, aerobic_pd):
    with pytest.raises(InvalidDiscoveryIndexError):
        posterior_law(aerobic, aerobic_pd, 13)


def test_generic_law_is_moment_sequence():
    prior = PriorSpec.generic(0.5, unit_log_h)
    table = WeightTable(prior, seed=2, draws=2000)
    law = posterior_law(SMALL, prior, 1, moments=6, table=table)
    assert isinstance(law, MomentSequence)
    assert len(law.values) == 6
    assert all(a > b for a, b in zip(law.values, law.values[1:]))


@pytest.mark.parametrize("s,l", [(TINY, 0), (TINY, 3), (SMALL, 1)])
def test_generic_interval_matches_pd_beta(s, l):
    # the generic prior with the PD mixing function must reproduce the PD Beta law
    generic = PriorSpec.generic(0.5, pd_log_h(0.5, 1.0))
    law = posterior_law(s, generic, l, table=WeightTable(generic, seed=9))
    check_moments(law.values)
    exact = posterior_law(s, PriorSpec.pd(0.5, 1.0), l)
    lo, hi = credible_interval(law, 0.95)
    assert lo == pytest.approx(stats.beta.ppf(0.025, exact.a, exact.b), abs=0.02)
    assert hi == pytest.approx(stats.beta.ppf(0.975, exact.a, exact.b), abs=0.03)


def test_generic_interval_through_seed():
    generic = PriorSpec.generic(0.5, pd_log_h(0.5, 1.0))
    est = discovery_with_interval(TINY, generic, 0, 0.9, seed=4, moments=8)
    assert est.interval.lo < est.value < est.interval.hi
    assert est == discovery_with_interval(TINY, generic, 0, 0.9, seed=4, moments=8)


# ----------------------------- intervals -----------------------------

def test_aerobic_pd_intervals(aerobic, aerobic_pd):
    for l, (lo, hi) in AEROBIC_INTERVALS.items():
        est = discovery_with_interval(aerobic, aerobic_pd, l, 0.95, rng=RngStream(1, l))
        assert est.interval.lo == pytest.approx(lo, abs=5e-3)
        assert est.interval.hi == pytest.approx(hi, abs=5e-3)
        assert est.interval.lo <= est.value <= est.interval.hi


def test_unobserved_interval_is_degenerate(aerobic, aerobic_pd):
    est = discovery_with_interval(aerobic, aerobic_pd, 13, 0.95, rng=RngStream(1))
    assert (est.value, est.interval.lo, est.interval.hi) == (0.0, 0.0, 0.0)


def test_beta_interval_is_exact():
    lo, hi = credible_interval(ExactBeta(3.0, 7.0), 0.9)
    assert lo == pytest.approx(stats.beta.ppf(0.05, 3, 7))
    assert hi == pytest.approx(stats.beta.ppf(0.95, 3, 7))


def test_sampled_interval_needs_stream():
    law = GGComposite(sigma=0.5, tau=1.0, n=16, k=8, l=0, m_l=0)
    with pytest.raises(DomainError):
        credible_interval(law, 0.95)
    with pytest.raises(DomainError):
        credible_interval(ExactBeta(1.0, 1.0), 1.0)


@pytest.mark.slow
def test_aerobic_gg_intervals(aerobic, aerobic_gg):
    table = WeightTable(aerobic_gg)
    for l in (0, 1, 5, 10):
        est = discovery_with_interval(aerobic, aerobic_gg, l, 0.95, draws=5000, rng=RngStream(1, l), table=table)
        assert est.interval.lo < est.value < est.interval.hi
        assert est.interval.hi - est.interval.lo < 0.1
        if l in AEROBIC_GG_INTERVALS:
            value, lo, hi = AEROBIC_GG_INTERVALS[l]
            assert est.value == pytest.approx(value, abs=1e-3)
            assert est.interval.lo == pytest.approx(lo, abs=5e-3)
            assert est.interval.hi == pytest.approx(hi, abs=5e-3)


@pytest.mark.parametrize(
    "law",
    [
        ExactBeta(3.0, 7.0),
        MomentSequence(tuple(float(stats.beta(3.0, 7.0).moment(r)) for r in range(1, 11))),
        GGComposite(sigma=0.5, tau=1.0, n=16, k=8, l=1, m_l=4),
    ],
)
def test_intervals_are_nested_in_level(law):
    bounds = [credible_interval(law, level, 4000, RngStream(2)) for level in (0.5, 0.8, 0.95)]
    for (lo, hi), (wider_lo, wider_hi) in zip(bounds, bounds[1:]):
        assert wider_lo <= lo < hi <= wider_hi


# ----------------------------- sampling -----------------------------

def test_gg_draws_match_posterior_moments():
    prior = PriorSpec.gg(0.5, 1.0)
    table = WeightTable(prior)
    for l in (0, 2):
        law = posterior_law(SMALL, prior, l, table=table)
        draws = sample_posterior(law, 20_000, RngStream(5, l))
        assert draws.min() >= 0.0 and draws.max() <= 1.0
        mean = posterior_moment(SMALL, prior, l, 1, table=table)
        second = posterior_moment(SMALL, prior, l, 2, table=table)
        stderr = np.sqrt((second - mean ** 2) / draws.size)
        assert abs(draws.mean() - mean) <= 4 * stderr


def test_beta_draws_are_reproducible():
    law = ExactBeta(2.0, 5.0)
    np.testing.assert_array_equal(sample_posterior(law, 10, RngStream(3)), sample_posterior(law, 10, RngStream(3)))


# ----------------------------- moment inversion -----------------------------

def _beta_moments(a: float, b: float, count: int):
    return [float(stats.beta(a, b).moment(r)) for r in range(1, count + 1)]


def test_density_reproduces_moments_before_clipping():
    moments = _beta_moments(3.0, 5.0, 10)
    density = moments_to_density(moments)
    for r, m in enumerate(moments, start=1):
        integral = (density.polynomial * np.polynomial.Polynomial([0.0] * r + [1.0])).integ(lbnd=0.0)(1.0)
        assert integral == pytest.approx(m, abs=1e-10)


def test_density_quantiles_track_beta():
    density = moments_to_density(_beta_moments(4.0, 6.0, 10))
    law = stats.beta(4.0, 6.0)
    for p in (0.05, 0.5, 0.95):
        assert float(density.quantile(p)) == pytest.approx(law.ppf(p), abs=0.01)
    assert float(density.cdf(1.0)) == pytest.approx(1.0)


def test_moment_interval_matches_beta_interval():
    moments = MomentSequence(tuple(_beta_moments(5.0, 9.0, 10)))
    lo, hi = credible_interval(moments, 0.9)
    assert lo == pytest.approx(stats.beta.ppf(0.05, 5, 9), abs=0.01)
    assert hi == pytest.approx(stats.beta.ppf(0.95, 5, 9), abs=0.01)


def test_density_samples():
    density = moments_to_density(_beta_moments(2.0, 3.0, 10))
    draws = density.sample(5000, RngStream(8))
    assert stats.kstest(draws, stats.beta(2.0, 3.0).cdf).pvalue > 0.01


def test_infeasible_moments_rejected():
    with pytest.raises(InfeasibleMomentsError):
        check_moments([0.5, 0.1, 0.3])
    with pytest.raises(DomainError):
        moments_to_density([0.5])


def _l1_distance(density, law) -> float:
    grid = np.linspace(0.0, 1.0, 4001)
    return float(trapezoid(np.abs(density.pdf(grid) - law.pdf(grid)), grid))


def test_density_is_close_in_l1():
    assert _l1_distance(moments_to_density(_beta_moments(2.0, 3.0, 10)), stats.beta(2.0, 3.0)) < 0.02
    assert _l1_distance(moments_to_density([1.0 / (r + 1) for r in range(1, 11)]), stats.uniform()) < 0.02


def test_point_mass_density_is_centred():
    density = moments_to_density([0.5 ** r for r in range(1, 11)])
    assert 0.45 <= float(density.quantile(0.5)) <= 0.55
