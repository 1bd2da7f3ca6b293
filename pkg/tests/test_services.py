from __future__ import annotations

import logging

import pytest
from scipy import stats

from gibbs_discovery.core.errors import ConfigError, DataValidationError
from gibbs_discovery.core.settings import FitSettings, SamplingSettings, SimulationSettings, load_settings
from gibbs_discovery.estimators import EstimatorMethod, SampleSummary
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec, pd_log_h
from gibbs_discovery.services import DiscoveryService, SimulationService

QUICK_FIT = FitSettings(sigma_grid=(0.3, 0.7), location_grid=(1.0, 10.0))
QUICK_SAMPLING = SamplingSettings(draws=500)
TINY = SampleSummary.from_counts({1: 2, 2: 1, 3: 1})


@pytest.fixture()
def service():
    return DiscoveryService(load_settings({"GIBBS_DISCOVERY_THREADS": "1"}, sampling={"draws": 2000}))


def _small_simulation(**overrides) -> SimulationSettings:
    values = dict(s=1.5, n=200, replicates=4, groups=2, seed=11, ratio_sizes=(100,), ratio_replicates=2)
    values.update(overrides)
    return SimulationSettings(**values)


# ----------------------------- discovery service -----------------------------

def test_load_and_check(service, data_dir, aerobic):
    s, report = service.load(data_dir / "aerobic.csv")
    assert s == aerobic
    assert report.passed
    with pytest.raises(DataValidationError) as info:
        service.checked(data_dir / "anaerobic.csv")
    assert info.value.report.n_residual == 42


def test_force_accepts_inconsistent_data(data_dir, caplog):
    forced = DiscoveryService(load_settings({}), force=True)
    with caplog.at_level(logging.WARNING, logger="discovery_service"):
        s = forced.checked(data_dir / "anaerobic.csv")
    assert (s.n, s.k) == (969, 631)
    assert "--force" in caplog.text


def test_load_raw_sample(service, tmp_path):
    path = tmp_path / "reads.txt"
    path.write_text("x\ny\nx\nz\n", encoding="utf-8")
    s = service.checked(path)
    assert (s.n, s.k, s.m) == (4, 3, {1: 2, 2: 1})


def test_resolve_fixed_prior(service, aerobic):
    prior, result = service.resolve_prior(aerobic, PriorKind.PD, do_fit=False, sigma=0.669, theta=46.241)
    assert prior == PriorSpec.pd(0.669, 46.241)
    assert result is None
    prior, _ = service.resolve_prior(aerobic, PriorKind.GG, do_fit=False, sigma=0.684, tau=334.334)
    assert prior.kind is PriorKind.GG


@pytest.mark.parametrize(
    "kind,params",
    [(PriorKind.PD, {}), (PriorKind.PD, {"sigma": 0.5}), (PriorKind.GG, {"sigma": 0.5, "theta": 1.0})],
)
def test_resolve_prior_needs_parameters(service, aerobic, kind, params):
    with pytest.raises(ConfigError):
        service.resolve_prior(aerobic, kind, do_fit=False, **params)


def test_estimate_rows(service, aerobic, aerobic_pd):
    rows = service.estimate(aerobic, aerobic_pd, [0, 1])
    assert [(r.l, r.method) for r in rows] == [
        (0, EstimatorMethod.BNP),
        (1, EstimatorMethod.BNP),
        (0, EstimatorMethod.GOOD_TURING),
        (1, EstimatorMethod.GOOD_TURING),
    ]
    assert rows[0].value == pytest.approx(0.361, abs=5e-4)
    assert rows[2].value == pytest.approx(346 / 959)


def test_intervals_need_seed_and_repeat(service, aerobic, aerobic_pd):
    with pytest.raises(ConfigError):
        service.intervals(aerobic, aerobic_pd, [0], seed=None)
    first = service.intervals(aerobic, aerobic_pd, [0, 1], seed=3)
    second = service.intervals(aerobic, aerobic_pd, [0, 1], seed=3)
    assert [r.to_dict() for r in first] == [r.to_dict() for r in second]
    assert first[0].interval.lo == pytest.approx(0.331, abs=5e-3)


def test_sampling_settings_reach_generic_priors():
    generic = PriorSpec.generic(0.5, pd_log_h(0.5, 1.0))
    service = DiscoveryService(
        load_settings({}, sampling={"seed": 5, "weight_draws": 20_000, "moments": 6, "level": 0.9})
    )
    rows = service.estimate(TINY, generic, [0])
    assert rows[0].value == pytest.approx(3.0 / 8.0, abs=0.02)
    row = service.intervals(TINY, generic, [0], seed=5)[0]
    assert row.interval.level == 0.9
    assert row.interval.lo == pytest.approx(stats.beta.ppf(0.05, 3.0, 5.0), abs=0.02)
    assert row.interval.hi == pytest.approx(stats.beta.ppf(0.95, 3.0, 5.0), abs=0.03)
    with pytest.raises(ConfigError):
        DiscoveryService(load_settings({})).estimate(TINY, generic, [0])


def test_approximate_orders(aerobic, aerobic_pd):
    first = DiscoveryService.approximate(aerobic, aerobic_pd, [0, 1], 1)
    second = DiscoveryService.approximate(aerobic, aerobic_pd, [0, 1], 2)
    assert first[0].value == pytest.approx(0.669 * 473 / 959)
    assert second[1].value < first[1].value
    with pytest.raises(ConfigError):
        DiscoveryService.approximate(aerobic, aerobic_pd, [0], 3)


def test_fit_report(service, aerobic):
    report = service.fit(aerobic, PriorKind.PD)
    assert set(report) == {"fit", "sigma_profile"}
    assert report["fit"]["prior"]["kind"] == "pd"
    assert report["sigma_profile"]["prior"]["theta"] == 0.0


# ----------------------------- simulation service -----------------------------

@pytest.mark.parametrize(
    "overrides",
    [{"dist": "geometric"}, {"groups": 5}, {"seed": None}, {"replicates": 0}, {"n": 1}],
)
def test_simulation_config_errors(overrides):
    with pytest.raises(ConfigError):
        SimulationService(_small_simulation(**overrides), QUICK_FIT)


def test_small_simulation_report():
    report = SimulationService(_small_simulation(), QUICK_FIT, sampling=QUICK_SAMPLING).run()
    out = report.to_dict()
    assert len(report.replicates) == 4
    assert sum(g["size"] for g in out["groups"]) == 4
    assert len(out["representatives"]) == 2
    assert all(g["k_min"] <= g["k_max"] for g in out["groups"])
    assert out["groups"][0]["k_max"] <= out["groups"][1]["k_min"]
    for method in ("bnp_pd", "first_order", "second_order_pd"):
        assert 0.0 <= out["summary"][method]["dominates_good_turing_share"] <= 1.0
    for replicate in report.replicates:
        assert sum(replicate.truths.values()) == pytest.approx(1.0, abs=1e-10)
        assert replicate.sse["bnp_pd"] >= 0.0
    assert out["ratio_study"][0]["n"] == 100
    assert out["ratio_study"][0]["samples"] <= 2


def test_simulation_is_reproducible_across_threads():
    settings = _small_simulation(replicates=3, groups=1, ratio_sizes=())
    one = SimulationService(settings, QUICK_FIT, threads=1, sampling=QUICK_SAMPLING).run().to_dict()
    two = SimulationService(settings, QUICK_FIT, threads=3, sampling=QUICK_SAMPLING).run().to_dict()
    assert one == two


def test_replicates_depend_only_on_their_index():
    first = SimulationService(_small_simulation(), QUICK_FIT).run_replicate(2)
    second = SimulationService(_small_simulation(replicates=10, groups=3), QUICK_FIT).run_replicate(2)
    assert first.summary == second.summary
    assert first.truths == second.truths


def test_representatives_carry_credible_intervals():
    sim = SimulationService(_small_simulation(replicates=2, groups=1, ratio_sizes=()), QUICK_FIT, sampling=QUICK_SAMPLING)
    detail = sim.describe_representative(sim.run_replicate(0))
    assert detail["level"] == 0.95
    pd_intervals = detail["intervals"]["bnp_pd"]
    assert set(pd_intervals) == {"0", "1", "5", "10"}
    for l, (lo, hi) in pd_intervals.items():
        assert 0.0 <= lo <= hi <= 1.0
        assert lo <= detail["metrics"]["bnp_pd"]["per_l"][l]["estimate"] <= hi
    if detail["gg"] is not None:
        assert set(detail["intervals"]["bnp_gg"]) == set(pd_intervals)
    again = sim.describe_representative(sim.run_replicate(0))
    assert again["intervals"] == detail["intervals"]


@pytest.mark.slow
def test_bnp_dominates_good_turing_on_zeta_samples():
    settings = SimulationSettings(s=1.1, n=1000, replicates=100, groups=5, seed=7)
    report = SimulationService(settings, FitSettings(), sampling=QUICK_SAMPLING).run()
    assert report.dominance_share("bnp_pd") >= 0.9


@pytest.mark.slow
def test_first_order_error_ratio_grows_with_n():
    settings = SimulationSettings(s=1.1, n=1000, replicates=1, groups=1, seed=7, ratio_sizes=(100, 1000, 10_000))
    rows = SimulationService(settings, FitSettings()).ratio_study()
    means = [row["mean_ratio_r12"] for row in rows]
    assert all(m is not None for m in means)
    assert means[0] < means[1] < means[2]
    assert means[0] < 1.0
