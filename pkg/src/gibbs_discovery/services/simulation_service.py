"""
Zeta simulation studies: fit, estimate and score many replicates against the
known population discovery probabilities.

Replicate r draws from RngStream(seed, r + 1); the representative pick, the
representative credible intervals and the ratio study use their own stream ids,
so every report is a function of the seed.
"""

from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from gibbs_discovery.core.errors import ConfigError, GibbsDiscoveryError, ZeroDenominatorError
from gibbs_discovery.core.settings import FitSettings, SamplingSettings, SimulationSettings, require_seed
from gibbs_discovery.data_sim.metrics import approx_ratio, group_by_k, metrics_report, pick_representatives, sse
from gibbs_discovery.data_sim.summary import summarize
from gibbs_discovery.data_sim.zeta import ZetaPopulation, true_discovery_table
from gibbs_discovery.estimators import SampleSummary, bnp_discovery, first_order, good_turing, second_order
from gibbs_discovery.fit import fit
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec
from gibbs_discovery.posterior import discovery_with_interval
from gibbs_discovery.samplers.rng import RngStream

log = logging.getLogger("simulation_service")

REPRESENTATIVE_LS = (0, 1, 5, 10)
METHODS = ("good_turing", "bnp_pd", "first_order", "second_order_pd")
_REPRESENTATIVE_STREAM = 0
_RATIO_STREAM_BASE = 1 << 40
_INTERVAL_STREAM_BASE = 1 << 41
_PROGRESS_EVERY = 50


@dataclass(frozen=True)
class ReplicateResult:
    index: int
    summary: SampleSummary
    truths: Dict[int, float]
    prior: PriorSpec
    estimates: Dict[str, Dict[int, float]]
    sse: Dict[str, float]
    ratio_r12: Optional[float]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "n": self.summary.n,
            "k": self.summary.k,
            "prior": self.prior.to_dict(),
            "sse": dict(self.sse),
            "ratio_r12": self.ratio_r12,
        }


@dataclass(frozen=True)
class SimulationReport:
    settings: SimulationSettings
    replicates: List[ReplicateResult]
    groups: List[List[int]]
    representatives: List[Dict[str, Any]]
    ratio_study: List[Dict[str, Any]] = field(default_factory=list)

    def dominance_share(self, method: str, factor: float = 10.0) -> float:
        """Fraction of replicates where `method` beats Good-Turing SSE by at least `factor`."""
        wins = [factor * r.sse[method] <= r.sse["good_turing"] for r in self.replicates]
        return sum(wins) / len(wins)

    def to_dict(self) -> dict:
        summary = {
            method: {
                "mean_sse": statistics.fmean(r.sse[method] for r in self.replicates),
                "median_sse": statistics.median(r.sse[method] for r in self.replicates),
            }
            for method in METHODS
        }
        for method in METHODS[1:]:
            summary[method]["dominates_good_turing_share"] = self.dominance_share(method)
        ratios = [r.ratio_r12 for r in self.replicates if r.ratio_r12 is not None]
        return {
            "settings": {
                "dist": self.settings.dist,
                "s": self.settings.s,
                "n": self.settings.n,
                "replicates": self.settings.replicates,
                "groups": self.settings.groups,
                "seed": self.settings.seed,
            },
            "summary": summary,
            "mean_ratio_r12": statistics.fmean(ratios) if ratios else None,
            "groups": [
                {
                    "size": len(g),
                    "k_min": self.replicates[g[0]].summary.k,
                    "k_max": self.replicates[g[-1]].summary.k,
                }
                for g in self.groups
                if g
            ],
            "representatives": self.representatives,
            "ratio_study": self.ratio_study,
            "replicates": [r.to_dict() for r in self.replicates],
        }


def _estimate_maps(s: SampleSummary, prior: PriorSpec) -> Dict[str, Dict[int, float]]:
    observed = [0] + list(s.m)
    gt_keys = [0] + [l - 1 for l in s.m if l - 1 >= 1]
    return {
        "good_turing": {l: good_turing(s, l).value for l in gt_keys if l < s.n},
        "bnp_pd": {l: bnp_discovery(s, prior, l).value for l in observed},
        "first_order": {l: first_order(s, prior.sigma, l).value for l in observed},
        "second_order_pd": {l: second_order(s, prior, l).value for l in observed},
    }


def _safe_ratio(maps: Dict[str, Dict[int, float]]) -> Optional[float]:
    try:
        return approx_ratio(maps["bnp_pd"], maps["first_order"], maps["second_order_pd"])
    except ZeroDenominatorError:
        return None


class SimulationService:
    def __init__(
        self,
        settings: SimulationSettings,
        fit_settings: FitSettings,
        *,
        threads: int = 1,
        sampling: Optional[SamplingSettings] = None,
    ) -> None:
        if settings.dist != "zeta":
            raise ConfigError(f"Unknown population {settings.dist!r}; only 'zeta' is available.")
        if settings.replicates < 1 or settings.groups < 1 or settings.n < 2:
            raise ConfigError("Simulation needs n >= 2, at least one replicate and at least one group.")
        if settings.groups > settings.replicates:
            raise ConfigError("There cannot be more groups than replicates.")
        self._settings = settings
        self._fit_settings = fit_settings
        self._sampling = sampling or SamplingSettings()
        self._threads = max(1, threads)
        self._seed = require_seed(settings.seed, "simulate")
        self._population = ZetaPopulation(settings.s)

    def _sample(self, n: int, stream: RngStream):
        raw = self._population.sample(n, stream)
        return summarize(raw), true_discovery_table(raw, self._population)

    def run_replicate(self, index: int) -> ReplicateResult:
        s, truths = self._sample(self._settings.n, RngStream(self._seed, stream_id=index + 1))
        prior = fit(s, PriorKind.PD, self._fit_settings).prior
        maps = _estimate_maps(s, prior)
        errors = {method: sse(values, truths) for method, values in maps.items()}
        return ReplicateResult(index, s, truths, prior, maps, errors, _safe_ratio(maps))

    def run(self) -> SimulationReport:
        cfg = self._settings
        log.info("Simulating %d Zeta(%.3g) samples of size %d", cfg.replicates, cfg.s, cfg.n)
        results: List[ReplicateResult] = []
        with ThreadPoolExecutor(max_workers=self._threads) as pool:
            for result in pool.map(self.run_replicate, range(cfg.replicates)):
                results.append(result)
                if len(results) % _PROGRESS_EVERY == 0 or len(results) == cfg.replicates:
                    log.info("Finished %d/%d replicates", len(results), cfg.replicates)

        groups = group_by_k([r.summary for r in results], cfg.groups)
        picks = pick_representatives(groups, RngStream(self._seed, stream_id=_REPRESENTATIVE_STREAM))
        representatives = [self.describe_representative(results[i]) for i in picks]
        return SimulationReport(cfg, results, groups, representatives, self.ratio_study())

    def describe_representative(self, result: ReplicateResult) -> Dict[str, Any]:
        """Per-l detail for one sample, with both a PD and a GG fit."""
        s = result.summary
        pd_prior = result.prior
        gg_prior: Optional[PriorSpec] = None
        try:
            gg_prior = fit(s, PriorKind.GG, self._fit_settings).prior
        except GibbsDiscoveryError as exc:
            log.warning("GG fit failed for replicate %d: %s", result.index, exc)

        names = ["truth", "good_turing", "bnp_pd", "first_order", "second_order_pd"]
        if gg_prior is not None:
            names += ["bnp_gg", "second_order_gg"]
        columns: Dict[str, Dict[int, float]] = {name: {} for name in names}
        for l in REPRESENTATIVE_LS:
            if l > s.n - 1:
                continue
            columns["truth"][l] = result.truths.get(l, 0.0)
            columns["good_turing"][l] = good_turing(s, l).value
            columns["bnp_pd"][l] = bnp_discovery(s, pd_prior, l).value
            columns["first_order"][l] = first_order(s, pd_prior.sigma, l).value
            columns["second_order_pd"][l] = second_order(s, pd_prior, l).value
            if gg_prior is not None:
                columns["bnp_gg"][l] = bnp_discovery(s, gg_prior, l).value
                columns["second_order_gg"][l] = second_order(s, gg_prior, l).value

        intervals = {"bnp_pd": self._intervals(s, pd_prior, result.index, 0)}
        if gg_prior is not None:
            intervals["bnp_gg"] = self._intervals(s, gg_prior, result.index, 1)

        metrics = {
            name: metrics_report(values, columns["truth"]).to_dict()
            for name, values in columns.items()
            if name != "truth"
        }
        return {
            "index": result.index,
            "n": s.n,
            "k": s.k,
            "pd": pd_prior.to_dict(),
            "gg": gg_prior.to_dict() if gg_prior is not None else None,
            "m": {str(l): s.count(l) for l in REPRESENTATIVE_LS if l >= 1},
            "metrics": metrics,
            "intervals": intervals,
            "level": self._sampling.level,
            "sse": dict(result.sse),
        }

    def _intervals(self, s: SampleSummary, prior: PriorSpec, index: int, slot: int) -> Dict[str, List[float]]:
        """Credible intervals at REPRESENTATIVE_LS; each (replicate, prior, l) has its own stream."""
        out: Dict[str, List[float]] = {}
        for l in REPRESENTATIVE_LS:
            if l > s.n - 1:
                continue
            stream = RngStream(self._seed, stream_id=_INTERVAL_STREAM_BASE + (index << 8) + (l << 1) + slot)
            row = discovery_with_interval(s, prior, l, self._sampling.level, self._sampling.draws, stream)
            out[str(l)] = [row.interval.lo, row.interval.hi]
        return out

    def ratio_study(self) -> List[Dict[str, Any]]:
        """Mean first-over-second order error ratio at each requested sample size."""
        cfg = self._settings
        rows = []
        for size in cfg.ratio_sizes:
            ratios = []
            for j in range(cfg.ratio_replicates):
                stream = RngStream(self._seed, stream_id=_RATIO_STREAM_BASE + (int(size) << 16) + j)
                s, _ = self._sample(int(size), stream)
                if s.k < 2:
                    continue
                prior = fit(s, PriorKind.PD, self._fit_settings, threads=self._threads).prior
                ratio = _safe_ratio(_estimate_maps(s, prior))
                if ratio is not None:
                    ratios.append(ratio)
            mean = statistics.fmean(ratios) if ratios else None
            log.info("Ratio study n=%d: mean r12 %s over %d samples", size, mean, len(ratios))
            rows.append({"n": int(size), "mean_ratio_r12": mean, "samples": len(ratios), "ratios": ratios})
        return rows
