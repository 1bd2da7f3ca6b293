from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from gibbs_discovery.core.errors import ConfigError, DataValidationError
from gibbs_discovery.core.settings import AppSettings, require_seed
from gibbs_discovery.data_sim.io import looks_like_frequency_counts, read_frequency_counts, read_raw_sample
from gibbs_discovery.data_sim.summary import ValidationReport, summarize, validate
from gibbs_discovery.estimators import (
    DiscoveryEstimate,
    SampleSummary,
    bnp_discovery,
    first_order,
    good_turing,
    second_order,
)
from gibbs_discovery.fit import FitResult, fit, fit_sigma_only
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec, WeightTable
from gibbs_discovery.posterior import discovery_with_interval
from gibbs_discovery.samplers.rng import RngStream

log = logging.getLogger("discovery_service")


class DiscoveryService:
    """Fit, estimate, interval and approximation workflows on one observed sample."""

    def __init__(self, settings: AppSettings, *, force: bool = False) -> None:
        self._settings = settings
        self._force = force

    # ----------------------------- data -----------------------------

    def load(self, path: Path) -> Tuple[SampleSummary, ValidationReport]:
        path = Path(path)
        if looks_like_frequency_counts(path):
            s = read_frequency_counts(path)
        else:
            s = summarize(read_raw_sample(path))
        report = validate(s)
        log.info("Loaded %s: n=%d k=%d (%s)", path.name, s.n, s.k, "valid" if report.passed else "inconsistent")
        return s, report

    def checked(self, path: Path) -> SampleSummary:
        s, report = self.load(path)
        if report.passed:
            return s
        if not self._force:
            raise DataValidationError(
                f"{Path(path).name}: frequency counts disagree with n, k "
                f"(residuals k={report.k_residual}, n={report.n_residual})",
                report=report,
            )
        log.warning(
            "Continuing with inconsistent data (residuals k=%d, n=%d) because of --force",
            report.k_residual,
            report.n_residual,
        )
        return s

    # ----------------------------- priors -----------------------------

    def fit(self, s: SampleSummary, kind: PriorKind) -> Dict[str, Any]:
        result = fit(s, kind, self._settings.fit, threads=self._settings.runtime.threads)
        profile = fit_sigma_only(s, self._settings.fit)
        return {"fit": result.to_dict(), "sigma_profile": profile.to_dict()}

    def resolve_prior(
        self,
        s: SampleSummary,
        kind: PriorKind,
        *,
        do_fit: bool,
        sigma: Optional[float] = None,
        theta: Optional[float] = None,
        tau: Optional[float] = None,
    ) -> Tuple[PriorSpec, Optional[FitResult]]:
        if do_fit:
            result = fit(s, kind, self._settings.fit, threads=self._settings.runtime.threads)
            return result.prior, result
        if sigma is None:
            raise ConfigError("Give --fit or fixed prior parameters (--sigma with --theta or --tau).")
        if kind is PriorKind.PD:
            if theta is None:
                raise ConfigError("A fixed PD prior needs --theta.")
            return PriorSpec.pd(sigma, theta), None
        if tau is None:
            raise ConfigError("A fixed GG prior needs --tau.")
        return PriorSpec.gg(sigma, tau), None

    # ----------------------------- estimates -----------------------------

    def _table(self, prior: PriorSpec, seed: Optional[int]) -> WeightTable:
        return WeightTable(prior, seed=seed, draws=self._settings.sampling.weight_draws)

    def estimate(self, s: SampleSummary, prior: PriorSpec, ls: Sequence[int]) -> List[DiscoveryEstimate]:
        table = self._table(prior, self._settings.sampling.seed)
        rows: List[DiscoveryEstimate] = [bnp_discovery(s, prior, l, table=table) for l in ls]
        rows.extend(good_turing(s, l) for l in ls if l < s.n)
        return rows

    def intervals(
        self, s: SampleSummary, prior: PriorSpec, ls: Sequence[int], *, seed: Optional[int]
    ) -> List[DiscoveryEstimate]:
        seed = require_seed(seed, "ci")
        sampling = self._settings.sampling
        table = self._table(prior, seed)
        rows = []
        for l in ls:
            rows.append(
                discovery_with_interval(
                    s,
                    prior,
                    l,
                    sampling.level,
                    sampling.draws,
                    RngStream(seed, stream_id=l),
                    table=table,
                    moments=sampling.moments,
                )
            )
            log.debug("Interval for l=%d done", l)
        return rows

    @staticmethod
    def approximate(s: SampleSummary, prior: PriorSpec, ls: Sequence[int], order: int) -> List[DiscoveryEstimate]:
        if order == 1:
            return [first_order(s, prior.sigma, l) for l in ls]
        if order == 2:
            return [second_order(s, prior, l) for l in ls]
        raise ConfigError(f"--order must be 1 or 2, got {order}.")
