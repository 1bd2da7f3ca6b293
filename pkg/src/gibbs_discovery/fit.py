"""Empirical-Bayes fitting of PD and GG priors by maximizing the EPPF likelihood."""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import expit, logit

from gibbs_discovery.core.errors import DomainError, GibbsDiscoveryError, UnsupportedPriorError
from gibbs_discovery.core.settings import FitSettings
from gibbs_discovery.estimators import SampleSummary
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec, v_gg_ln, v_pd_ln
from gibbs_discovery.special_fn import ln_pochhammer

log = logging.getLogger("fit")

SIGMA_LO = 0.01
SIGMA_HI = 0.99
_PENALTY = 1e300


@dataclass(frozen=True)
class FitResult:
    prior: PriorSpec
    log_likelihood: float
    converged: bool
    evaluations: int
    multi_start_spread: float

    def to_dict(self) -> dict:
        return {
            "prior": self.prior.to_dict(),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "evaluations": self.evaluations,
            "multi_start_spread": self.multi_start_spread,
        }


def _log_cluster_terms(s: SampleSummary, sigma: float) -> float:
    """log prod_l [(1 - sigma)_{l-1}]^{m_l}."""
    return sum(c * ln_pochhammer(1.0 - sigma, l - 1).log_abs for l, c in s.m.items())


def log_likelihood_pd(s: SampleSummary, sigma: float, theta: float) -> float:
    return v_pd_ln(s.n, s.k, sigma, theta) + _log_cluster_terms(s, sigma)


def log_likelihood_gg(s: SampleSummary, sigma: float, tau: float) -> float:
    return v_gg_ln(s.n, s.k, sigma, tau, method="quadrature") + _log_cluster_terms(s, sigma)


def log_likelihood_sigma_only(s: SampleSummary, sigma: float) -> float:
    """Likelihood with h = 1, where V_{n,k} = sigma^(k-1) Gamma(k) / Gamma(n)."""
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    return v_pd_ln(s.n, s.k, sigma, 0.0) + _log_cluster_terms(s, sigma)


# ----------------------------- coordinates -----------------------------

def _to_sigma(u: float) -> float:
    return SIGMA_LO + (SIGMA_HI - SIGMA_LO) * float(expit(u))


def _from_sigma(sigma: float) -> float:
    return float(logit((sigma - SIGMA_LO) / (SIGMA_HI - SIGMA_LO)))


def _decode(kind: PriorKind, point: np.ndarray) -> Tuple[float, float]:
    sigma = _to_sigma(point[0])
    if kind is PriorKind.PD:
        return sigma, math.exp(point[1]) - sigma
    return sigma, math.exp(point[1])


def _encode(kind: PriorKind, sigma: float, location: float) -> np.ndarray:
    second = math.log(location + sigma) if kind is PriorKind.PD else math.log(location)
    return np.array([_from_sigma(sigma), second])


def _objective(kind: PriorKind, s: SampleSummary):
    loglik = log_likelihood_pd if kind is PriorKind.PD else log_likelihood_gg

    def negative(point: np.ndarray) -> float:
        sigma, location = _decode(kind, point)
        try:
            value = loglik(s, sigma, location)
        except (GibbsDiscoveryError, ValueError, OverflowError, ZeroDivisionError):
            return _PENALTY
        return -value if math.isfinite(value) else _PENALTY

    return negative


@dataclass(frozen=True)
class _StartOutcome:
    point: Tuple[float, float]
    log_likelihood: float
    converged: bool
    evaluations: int


def _run_start(kind: PriorKind, s: SampleSummary, start: np.ndarray, settings: FitSettings) -> _StartOutcome:
    res = minimize(
        _objective(kind, s),
        start,
        method="Nelder-Mead",
        options={
            "maxfev": settings.max_evaluations,
            "xatol": settings.simplex_tolerance,
            "fatol": settings.simplex_tolerance,
        },
    )
    return _StartOutcome(
        point=(float(res.x[0]), float(res.x[1])),
        log_likelihood=-float(res.fun),
        converged=bool(res.success),
        evaluations=int(res.nfev),
    )


def fit(
    s: SampleSummary,
    kind: PriorKind,
    settings: Optional[FitSettings] = None,
    *,
    threads: int = 1,
) -> FitResult:
    if kind not in (PriorKind.PD, PriorKind.GG):
        raise UnsupportedPriorError(f"fitting is defined for PD and GG priors, not {kind.value}")
    if s.n < 2 or s.k < 2:
        raise DomainError(f"fitting needs n >= 2 and k >= 2, got n={s.n}, k={s.k}")
    settings = settings or FitSettings()

    starts = [_encode(kind, sg, loc) for sg, loc in itertools.product(settings.sigma_grid, settings.location_grid)]
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        outcomes: List[_StartOutcome] = list(pool.map(lambda x0: _run_start(kind, s, x0, settings), starts))

    ranked = sorted(outcomes, key=lambda o: (-o.log_likelihood, o.point))
    best = ranked[0]
    top = [np.array(o.point) for o in ranked[:3]]
    spread = max((float(np.linalg.norm(a - b)) for a, b in itertools.combinations(top, 2)), default=0.0)

    sigma, location = _decode(kind, np.array(best.point))
    prior = PriorSpec.pd(sigma, location) if kind is PriorKind.PD else PriorSpec.gg(sigma, location)
    converged = best.converged and math.isfinite(best.log_likelihood) and best.log_likelihood > -_PENALTY
    if not converged:
        log.warning("%s fit did not converge after %d evaluations", kind.value.upper(), best.evaluations)
    log.info("%s fit: %s loglik=%.4f", kind.value.upper(), prior.to_dict(), best.log_likelihood)
    log.debug("%s fit multi-start spread %.3g", kind.value.upper(), spread)
    return FitResult(prior, best.log_likelihood, converged, best.evaluations, spread)


def fit_sigma_only(s: SampleSummary, settings: Optional[FitSettings] = None) -> FitResult:
    """Maximize the h = 1 likelihood in sigma alone (a PD prior with theta = 0)."""
    if s.n < 2 or s.k < 2:
        raise DomainError(f"fitting needs n >= 2 and k >= 2, got n={s.n}, k={s.k}")
    settings = settings or FitSettings()
    res = minimize_scalar(
        lambda sg: -log_likelihood_sigma_only(s, sg),
        bounds=(SIGMA_LO, SIGMA_HI),
        method="bounded",
        options={"xatol": settings.simplex_tolerance, "maxiter": settings.max_evaluations},
    )
    sigma = float(res.x)
    return FitResult(PriorSpec.pd(sigma, 0.0), -float(res.fun), bool(res.success), int(res.nfev), 0.0)
