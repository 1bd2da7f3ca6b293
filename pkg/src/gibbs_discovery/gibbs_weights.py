"""
Predictive weights V_{n,k} of Gibbs-type priors, in log space.

Three prior families are supported: the two-parameter Poisson-Dirichlet (PD),
the normalized generalized Gamma (GG) and a generic prior given by the log of its
mixing function h. PD weights are closed form; GG weights come from either the
alternating incomplete-gamma sum (small n only) or a one-dimensional integral
centred on its mode; generic weights are Monte Carlo averages of h over a
polynomially tilted stable / Beta ratio.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy import integrate, special
from scipy.optimize import brentq

from gibbs_discovery.core.errors import ConfigError, DomainError, MethodError, NumericalCancellationError
from gibbs_discovery.samplers.rng import RngLike, RngStream, resolve_rng
from gibbs_discovery.samplers.stable import sample_poly_tilted_stable
from gibbs_discovery.special_fn import (
    SignedLog,
    ln_pochhammer,
    log_binomial,
    signed_log_sum,
    upper_incomplete_gamma_ln,
)

log = logging.getLogger("gibbs_weights")

ALTERNATING_SUM_MAX_N = 50
DEFAULT_MC_DRAWS = 100_000
MIN_MC_DRAWS = 1_000
_MC_WARN_REL_STDERR = 0.05

LogH = Callable[[np.ndarray], np.ndarray]


class PriorKind(str, Enum):
    PD = "pd"
    GG = "gg"
    GENERIC = "generic"


@dataclass(frozen=True)
class PriorSpec:
    kind: PriorKind
    sigma: float
    theta: Optional[float] = None
    tau: Optional[float] = None
    log_h: Optional[LogH] = None
    label: Optional[str] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 1.0:
            raise DomainError(f"sigma must lie in (0, 1), got {self.sigma}")
        if self.kind is PriorKind.PD:
            if self.theta is None or not self.theta > -self.sigma:
                raise DomainError(f"PD prior needs theta > -sigma, got theta={self.theta}")
            if self.tau is not None or self.log_h is not None:
                raise DomainError("PD prior takes only sigma and theta")
        elif self.kind is PriorKind.GG:
            if self.tau is None or not self.tau > 0:
                raise DomainError(f"GG prior needs tau > 0, got tau={self.tau}")
            if self.theta is not None or self.log_h is not None:
                raise DomainError("GG prior takes only sigma and tau")
        else:
            if self.log_h is None:
                raise DomainError("generic prior needs log_h")
            if self.theta is not None or self.tau is not None:
                raise DomainError("generic prior takes only sigma and log_h")

    @classmethod
    def pd(cls, sigma: float, theta: float) -> "PriorSpec":
        return cls(PriorKind.PD, float(sigma), theta=float(theta))

    @classmethod
    def gg(cls, sigma: float, tau: float) -> "PriorSpec":
        return cls(PriorKind.GG, float(sigma), tau=float(tau))

    @classmethod
    def generic(cls, sigma: float, log_h: LogH, label: Optional[str] = None) -> "PriorSpec":
        return cls(PriorKind.GENERIC, float(sigma), log_h=log_h, label=label)

    def as_generic(self) -> "PriorSpec":
        """Same prior expressed through its mixing function h."""
        if self.kind is PriorKind.PD:
            return PriorSpec.generic(self.sigma, pd_log_h(self.sigma, self.theta), label=f"pd-h({self.theta})")
        if self.kind is PriorKind.GG:
            return PriorSpec.generic(self.sigma, gg_log_h(self.sigma, self.tau), label=f"gg-h({self.tau})")
        return self

    def to_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {"kind": self.kind.value, "sigma": self.sigma}
        if self.kind is PriorKind.PD:
            out["theta"] = self.theta
        elif self.kind is PriorKind.GG:
            out["tau"] = self.tau
        elif self.label:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class WeightRatioPair:
    g0: float
    g1: float


class MonteCarloWeight(NamedTuple):
    log_value: float
    rel_stderr: float


# ----------------------------- mixing functions -----------------------------

def pd_log_h(sigma: float, theta: float) -> LogH:
    """log p(t) with p(t) = sigma Gamma(theta) t^(-theta) / Gamma(theta/sigma)."""
    if theta == 0.0:
        const = 0.0
    else:
        const = math.log(sigma) + float(special.gammaln(theta) - special.gammaln(theta / sigma))

    def log_h(t: np.ndarray) -> np.ndarray:
        return const - theta * np.log(t)

    return log_h


def gg_log_h(sigma: float, tau: float) -> LogH:
    """log g(t) = tau^sigma - tau t."""
    def log_h(t: np.ndarray) -> np.ndarray:
        return tau ** sigma - tau * np.asarray(t, dtype=float)

    return log_h


def unit_log_h(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(np.asarray(t, dtype=float))


# ----------------------------- closed forms -----------------------------

def _check_nk(n: int, k: int) -> None:
    if n < 1 or not 1 <= k <= n:
        raise DomainError(f"need n >= 1 and 1 <= k <= n, got n={n}, k={k}")


def v_pd_ln(n: int, k: int, sigma: float, theta: float) -> float:
    """log of prod_{i<k} (theta + i sigma) / (theta)_n."""
    _check_nk(n, k)
    if not 0.0 < sigma < 1.0 or not theta > -sigma:
        raise DomainError(f"PD weights need sigma in (0,1) and theta > -sigma, got ({sigma}, {theta})")

    # prod_{i<k} (theta + i sigma) = sigma^k (theta/sigma)_k; the i=0 factor is theta itself
    if theta == 0.0:
        numerator = SignedLog(1, (k - 1) * math.log(sigma) + float(special.gammaln(k)))
    else:
        numerator = ln_pochhammer(theta / sigma, k).scale(k * math.log(sigma))
    denominator = ln_pochhammer(theta, n) if theta != 0.0 else SignedLog(1, float(special.gammaln(n)))
    value = numerator / denominator
    if value.sign <= 0:
        raise DomainError(f"PD weight is not positive at n={n}, k={k}, sigma={sigma}, theta={theta}")
    return value.log_abs


def _gg_log_integrand(x: float, n: int, k: int, sigma: float, tau: float) -> float:
    return (n - 1) * math.log(x) + (sigma * k - n) * math.log(tau + x) - (tau + x) ** sigma


def _gg_mode(n: int, k: int, sigma: float, tau: float) -> float:
    """Positive root of sigma x (tau+x)^sigma = (n-1) tau + (sigma k - 1) x."""
    def slope(x: float) -> float:
        return sigma * x * (tau + x) ** sigma - (n - 1) * tau - (sigma * k - 1) * x

    hi = max(1.0, float(n))
    while slope(hi) < 0:
        hi *= 2.0
    return brentq(slope, 0.0, hi, xtol=1e-14, rtol=1e-13, maxiter=500)


def _quad(func: Callable[[float], float], a: float, b: float) -> float:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value = integrate.quad(func, a, b, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    for item in caught:
        log.debug("quadrature on [%.6g, %.6g]: %s", a, b, " ".join(str(item.message).split())[:160])
    return value


def _gg_quadrature_ln(n: int, k: int, sigma: float, tau: float) -> float:
    mode = _gg_mode(n, k, sigma, tau)
    peak = _gg_log_integrand(mode, n, k, sigma, tau)
    curvature = (
        (n - 1) / mode ** 2
        - (n - sigma * k) / (tau + mode) ** 2
        + sigma * (sigma - 1.0) * (tau + mode) ** (sigma - 2.0)
    )
    width = 1.0 / math.sqrt(curvature) if curvature > 0 else max(1.0, mode)
    log.debug("GG quadrature n=%d k=%d: mode %.6g width %.6g", n, k, mode, width)

    def rel(x: float) -> float:
        if x <= 0.0:
            return 0.0
        return math.exp(_gg_log_integrand(x, n, k, sigma, tau) - peak)

    cuts = [0.0, max(0.0, mode - 10.0 * width), mode, mode + 10.0 * width]
    total = 0.0
    for a, b in zip(cuts, cuts[1:]):
        if b > a:
            total += _quad(rel, a, b)
    total += _quad(rel, cuts[-1], math.inf)
    return k * math.log(sigma) + tau ** sigma - float(special.gammaln(n)) + peak + math.log(total)


def _gg_alternating_sum_ln(n: int, k: int, sigma: float, tau: float) -> float:
    x = tau ** sigma
    log_tau = math.log(tau)
    terms = []
    for i in range(n):
        gamma_term = upper_incomplete_gamma_ln(k - i / sigma, x)
        term = gamma_term.scale(log_binomial(n - 1, i) + i * log_tau)
        terms.append(-term if i % 2 else term)
    total = signed_log_sum(terms)
    if total.sign <= 0:
        raise NumericalCancellationError(
            f"alternating GG sum cancelled to a non-positive value at n={n}, k={k}", digits_lost=math.inf
        )
    return (k - 1) * math.log(sigma) + x - float(special.gammaln(n)) + total.log_abs


def v_gg_ln(n: int, k: int, sigma: float, tau: float, method: str = "quadrature") -> float:
    _check_nk(n, k)
    if not 0.0 < sigma < 1.0 or not tau > 0:
        raise DomainError(f"GG weights need sigma in (0,1) and tau > 0, got ({sigma}, {tau})")
    if method == "alternating_sum":
        if n > ALTERNATING_SUM_MAX_N:
            raise MethodError(f"alternating sum is unstable beyond n={ALTERNATING_SUM_MAX_N}; use quadrature")
        return _gg_alternating_sum_ln(n, k, sigma, tau)
    if method != "quadrature":
        raise MethodError(f"unknown GG weight method {method!r}")
    if n == 1:
        return 0.0
    return _gg_quadrature_ln(n, k, sigma, tau)


# ----------------------------- Monte Carlo -----------------------------

@dataclass(frozen=True)
class LatentParticles:
    """
    Weighted draws of the Beta variable B behind V_{n,k}, with weights proportional
    to h(S / B).

    Under these weights the posterior mass of the new species is distributed as B,
    and the mass of the species seen l times as X (1 - B) with
    X ~ Beta((l - sigma) m_l, n - sigma k - (l - sigma) m_l) independent of B.
    """
    b: np.ndarray
    weights: np.ndarray
    rest: float

    def mean(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))

    @property
    def effective_size(self) -> float:
        return float(1.0 / np.sum(self.weights ** 2))


def _latent_draws(n: int, k: int, prior: PriorSpec, draws: int, rng: RngLike) -> Tuple[np.ndarray, np.ndarray]:
    _check_nk(n, k)
    if draws < MIN_MC_DRAWS:
        raise ConfigError(f"Monte Carlo weights need at least {MIN_MC_DRAWS} draws, got {draws}")
    generic = prior.as_generic()
    sigma = generic.sigma
    gen = resolve_rng(rng)

    s = sample_poly_tilted_stable(sigma, float(k), gen, size=draws)
    b = gen.beta(sigma * k, n - sigma * k, size=draws)
    return b, np.asarray(generic.log_h(s / b), dtype=float)


def latent_particles(n: int, k: int, prior: PriorSpec, draws: int, rng: RngLike) -> LatentParticles:
    """Self-normalized particles for (n, k); the same stream gives the same draws as v_mc_ln."""
    b, log_h = _latent_draws(n, k, prior, draws, rng)
    weights = np.exp(log_h - special.logsumexp(log_h))
    cloud = LatentParticles(b=b, weights=weights, rest=n - prior.sigma * k)
    if cloud.effective_size < MIN_MC_DRAWS / 10:
        log.warning("latent particles at n=%d k=%d have effective size %.0f of %d", n, k, cloud.effective_size, draws)
    return cloud


def v_mc_ln(n: int, k: int, prior: PriorSpec, draws: int, rng: RngLike) -> MonteCarloWeight:
    """
    V = sigma^(k-1) Gamma(k) / Gamma(n) E[h(S_{sigma,k} / B_{sigma k, n - sigma k})].

    Returns the log estimate and the relative standard error of the mean of h.
    """
    _, log_h = _latent_draws(n, k, prior, draws, rng)
    sigma = prior.sigma

    top = float(np.max(log_h))
    scaled = np.exp(log_h - top)
    mean = float(scaled.mean())
    rel_stderr = float(scaled.std(ddof=1) / math.sqrt(draws) / mean)
    log_mean = top + math.log(mean)

    if rel_stderr > _MC_WARN_REL_STDERR:
        log.warning("Monte Carlo weight V(%d,%d) has relative stderr %.3f", n, k, rel_stderr)
    value = (k - 1) * math.log(sigma) + float(special.gammaln(k) - special.gammaln(n)) + log_mean
    return MonteCarloWeight(value, rel_stderr)


# ----------------------------- ratios -----------------------------

class WeightTable:
    """
    Memoized log V_{n,k} for one prior.

    Generic priors evaluate each V by Monte Carlo on its own stream derived from
    (seed, n, k), so values do not depend on evaluation order. The latent
    particles at (n, k) reuse that stream.
    """

    def __init__(self, prior: PriorSpec, *, seed: Optional[int] = None, draws: int = DEFAULT_MC_DRAWS) -> None:
        if prior.kind is PriorKind.GENERIC and seed is None:
            raise ConfigError("generic priors evaluate weights by Monte Carlo and need a seed")
        self.prior = prior
        self._seed = seed
        self._draws = draws
        self._cache: Dict[Tuple[int, int], float] = {}
        self._particles: Dict[Tuple[int, int], LatentParticles] = {}

    def _stream(self, n: int, k: int) -> RngStream:
        return RngStream(seed=self._seed, stream_id=(n << 32) + k)

    def log_v(self, n: int, k: int) -> float:
        key = (n, k)
        if key not in self._cache:
            self._cache[key] = self._evaluate(n, k)
        return self._cache[key]

    def _evaluate(self, n: int, k: int) -> float:
        p = self.prior
        if p.kind is PriorKind.PD:
            return v_pd_ln(n, k, p.sigma, p.theta)
        if p.kind is PriorKind.GG:
            return v_gg_ln(n, k, p.sigma, p.tau)
        return v_mc_ln(n, k, p, self._draws, self._stream(n, k)).log_value

    def particles(self, n: int, k: int) -> LatentParticles:
        if self.prior.kind is not PriorKind.GENERIC:
            raise MethodError("latent particles are only drawn for generic priors")
        key = (n, k)
        if key not in self._particles:
            self._particles[key] = latent_particles(n, k, self.prior, self._draws, self._stream(n, k))
        return self._particles[key]

    def log_ratio(self, n: int, k: int, dn: int, dk: int) -> float:
        """log V_{n+dn,k+dk} - log V_{n,k}."""
        return self.log_v(n + dn, k + dk) - self.log_v(n, k)

    def ratios(self, n: int, k: int) -> WeightRatioPair:
        return weight_ratios(n, k, self.prior, table=self)


def weight_ratios(
    n: int, k: int, prior: PriorSpec, *, table: Optional[WeightTable] = None, seed: Optional[int] = None
) -> WeightRatioPair:
    """
    g0 = V_{n+1,k+1}/V_{n,k} and g1 = V_{n+1,k}/V_{n,k}, renormalized so that
    g0 + (n - sigma k) g1 = 1.

    Generic priors need either a table or a seed.
    """
    _check_nk(n, k)
    sigma = prior.sigma
    rest = n - sigma * k

    if prior.kind is PriorKind.PD:
        denom = prior.theta + n
        return WeightRatioPair(g0=(prior.theta + sigma * k) / denom, g1=1.0 / denom)

    if table is None:
        table = WeightTable(prior, seed=seed)
    if prior.kind is PriorKind.GENERIC:
        # g0 = E[B] under the particle weights; g1 follows from the triangular identity
        cloud = table.particles(n, k)
        g0 = cloud.mean(cloud.b)
        return WeightRatioPair(g0=g0, g1=(1.0 - g0) / rest)

    g0 = math.exp(table.log_ratio(n, k, 1, 1))
    g1 = math.exp(table.log_ratio(n, k, 1, 0))
    total = g0 + rest * g1
    if abs(total - 1.0) > 1e-6:
        log.warning("GG ratios at n=%d k=%d violate the triangular identity by %.3g", n, k, total - 1.0)
    return WeightRatioPair(g0=g0 / total, g1=g1 / total)
