"""
Posterior law of Q(A_l) given the sample, its sampling and credible intervals.

PD laws are Beta; GG laws mix a Beta scaling with W_{n - sigma k, Z_g}; generic
Gibbs priors are summarized by their first moments, all taken from one weighted
particle set, and approximated by a shifted-Legendre density.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import Legendre, Polynomial
from scipy import stats
from scipy.integrate import cumulative_trapezoid, trapezoid

from gibbs_discovery.core.errors import DomainError, InfeasibleMomentsError, InvalidDiscoveryIndexError
from gibbs_discovery.estimators import DiscoveryEstimate, EstimatorMethod, Interval, SampleSummary, bnp_discovery, posterior_moment
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec, WeightTable
from gibbs_discovery.samplers.latent import sample_W, zg_sampler
from gibbs_discovery.samplers.rng import RngLike, resolve_rng

log = logging.getLogger("posterior")

DEFAULT_DRAWS = 5000
DEFAULT_MOMENTS = 10
_HANKEL_TOL = -1e-8
_GRID_POINTS = 4001


@dataclass(frozen=True)
class ExactBeta:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.b > 0):
            raise DomainError(f"Beta law needs positive parameters, got ({self.a}, {self.b})")


@dataclass(frozen=True)
class GGComposite:
    sigma: float
    tau: float
    n: int
    k: int
    l: int
    m_l: int


@dataclass(frozen=True)
class MomentSequence:
    values: Tuple[float, ...]


PosteriorLaw = Union[ExactBeta, GGComposite, MomentSequence]


def posterior_law(
    s: SampleSummary,
    prior: PriorSpec,
    l: int,
    *,
    moments: int = DEFAULT_MOMENTS,
    table: Optional[WeightTable] = None,
    seed: Optional[int] = None,
) -> PosteriorLaw:
    if l >= 1 and s.count(l) == 0:
        raise InvalidDiscoveryIndexError(f"no species was observed exactly {l} times")
    sigma = prior.sigma
    if prior.kind is PriorKind.PD:
        if l == 0:
            return ExactBeta(prior.theta + sigma * s.k, s.n - sigma * s.k)
        mass = (l - sigma) * s.count(l)
        return ExactBeta(mass, prior.theta + s.n - mass)
    if prior.kind is PriorKind.GG:
        return GGComposite(sigma=sigma, tau=prior.tau, n=s.n, k=s.k, l=l, m_l=s.count(l))
    if table is None:
        table = WeightTable(prior, seed=seed)
    values = tuple(posterior_moment(s, prior, l, r, table=table) for r in range(1, moments + 1))
    return MomentSequence(values)


# ----------------------------- sampling -----------------------------

def _sample_gg(law: GGComposite, count: int, gen: np.random.Generator) -> np.ndarray:
    rest = law.n - law.sigma * law.k
    zg = zg_sampler(law.sigma, law.tau, law.n, law.k).draws(count, gen) ** (1.0 / law.sigma)
    w = sample_W(rest, zg, law.sigma, gen)
    if law.l == 0:
        return w
    a = (law.l - law.sigma) * law.m_l
    b = rest - a
    scale = gen.beta(a, b, size=count) if b > 0 else np.ones(count)
    return scale * (1.0 - w)


def sample_posterior(law: PosteriorLaw, count: int, rng: RngLike) -> np.ndarray:
    if count < 1:
        raise DomainError(f"draw count must be positive, got {count}")
    gen = resolve_rng(rng)
    if isinstance(law, ExactBeta):
        return gen.beta(law.a, law.b, size=count)
    if isinstance(law, GGComposite):
        return _sample_gg(law, count, gen)
    return moments_to_density(law.values).sample(count, gen)


def credible_interval(
    law: PosteriorLaw, level: float, count: int = DEFAULT_DRAWS, rng: Optional[RngLike] = None
) -> Tuple[float, float]:
    """Equal-tailed interval: exact for Beta laws, empirical or density-based otherwise."""
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    tails = np.array([(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    if isinstance(law, ExactBeta):
        lo, hi = stats.beta.ppf(tails, law.a, law.b)
    elif isinstance(law, MomentSequence):
        density = moments_to_density(law.values)
        lo, hi = density.quantile(tails[0]), density.quantile(tails[1])
    else:
        if rng is None:
            raise DomainError("sampled credible intervals need a random stream")
        draws = sample_posterior(law, count, rng)
        lo, hi = np.quantile(draws, tails)
    return float(lo), float(hi)


def discovery_with_interval(
    s: SampleSummary,
    prior: PriorSpec,
    l: int,
    level: float,
    draws: int = DEFAULT_DRAWS,
    rng: Optional[RngLike] = None,
    *,
    table: Optional[WeightTable] = None,
    seed: Optional[int] = None,
    moments: int = DEFAULT_MOMENTS,
) -> DiscoveryEstimate:
    if table is None and prior.kind is PriorKind.GENERIC:
        table = WeightTable(prior, seed=seed)
    point = bnp_discovery(s, prior, l, table=table)
    if l >= 1 and s.count(l) == 0:
        interval = Interval(0.0, 0.0, level)
    else:
        law = posterior_law(s, prior, l, moments=moments, table=table)
        lo, hi = credible_interval(law, level, draws, rng)
        interval = Interval(lo, hi, level)
        if not lo <= point.value <= hi:
            log.warning("estimate %.4f for l=%d lies outside its interval (%.4f, %.4f)", point.value, l, lo, hi)
    return DiscoveryEstimate(l, point.value, EstimatorMethod.BNP, interval)


# ----------------------------- moment inversion -----------------------------

@dataclass(frozen=True)
class MomentDensity:
    """Density on [0, 1] rebuilt from moments, with its grid CDF."""
    polynomial: Polynomial
    grid: np.ndarray
    pdf_values: np.ndarray
    cdf_values: np.ndarray

    def pdf(self, x):
        return np.interp(x, self.grid, self.pdf_values)

    def cdf(self, x):
        return np.interp(x, self.grid, self.cdf_values)

    def quantile(self, p):
        return np.interp(p, self.cdf_values, self.grid)

    def sample(self, count: int, rng: RngLike) -> np.ndarray:
        gen = resolve_rng(rng)
        ceiling = 1.01 * float(self.pdf_values.max())
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            x = gen.random(2 * need + 16)
            keep = x[gen.random(x.size) * ceiling <= self.pdf(x)]
            take = min(keep.size, need)
            out[filled:filled + take] = keep[:take]
            filled += take
        return out


def check_moments(moments: Sequence[float]) -> None:
    """Hankel tests for a [0, 1] moment sequence: [m_{i+j}] and [m_{i+j} - m_{i+j+1}] are PSD."""
    m = np.concatenate(([1.0], np.asarray(moments, dtype=float)))
    size = len(m) - 1
    h = size // 2 + 1
    lower = np.array([[m[i + j] for j in range(h)] for i in range(h)])
    h2 = (size - 1) // 2 + 1
    upper = np.array([[m[i + j] - m[i + j + 1] for j in range(h2)] for i in range(h2)])
    for name, matrix in (("moment", lower), ("shifted moment", upper)):
        smallest = float(np.linalg.eigvalsh(matrix).min())
        if smallest < _HANKEL_TOL:
            raise InfeasibleMomentsError(f"{name} Hankel matrix has eigenvalue {smallest:.3g}")


def moments_to_density(moments: Sequence[float]) -> MomentDensity:
    """
    Shifted-Legendre expansion f = sum_j (2j+1) E[P_j(X)] P_j whose first R moments
    equal the input; negative parts are clipped and the result renormalized.
    """
    if len(moments) < 2:
        raise DomainError("moment inversion needs at least two moments")
    check_moments(moments)
    m = np.concatenate(([1.0], np.asarray(moments, dtype=float)))

    poly = Polynomial([0.0])
    for j in range(len(m)):
        basis = Legendre.basis(j, domain=[0.0, 1.0]).convert(kind=Polynomial, domain=[-1.0, 1.0], window=[-1.0, 1.0])
        expectation = float(np.dot(basis.coef, m[: basis.coef.size]))
        poly = poly + (2 * j + 1) * expectation * basis

    grid = np.linspace(0.0, 1.0, _GRID_POINTS)
    pdf = np.clip(poly(grid), 0.0, None)
    pdf = pdf / trapezoid(pdf, grid)
    cdf = cumulative_trapezoid(pdf, grid, initial=0.0)
    cdf = cdf / cdf[-1]
    return MomentDensity(polynomial=poly, grid=grid, pdf_values=pdf, cdf_values=cdf)
