# ----------------------------- discovery estimators -----------------------------
"""
Point estimators of the l-discovery D_n(l) and posterior moments of Q(A_l).

bnp_discovery is the exact posterior mean under a Gibbs-type prior; Good-Turing
and its smoothed variant are the frequentist baselines; first_order and
second_order are the large-n expansions of the exact estimator.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, Mapping, Optional

from scipy import special

from gibbs_discovery.core.errors import DomainError, NumericalCancellationError, UnsupportedPriorError
from gibbs_discovery.gibbs_weights import PriorKind, PriorSpec, WeightTable, weight_ratios
from gibbs_discovery.special_fn import SignedLog, ln_pochhammer, log_binomial, max_log_abs, signed_log_sum

log = logging.getLogger("estimators")

MAX_DIGITS_LOST = 6.0


@dataclass(frozen=True)
class SampleSummary:
    """Sufficient statistics of a sample: size n, k species, m[l] species seen l times."""
    n: int
    k: int
    m: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1 or not 1 <= self.k <= self.n:
            raise DomainError(f"summary needs n >= 1 and 1 <= k <= n, got n={self.n}, k={self.k}")
        clean: Dict[int, int] = {}
        for l, count in sorted(self.m.items()):
            l, count = int(l), int(count)
            if l < 1 or count < 0:
                raise DomainError(f"frequency counts need l >= 1 and m_l >= 0, got m[{l}]={count}")
            if count:
                clean[l] = count
        object.__setattr__(self, "m", clean)

    @classmethod
    def from_counts(cls, m: Mapping[int, int], n: Optional[int] = None, k: Optional[int] = None) -> "SampleSummary":
        n = sum(l * c for l, c in m.items()) if n is None else n
        k = sum(m.values()) if k is None else k
        return cls(n=int(n), k=int(k), m=dict(m))

    def count(self, l: int) -> int:
        return self.m.get(l, 0)


@dataclass(frozen=True)
class EventSpec:
    """A Borel set A described by nu0(A) and mu(A) = sum over observed species in A of (n_i - sigma)."""
    nu0_mass: float
    mu_mass: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.nu0_mass <= 1.0 or self.mu_mass < 0.0:
            raise DomainError(f"event needs nu0 in [0,1] and mu >= 0, got ({self.nu0_mass}, {self.mu_mass})")

    @classmethod
    def new_species(cls) -> "EventSpec":
        return cls(1.0, 0.0)

    @classmethod
    def frequency(cls, s: SampleSummary, sigma: float, l: int) -> "EventSpec":
        return cls(0.0, (l - sigma) * s.count(l))

    @classmethod
    def whole_space(cls, s: SampleSummary, sigma: float) -> "EventSpec":
        return cls(1.0, s.n - sigma * s.k)


class EstimatorMethod(str, Enum):
    BNP = "bnp"
    GOOD_TURING = "good_turing"
    SMOOTHED_GOOD_TURING = "smoothed_good_turing"
    FIRST_ORDER = "first_order"
    SECOND_ORDER = "second_order"


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    level: float


@dataclass(frozen=True)
class DiscoveryEstimate:
    l: int
    value: float
    method: EstimatorMethod
    interval: Optional[Interval] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise DomainError(f"discovery estimate {self.value} is not a probability")
        if self.interval is not None and self.interval.lo > self.interval.hi:
            raise DomainError(f"interval ({self.interval.lo}, {self.interval.hi}) is reversed")

    def to_dict(self) -> Dict[str, object]:
        lo = self.interval.lo if self.interval else None
        hi = self.interval.hi if self.interval else None
        return {"l": self.l, "value": self.value, "lo": lo, "hi": hi, "method": self.method.value}


def _clamp(value: float) -> float:
    return min(1.0, max(0.0, value))


def _check_l(s: SampleSummary, l: int) -> None:
    if not 0 <= l <= s.n:
        raise DomainError(f"l must lie in [0, n={s.n}], got {l}")


def _check_sigma(sigma: float) -> None:
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")


# ----------------------------- exact and frequentist -----------------------------

def bnp_discovery(
    s: SampleSummary,
    prior: PriorSpec,
    l: int,
    *,
    table: Optional[WeightTable] = None,
    seed: Optional[int] = None,
) -> DiscoveryEstimate:
    """Posterior mean of Q(A_l). Generic priors need a table or a seed for their Monte Carlo weights."""
    _check_l(s, l)
    if l >= 1 and s.count(l) == 0:
        return DiscoveryEstimate(l, 0.0, EstimatorMethod.BNP)
    pair = weight_ratios(s.n, s.k, prior, table=table, seed=seed)
    value = pair.g0 if l == 0 else (l - prior.sigma) * s.count(l) * pair.g1
    return DiscoveryEstimate(l, _clamp(value), EstimatorMethod.BNP)


def good_turing(s: SampleSummary, l: int) -> DiscoveryEstimate:
    if not 0 <= l < s.n:
        raise DomainError(f"Good-Turing needs 0 <= l < n={s.n}, got {l}")
    return DiscoveryEstimate(l, _clamp((l + 1) * s.count(l + 1) / s.n), EstimatorMethod.GOOD_TURING)


def smoothed_good_turing(s: SampleSummary, sigma: float, l: int) -> DiscoveryEstimate:
    """(l+1) m'_{l+1} / n with m'_l = sigma (1-sigma)_{l-1} k / l!, i.e. sigma (1-sigma)_l k / (l! n)."""
    _check_sigma(sigma)
    if l < 0:
        raise DomainError(f"l must be nonnegative, got {l}")
    value = ln_pochhammer(1.0 - sigma, l).scale(
        math.log(sigma) + math.log(s.k) - float(special.gammaln(l + 1)) - math.log(s.n)
    )
    return DiscoveryEstimate(l, _clamp(value.to_float()), EstimatorMethod.SMOOTHED_GOOD_TURING)


# ----------------------------- posterior moments -----------------------------

def _table_for(prior: PriorSpec, table: Optional[WeightTable], seed: Optional[int]) -> WeightTable:
    if table is not None:
        return table
    return WeightTable(prior, seed=seed)


def posterior_moment(
    s: SampleSummary,
    prior: PriorSpec,
    l: int,
    r: int,
    *,
    table: Optional[WeightTable] = None,
    seed: Optional[int] = None,
) -> float:
    """E[Q(A_l)^r | X] for the new-species set (l = 0) or the set of species seen l times."""
    _check_l(s, l)
    if r < 1:
        raise DomainError(f"moment order must be positive, got {r}")
    sigma = prior.sigma
    mass = (l - sigma) * s.count(l)
    if l >= 1 and s.count(l) == 0:
        return 0.0

    if prior.kind is PriorKind.PD:
        a = prior.theta + sigma * s.k if l == 0 else mass
        return (ln_pochhammer(a, r) / ln_pochhammer(prior.theta + s.n, r)).to_float()

    table = _table_for(prior, table, seed)
    if prior.kind is PriorKind.GENERIC:
        # all orders from one particle set, so the sequence is a moment sequence of a law on [0, 1]
        cloud = table.particles(s.n, s.k)
        if l == 0:
            return cloud.mean(cloud.b ** r)
        share = (ln_pochhammer(mass, r) / ln_pochhammer(cloud.rest, r)).to_float()
        return share * cloud.mean((1.0 - cloud.b) ** r)

    if l >= 1:
        return (ln_pochhammer(mass, r).scale(table.log_ratio(s.n, s.k, r, 0))).to_float()

    rest = s.n - sigma * s.k
    terms = []
    for i in range(r + 1):
        term = ln_pochhammer(rest, i).scale(log_binomial(r, i) + table.log_ratio(s.n, s.k, i, 0))
        terms.append(-term if i % 2 else term)
    total = signed_log_sum(terms)
    if total.sign <= 0:
        raise NumericalCancellationError(f"new-species moment r={r} cancelled completely", digits_lost=math.inf)
    digits = (max_log_abs(terms) - total.log_abs) / math.log(10.0)
    if digits > MAX_DIGITS_LOST:
        raise NumericalCancellationError(
            f"new-species moment r={r} lost {digits:.1f} digits; sample the posterior instead", digits_lost=digits
        )
    return total.to_float()


def _join_paths(sigma: float):
    """
    R(r, i, mu): over all orderings of r future draws into A where i of them join a
    species already in A, the sum of products of the A-mass at each join. A new
    species adds 1 - sigma to the mass, a join adds 1.
    """
    @lru_cache(maxsize=None)
    def paths(r: int, i: int, mu: float) -> float:
        if i < 0 or i > r:
            return 0.0
        if r == 0:
            return 1.0
        return paths(r - 1, i, mu + 1.0 - sigma) + mu * paths(r - 1, i - 1, mu + 1.0)

    return paths


def general_moment(
    s: SampleSummary,
    prior: PriorSpec,
    event: EventSpec,
    r: int,
    *,
    table: Optional[WeightTable] = None,
    seed: Optional[int] = None,
) -> float:
    """
    E[Q(A)^r | X] = sum_i V_{n+r,k+r-i} / V_{n,k} nu0(A)^(r-i) R_{r,i}(mu(A)),
    with R_{r+1,i}(mu) = R_{r,i}(mu + 1 - sigma) + mu R_{r,i-1}(mu + 1) and 0^0 = 1.
    """
    if r < 1:
        raise DomainError(f"moment order must be positive, got {r}")
    if event.mu_mass > s.n - prior.sigma * s.k + 1e-12:
        raise DomainError(f"event mass {event.mu_mass} exceeds n - sigma k = {s.n - prior.sigma * s.k}")
    table = _table_for(prior, table, seed)
    paths = _join_paths(prior.sigma)

    total = 0.0
    for i in range(r + 1):
        new = r - i
        if event.nu0_mass == 0.0 and new > 0:
            continue
        coef = paths(r, i, float(event.mu_mass))
        if coef == 0.0:
            continue
        weight = math.exp(table.log_ratio(s.n, s.k, r, new))
        total += weight * (event.nu0_mass ** new) * coef
    return total


# ----------------------------- large-n approximations -----------------------------

def first_order(s: SampleSummary, sigma: float, l: int) -> DiscoveryEstimate:
    """sigma k / n for l = 0 and (l - sigma) m_l / n otherwise."""
    _check_sigma(sigma)
    _check_l(s, l)
    value = sigma * s.k / s.n if l == 0 else (l - sigma) * s.count(l) / s.n
    return DiscoveryEstimate(l, _clamp(value), EstimatorMethod.FIRST_ORDER)


def second_order(s: SampleSummary, prior: PriorSpec, l: int) -> DiscoveryEstimate:
    _check_l(s, l)
    sigma = prior.sigma
    if prior.kind is PriorKind.PD:
        shift = prior.theta / s.n
    elif prior.kind is PriorKind.GG:
        shift = prior.tau * s.k ** (-1.0 / sigma)
    else:
        raise UnsupportedPriorError("second order approximations exist only for PD and GG priors")

    if l == 0:
        value = sigma * s.k / s.n + shift
    else:
        value = (l - sigma) * s.count(l) / s.n * (1.0 - shift)
    return DiscoveryEstimate(l, _clamp(value), EstimatorMethod.SECOND_ORDER)
