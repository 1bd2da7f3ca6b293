"""
Zeta(s) population P[Z = z] = z^(-s) / zeta(s) with exact inverse-CDF sampling.

The survival function P[Z >= z] is the Hurwitz zeta zeta(s, z) / zeta(s). Draws
falling in a precomputed prefix are resolved by binary search on it; deeper
draws are bracketed from the asymptotic tail and bisected on the Hurwitz zeta.
Labels whose bisection bracket would pass 2^52 (from about 2^51 on) cannot be
bisected in floating point and take the asymptotic inverse
((s - 1) zeta(s) u)^(1 / (1 - s)) directly. There the asymptotic survival
differs from the Hurwitz zeta by a relative (s - 1) / (2 z), of order 2^-52, so
those labels are exact up to float rounding of z. Each such species carries
mass below 2^(-51 s) / zeta(s).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import special

from gibbs_discovery.core.errors import DomainError
from gibbs_discovery.data_sim.summary import RawSample
from gibbs_discovery.samplers.rng import RngLike, resolve_rng

PREFIX_SIZE = 1 << 16
_FLOAT_EXACT = float(1 << 52)


@dataclass(frozen=True)
class ZetaPopulation:
    s: float

    def __post_init__(self) -> None:
        if not self.s > 1.0:
            raise DomainError(f"Zeta population needs s > 1, got {self.s}")

    @cached_property
    def normalizer(self) -> float:
        return float(special.zeta(self.s, 1.0))

    def pmf(self, z: int) -> float:
        return float(z) ** (-self.s) / self.normalizer

    def survival(self, z):
        """P[Z >= z]."""
        return special.zeta(self.s, np.asarray(z, dtype=float)) / self.normalizer

    @cached_property
    def _prefix(self) -> np.ndarray:
        # _prefix[i] = P[Z >= i + 1], decreasing from 1
        return self.survival(np.arange(1, PREFIX_SIZE + 2))

    def _asymptotic_inverse(self, u: np.ndarray) -> np.ndarray:
        return ((self.s - 1.0) * self.normalizer * u) ** (1.0 / (1.0 - self.s))

    def _tail(self, u: np.ndarray) -> np.ndarray:
        """Largest z > PREFIX_SIZE with P[Z >= z] > u, in floats."""
        guess = self._asymptotic_inverse(u)
        lo = np.maximum(float(PREFIX_SIZE + 1), np.floor(guess / 2.0))
        hi = np.ceil(guess * 2.0) + 1.0
        exact = hi < _FLOAT_EXACT
        out = np.floor(np.minimum(guess, 1e300))

        lo, hi, uu = lo[exact], hi[exact], u[exact]
        while True:
            low_bad = self.survival(lo) <= uu
            if not low_bad.any():
                break
            lo = np.where(low_bad, np.maximum(float(PREFIX_SIZE + 1), np.floor(lo / 2.0)), lo)
        while True:
            high_bad = self.survival(hi) > uu
            if not high_bad.any():
                break
            hi = np.where(high_bad, hi * 2.0, hi)
        while np.any(hi - lo > 1.0):
            mid = np.floor((lo + hi) / 2.0)
            above = self.survival(mid) > uu
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        out[exact] = lo
        return out

    def sample(self, n: int, rng: RngLike) -> RawSample:
        if n < 1:
            raise DomainError(f"sample size must be positive, got {n}")
        gen = resolve_rng(rng)
        u = gen.random(n)
        u = np.where(u == 0.0, np.finfo(float).tiny, u)
        # count of z in 1..PREFIX_SIZE+1 with P[Z >= z] > u
        z = np.searchsorted(-self._prefix, -u, side="left").astype(float)
        deep = z > PREFIX_SIZE
        if deep.any():
            z[deep] = self._tail(u[deep])
        return RawSample(tuple(int(v) for v in z))


def sample_zeta(pop: ZetaPopulation, n: int, rng: RngLike) -> RawSample:
    return pop.sample(n, rng)


def true_discovery(raw: RawSample, pop: ZetaPopulation, l: int) -> float:
    """Population mass of species seen exactly l times; l = 0 is the unseen mass."""
    counts = raw.species_counts()
    for label in counts:
        if not isinstance(label, (int, np.integer)) or label < 1:
            raise DomainError(f"Zeta species labels are positive integers, got {label!r}")
    if l == 0:
        return 1.0 - math.fsum(pop.pmf(z) for z in counts)
    return math.fsum(pop.pmf(z) for z, c in counts.items() if c == l)


def true_discovery_table(raw: RawSample, pop: ZetaPopulation) -> dict:
    """Every nonzero D(l) plus D(0) in one pass."""
    counts = raw.species_counts()
    by_l: Counter = Counter()
    for z, c in counts.items():
        by_l[c] += pop.pmf(z)
    table = {0: 1.0 - math.fsum(pop.pmf(z) for z in counts)}
    table.update(sorted(by_l.items()))
    return table
