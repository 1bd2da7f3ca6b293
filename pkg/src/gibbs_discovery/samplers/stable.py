# ----------------------------- positive stable family -----------------------------
"""
Positive sigma-stable variates with Laplace transform exp(-t^sigma), and their
exponential and polynomial tilts.

The untilted draw uses Kanter's representation S = (A(U) / E)^((1 - sigma) / sigma)
with U uniform on (0, pi), E standard exponential and A Zolotarev's function.
The exponential tilt follows Hofert's description of Devroye's double rejection
for tilt^sigma >= 1 and plain rejection against the untilted law below that.
The polynomial tilt reweights Kanter's pair: E becomes Gamma(1 + c(1 - sigma))
and U gets the density proportional to A(U)^(-c(1 - sigma)).
"""

from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from gibbs_discovery.core.errors import DomainError, SamplerError
from gibbs_discovery.samplers.ars import AdaptiveRejectionSampler, LogConcaveTarget
from gibbs_discovery.samplers.rng import RngLike, resolve_rng

log = logging.getLogger("samplers.stable")

_MAX_TRIALS = 1_000_000


def check_sigma(sigma: float) -> None:
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")


def _sinc(x: float) -> float:
    return math.sin(x) / x if x != 0.0 else 1.0


def _exp(x: float) -> float:
    return math.exp(min(x, 709.0))


def zolotarev(u, sigma: float):
    """Zolotarev's function A(u) on (0, pi); accepts scalars or arrays."""
    u = np.asarray(u, dtype=float)
    val = (np.sin(sigma * u) ** sigma * np.sin((1.0 - sigma) * u) ** (1.0 - sigma) / np.sin(u)) ** (1.0 / (1.0 - sigma))
    return val if val.ndim else float(val)


def sample_positive_stable(sigma: float, rng: RngLike, size: Optional[int] = None):
    check_sigma(sigma)
    gen = resolve_rng(rng)
    u = gen.uniform(0.0, math.pi, size=size)
    e = gen.standard_exponential(size=size)
    return (zolotarev(u, sigma) / e) ** ((1.0 - sigma) / sigma)


class ExpTiltedStableSampler:
    """
    Draws R with density exp(b^sigma - b x) f_sigma(x).

    Keeps proposal/acceptance counters so callers can log the acceptance rate.
    """

    def __init__(self, sigma: float, rng: RngLike) -> None:
        check_sigma(sigma)
        self.sigma = sigma
        self._gen = resolve_rng(rng)
        self.proposals = 0
        self.accepted = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else float("nan")

    def _unif(self) -> float:
        return float(self._gen.random())

    def _normal(self) -> float:
        return float(self._gen.standard_normal())

    def draw(self, tilt: float) -> float:
        if not tilt > 0:
            raise DomainError(f"tilt must be positive, got {tilt}")
        if tilt ** self.sigma < 1.0:
            return self._plain_rejection(tilt)
        return self._double_rejection(tilt)

    def draws(self, tilts) -> np.ndarray:
        tilts = np.atleast_1d(np.asarray(tilts, dtype=float))
        out = np.fromiter((self.draw(t) for t in tilts), dtype=float, count=tilts.size)
        log.debug("exp-tilted stable sigma=%.3f: %d draws, acceptance %.3f", self.sigma, tilts.size, self.acceptance_rate)
        return out

    # ----------------------------- small tilt -----------------------------

    def _untilted(self) -> float:
        u = math.pi * self._unif()
        e = -math.log(1.0 - self._unif())
        return (self._zolotarev(u) / e) ** ((1.0 - self.sigma) / self.sigma)

    def _plain_rejection(self, lam: float) -> float:
        for _ in range(_MAX_TRIALS):
            s = self._untilted()
            self.proposals += 1
            if self._unif() < math.exp(-lam * s):
                self.accepted += 1
                return s
        raise SamplerError(f"plain rejection for the tilted stable law did not accept (tilt={lam})")

    # ----------------------------- double rejection -----------------------------

    def _double_rejection(self, lam: float) -> float:
        alpha = self.sigma
        b = (1.0 - alpha) / alpha
        lam_alpha = lam ** alpha
        gamma = lam_alpha * alpha * (1.0 - alpha)
        sqrt_gamma = math.sqrt(gamma)
        c1 = math.sqrt(math.pi / 2.0)
        c2 = 2.0 + c1
        c3 = c2 * sqrt_gamma
        xi = (1.0 + math.sqrt(2.0) * c3) / math.pi
        psi = c3 * math.exp(-gamma * math.pi * math.pi / 8.0) / math.sqrt(math.pi)

        for _ in range(_MAX_TRIALS):
            self.proposals += 1
            u, z_unif, z = self._aux(c1, xi, psi, gamma, sqrt_gamma, lam_alpha)
            x, n, e, a, m, delta = self._reference(u, lam_alpha, b, c1, z)
            if self._log_accept(x, n, e, a, m, lam_alpha, b, delta) > math.log(z_unif):
                self.accepted += 1
                return x ** (-b)
        raise SamplerError(f"double rejection for the tilted stable law did not accept (tilt={lam})")

    def _aux(self, c1, xi, psi, gamma, sqrt_gamma, lam_alpha):
        alpha = self.sigma
        for _ in range(_MAX_TRIALS):
            u = self._aux2(c1, xi, psi, gamma, sqrt_gamma)
            if u > math.pi:
                continue
            zeta = math.sqrt(self._zolotarev_pdf_exponentiated(u))
            z = 1.0 / (1.0 - (1.0 + alpha * zeta / sqrt_gamma) ** (-1.0 / alpha))
            accept_prob = self._aux2_accept_prob(u, c1, xi, psi, zeta, z, lam_alpha, gamma, sqrt_gamma)
            if accept_prob == 0.0:
                continue
            z_unif = self._unif() / accept_prob
            if u < math.pi and z_unif <= 1.0:
                return u, z_unif, z
        raise SamplerError("auxiliary draw of the double rejection sampler did not accept")

    def _aux2(self, c1, xi, psi, gamma, sqrt_gamma) -> float:
        w1 = c1 * xi / sqrt_gamma
        w2 = 2.0 * math.sqrt(math.pi) * psi
        w3 = xi * math.pi
        v = self._unif()
        if gamma >= 1.0:
            if v < w1 / (w1 + w2):
                return abs(self._normal()) / sqrt_gamma
            w = self._unif()
            return math.pi * (1.0 - w * w)
        w = self._unif()
        if v < w3 / (w2 + w3):
            return math.pi * w
        return math.pi * (1.0 - w * w)

    def _aux2_accept_prob(self, u, c1, xi, psi, zeta, z, lam_alpha, gamma, sqrt_gamma) -> float:
        inverse = math.pi * _exp(-lam_alpha * (1.0 - 1.0 / (zeta * zeta))) / ((1.0 + c1) * sqrt_gamma / zeta + z)
        d = 0.0
        if u >= 0.0 and gamma >= 1.0:
            d += xi * math.exp(-gamma * u * u / 2.0)
        if 0.0 < u < math.pi:
            d += psi / math.sqrt(math.pi - u)
        if 0.0 <= u <= math.pi and gamma < 1.0:
            d += xi
        inverse *= d
        return 1.0 / inverse if inverse > 0 else 0.0

    def _reference(self, u, lam_alpha, b, c1, z):
        alpha = self.sigma
        a = self._zolotarev(u)
        m = (b / a) ** alpha * lam_alpha
        delta = math.sqrt(m * alpha / a)
        a1 = delta * c1
        a3 = z / a
        s = a1 + delta + a3
        v2 = self._unif()
        n = 0.0
        e = 0.0
        if v2 < a1 / s:
            n = self._normal()
            x = m - delta * abs(n)
        elif v2 < (a1 + delta) / s:
            x = m + delta * self._unif()
        else:
            e = -math.log(1.0 - self._unif())
            x = m + delta + e * a3
        return x, n, e, a, m, delta

    def _log_accept(self, x, n, e, a, m, lam_alpha, b, delta) -> float:
        if x < 0:
            return -math.inf
        alpha = self.sigma
        value = -(a * (x - m) + _exp((1.0 / alpha) * math.log(lam_alpha) - b * math.log(m)) * ((m / x) ** b - 1.0))
        if x < m:
            value += n * n / 2.0
        elif x > m + delta:
            value += e
        return value

    def _zolotarev_pdf_exponentiated(self, x: float) -> float:
        alpha = self.sigma
        denominator = _sinc(alpha * x) ** alpha * _sinc((1.0 - alpha) * x) ** (1.0 - alpha)
        return _sinc(x) / denominator

    def _zolotarev(self, x: float) -> float:
        alpha = self.sigma
        return (
            ((1.0 - alpha) * _sinc((1.0 - alpha) * x)) ** (1.0 - alpha)
            * (alpha * _sinc(alpha * x)) ** alpha
            / _sinc(x)
        ) ** (1.0 / (1.0 - alpha))


def sample_exp_tilted_stable(sigma: float, b: float, rng: RngLike, size: Optional[int] = None):
    """R_{sigma,b}: Laplace transform exp(b^sigma - (b + t)^sigma)."""
    sampler = ExpTiltedStableSampler(sigma, rng)
    if size is None:
        return sampler.draw(b)
    return sampler.draws(np.full(size, b, dtype=float))


# ----------------------------- polynomial tilt -----------------------------

def _angle_target(sigma: float, c: float) -> LogConcaveTarget:
    """log of A(u)^(-c(1 - sigma)) on (0, pi), concave for c > 0 since log A is convex."""
    s1 = 1.0 - sigma

    def log_density(u: float) -> float:
        return c * (math.log(math.sin(u)) - sigma * math.log(math.sin(sigma * u)) - s1 * math.log(math.sin(s1 * u)))

    def derivative(u: float) -> float:
        return c * (1.0 / math.tan(u) - sigma * sigma / math.tan(sigma * u) - s1 * s1 / math.tan(s1 * u))

    return LogConcaveTarget(log_density=log_density, derivative=derivative, lower=0.0, upper=math.pi)


def _angle_negative_tilt(sigma: float, c: float, gen: np.random.Generator, size: int) -> np.ndarray:
    """
    Angles for c in (-1, 0): the density A(u)^(|c|(1-sigma)) is proposed from
    (pi - u)^(-|c|) and accepted with probability (q(u) / q_max)^|c| where
    q(u) = (pi - u) sin(sigma u)^sigma sin((1-sigma) u)^(1-sigma) / sin(u) <= pi sigma^sigma (1-sigma)^(1-sigma).
    """
    g = -c
    q_max = math.pi * sigma ** sigma * (1.0 - sigma) ** (1.0 - sigma)
    out = np.empty(size)
    filled = 0
    while filled < size:
        batch = max(16, 2 * (size - filled))
        v = gen.random(batch)
        u = math.pi - math.pi * v ** (1.0 / (1.0 - g))
        u = u[(u > 0.0) & (u < math.pi)]
        q = (math.pi - u) * np.sin(sigma * u) ** sigma * np.sin((1.0 - sigma) * u) ** (1.0 - sigma) / np.sin(u)
        keep = u[gen.random(u.size) < (q / q_max) ** g]
        take = min(keep.size, size - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def sample_poly_tilted_stable(sigma: float, c: float, rng: RngLike, size: Optional[int] = None):
    """S_{sigma,c} with density proportional to x^(-c sigma) f_sigma(x), c > -1."""
    check_sigma(sigma)
    if not c > -1.0:
        raise DomainError(f"polynomial tilt needs c > -1, got {c}")
    gen = resolve_rng(rng)
    count = 1 if size is None else int(size)

    if c == 0.0:
        out = np.asarray(sample_positive_stable(sigma, gen, size=count))
        return float(out[0]) if size is None else out

    if c > 0.0:
        scale = min(1.0, 1.0 / math.sqrt(c * sigma * (1.0 - sigma)))
        start = [0.25 * scale, scale, min(2.0 * scale, 0.9 * math.pi)]
        angles = AdaptiveRejectionSampler(_angle_target(sigma, c), start).draws(count, gen)
    else:
        angles = _angle_negative_tilt(sigma, c, gen, count)

    e = gen.gamma(1.0 + c * (1.0 - sigma), size=count)
    out = (zolotarev(angles, sigma) / e) ** ((1.0 - sigma) / sigma)
    out = np.atleast_1d(out)
    return float(out[0]) if size is None else out
