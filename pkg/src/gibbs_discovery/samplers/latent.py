"""Latent variables that mix the posterior discovery probability."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from gibbs_discovery.core.errors import DomainError, SamplerError
from gibbs_discovery.samplers.ars import AdaptiveRejectionSampler, LogConcaveTarget
from gibbs_discovery.samplers.rng import RngLike, resolve_rng
from gibbs_discovery.samplers.stable import ExpTiltedStableSampler, check_sigma


def sample_Zp(sigma: float, theta: float, k: int, rng: RngLike, size: Optional[int] = None):
    """Z_p = G^(1/sigma) with G ~ Gamma(theta/sigma + k)."""
    check_sigma(sigma)
    shape = theta / sigma + k
    if not shape > 0:
        raise DomainError(f"Z_p needs theta/sigma + k > 0, got {shape}")
    return resolve_rng(rng).gamma(shape, size=size) ** (1.0 / sigma)


def zg_power_target(sigma: float, tau: float, n: int, k: int) -> LogConcaveTarget:
    """
    Log density of Y = Z_g^sigma on (tau^sigma, inf):
    (k-1) log y + (n-1) log(1 - tau y^(-1/sigma)) - y, concave for 1 <= k <= n.
    """
    def log_density(y: float) -> float:
        w = tau * y ** (-1.0 / sigma)
        if w >= 1.0:
            return -math.inf
        return (k - 1) * math.log(y) + (n - 1) * math.log1p(-w) - y

    def derivative(y: float) -> float:
        w = tau * y ** (-1.0 / sigma)
        return (k - 1) / y + (n - 1) * (w / (sigma * y)) / (1.0 - w) - 1.0

    return LogConcaveTarget(log_density=log_density, derivative=derivative, lower=tau ** sigma, upper=math.inf)


def _zg_abscissae(target: LogConcaveTarget, n: int) -> list:
    lower = target.lower
    if n == 1:
        # slope is -1 everywhere
        return [lower + 0.5, lower + 1.0, lower + 2.0]
    hi = lower + max(1.0, lower)
    while target.derivative(hi) > 0:
        hi *= 2.0
    mode = brentq(target.derivative, lower * (1.0 + 1e-12), hi, xtol=1e-12, rtol=1e-10)
    spread = math.sqrt(max(mode, 1.0))
    return [lower + 0.5 * (mode - lower), mode, mode + spread, mode + 3.0 * spread]


def zg_sampler(sigma: float, tau: float, n: int, k: int) -> AdaptiveRejectionSampler:
    check_sigma(sigma)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got n={n}, k={k}")
    target = zg_power_target(sigma, tau, n, k)
    try:
        return AdaptiveRejectionSampler(target, _zg_abscissae(target, n))
    except (ValueError, OverflowError) as exc:
        raise SamplerError(f"could not initialise the Z_g sampler: {exc}") from exc


def sample_Zg(sigma: float, tau: float, n: int, k: int, rng: RngLike, size: Optional[int] = None):
    """
    Z_g with density proportional to z^(sigma k - 1) (1 - tau/z)^(n-1) exp(-z^sigma) on (tau, inf),
    sampled through the log-concave power Y = Z_g^sigma.
    """
    sampler = zg_sampler(sigma, tau, n, k)
    if size is None:
        return sampler.draw(rng) ** (1.0 / sigma)
    return sampler.draws(size, rng) ** (1.0 / sigma)


def sample_W(a: float, b, sigma: float, rng: RngLike, size: Optional[int] = None):
    """
    W_{a,b} = b R / (b R + G_a) with R exponentially tilted stable at tilt b and
    G_a ~ Gamma(a) independent. `b` may be an array of per-draw tilts.
    """
    if not a > 0:
        raise DomainError(f"W needs a > 0, got {a}")
    gen = resolve_rng(rng)
    tilts = np.asarray(b, dtype=float)
    if size is not None and tilts.ndim == 0:
        tilts = np.full(size, float(tilts))
    if np.any(tilts <= 0):
        raise DomainError("W needs positive tilts")

    r = ExpTiltedStableSampler(sigma, gen).draws(tilts)
    g = gen.gamma(a, size=r.size)
    br = np.atleast_1d(tilts) * r
    out = br / (br + g)
    return float(out[0]) if tilts.ndim == 0 else out
