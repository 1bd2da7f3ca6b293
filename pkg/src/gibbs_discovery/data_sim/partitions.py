from __future__ import annotations

import math

from scipy import special

from gibbs_discovery.core.errors import DomainError
from gibbs_discovery.data_sim.summary import RawSample
from gibbs_discovery.samplers.rng import RngLike, resolve_rng
from gibbs_discovery.special_fn import ln_pochhammer


def expected_frequency_share(sigma: float, l: int) -> float:
    """Almost sure limit of M_l / K_n under any Gibbs-type prior: sigma (1-sigma)_{l-1} / l!."""
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"sigma must lie in (0, 1), got {sigma}")
    if l < 1:
        raise DomainError(f"frequency must be at least 1, got {l}")
    log_share = math.log(sigma) + ln_pochhammer(1.0 - sigma, l - 1).log_abs - float(special.gammaln(l + 1))
    return math.exp(log_share)


def sample_pd_partition(sigma: float, theta: float, n: int, rng: RngLike) -> RawSample:
    """
    n draws from the PD predictive rule. The join mass n_j - sigma of species j is
    split as (n_j - 1) + (1 - sigma): a uniform repeat observation or a uniform species.
    """
    if not 0.0 < sigma < 1.0 or not theta > -sigma:
        raise DomainError(f"PD partition needs sigma in (0,1) and theta > -sigma, got ({sigma}, {theta})")
    if n < 1:
        raise DomainError(f"sample size must be positive, got {n}")
    gen = resolve_rng(rng)
    labels = [1]
    repeats = []
    k = 1
    for i in range(1, n):
        u = gen.random() * (theta + i)
        if u < theta + sigma * k:
            k += 1
            labels.append(k)
            continue
        if gen.random() * (i - sigma * k) < i - k:
            species = repeats[int(gen.integers(len(repeats)))]
        else:
            species = int(gen.integers(k)) + 1
        labels.append(species)
        repeats.append(species)
    return RawSample(tuple(labels))
