"""Random variate generators: stable family, ARS, posterior latent variables."""

from gibbs_discovery.samplers.ars import AdaptiveRejectionSampler, LogConcaveTarget, sample_log_concave
from gibbs_discovery.samplers.latent import sample_W, sample_Zg, sample_Zp
from gibbs_discovery.samplers.rng import RngLike, RngStream, resolve_rng
from gibbs_discovery.samplers.stable import (
    ExpTiltedStableSampler,
    sample_exp_tilted_stable,
    sample_poly_tilted_stable,
    sample_positive_stable,
)

__all__ = [
    "AdaptiveRejectionSampler",
    "ExpTiltedStableSampler",
    "LogConcaveTarget",
    "RngLike",
    "RngStream",
    "resolve_rng",
    "sample_W",
    "sample_Zg",
    "sample_Zp",
    "sample_exp_tilted_stable",
    "sample_log_concave",
    "sample_poly_tilted_stable",
    "sample_positive_stable",
]
