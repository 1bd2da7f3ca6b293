from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Tuple

from gibbs_discovery.core.errors import ConfigError

THREADS_ENV = "GIBBS_DISCOVERY_THREADS"
LOG_LEVEL_ENV = "GIBBS_DISCOVERY_LOG_LEVEL"
_MIN_WEIGHT_DRAWS = 1_000


@dataclass(frozen=True)
class SamplingSettings:
    draws: int = 5000
    level: float = 0.95
    seed: Optional[int] = None
    weight_draws: int = 100_000
    moments: int = 10


@dataclass(frozen=True)
class FitSettings:
    max_evaluations: int = 2000
    simplex_tolerance: float = 1e-6
    sigma_grid: Tuple[float, ...] = (0.2, 0.4, 0.6, 0.8)
    location_grid: Tuple[float, ...] = (0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class SimulationSettings:
    dist: str = "zeta"
    s: float = 1.1
    n: int = 1000
    replicates: int = 500
    groups: int = 5
    seed: Optional[int] = None
    ratio_sizes: Tuple[int, ...] = ()
    ratio_replicates: int = 10


@dataclass(frozen=True)
class RuntimeSettings:
    threads: int = 1
    log_level: str = "INFO"


@dataclass(frozen=True)
class AppSettings:
    sampling: SamplingSettings = field(default_factory=SamplingSettings)
    fit: FitSettings = field(default_factory=FitSettings)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    runtime: RuntimeSettings = field(default_factory=RuntimeSettings)


def _env_threads(env: Mapping[str, str]) -> int:
    raw = env.get(THREADS_ENV, "").strip()
    if not raw:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        threads = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}.") from exc
    if threads < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1, got {threads}.")
    return threads


def load_settings(
    env: Mapping[str, str],
    *,
    sampling: Optional[Mapping[str, Any]] = None,
    fit: Optional[Mapping[str, Any]] = None,
    simulation: Optional[Mapping[str, Any]] = None,
    log_level: Optional[str] = None,
) -> AppSettings:
    """
    Build settings from keyword overrides, then environment, then defaults.
    Overrides with value None are ignored so argparse namespaces can be passed through.
    """
    def clean(values: Optional[Mapping[str, Any]]) -> dict:
        return {k: v for k, v in (values or {}).items() if v is not None}

    runtime = RuntimeSettings(
        threads=_env_threads(env),
        log_level=(log_level or env.get(LOG_LEVEL_ENV) or "INFO").upper(),
    )
    try:
        settings = AppSettings(
            sampling=SamplingSettings(**clean(sampling)),
            fit=FitSettings(**clean(fit)),
            simulation=SimulationSettings(**clean(simulation)),
            runtime=runtime,
        )
    except TypeError as exc:
        raise ConfigError(f"Unknown setting: {exc}") from exc

    if not 0.0 < settings.sampling.level < 1.0:
        raise ConfigError(f"Interval level must lie in (0, 1), got {settings.sampling.level}.")
    if settings.sampling.draws < 1:
        raise ConfigError("Draw count must be positive.")
    if settings.sampling.weight_draws < _MIN_WEIGHT_DRAWS:
        raise ConfigError(f"Monte Carlo weights need at least {_MIN_WEIGHT_DRAWS} draws, got {settings.sampling.weight_draws}.")
    if settings.sampling.moments < 2:
        raise ConfigError(f"Moment inversion needs at least two moments, got {settings.sampling.moments}.")
    return settings


def require_seed(seed: Optional[int], command: str) -> int:
    if seed is None:
        raise ConfigError(f"'{command}' is stochastic and needs an explicit --seed.")
    return int(seed)
