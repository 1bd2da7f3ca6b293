from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from gibbs_discovery.core.errors import DomainError, ZeroDenominatorError
from gibbs_discovery.estimators import SampleSummary
from gibbs_discovery.samplers.rng import RngLike, resolve_rng


@dataclass(frozen=True)
class MetricsReport:
    sse: float
    per_l: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    ratio_r12: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "sse": self.sse,
            "per_l": {str(l): {"estimate": e, "truth": t} for l, (e, t) in sorted(self.per_l.items())},
            "ratio_r12": self.ratio_r12,
        }


def _squared_gap(a: Mapping[int, float], b: Mapping[int, float]) -> float:
    keys = set(a) | set(b)
    return float(sum((a.get(l, 0.0) - b.get(l, 0.0)) ** 2 for l in sorted(keys)))


def sse(estimates: Mapping[int, float], truths: Mapping[int, float]) -> float:
    return _squared_gap(estimates, truths)


def metrics_report(
    estimates: Mapping[int, float], truths: Mapping[int, float], ratio_r12: Optional[float] = None
) -> MetricsReport:
    keys = sorted(set(estimates) | set(truths))
    per_l = {l: (estimates.get(l, 0.0), truths.get(l, 0.0)) for l in keys}
    return MetricsReport(sse=sse(estimates, truths), per_l=per_l, ratio_r12=ratio_r12)


def approx_ratio(exact: Mapping[int, float], first: Mapping[int, float], second: Mapping[int, float]) -> float:
    """Squared error of the first order approximation over that of the second order one."""
    keys = set(exact) | set(first) | set(second)
    if all(first.get(l, 0.0) == second.get(l, 0.0) for l in keys):
        return 1.0
    denominator = _squared_gap(second, exact)
    if denominator == 0.0:
        raise ZeroDenominatorError("second order approximation is exact; the ratio is unbounded")
    return _squared_gap(first, exact) / denominator


def group_by_k(samples: Sequence[SampleSummary], groups: int) -> List[List[int]]:
    """Split sample indices into `groups` equal-size quantile groups of k, ties by index."""
    if groups < 1:
        raise DomainError(f"group count must be positive, got {groups}")
    order = sorted(range(len(samples)), key=lambda i: (samples[i].k, i))
    return [chunk.tolist() for chunk in np.array_split(np.asarray(order, dtype=int), groups)]


def pick_representatives(groups: Sequence[Sequence[int]], rng: RngLike) -> List[int]:
    gen = resolve_rng(rng)
    return [int(group[int(gen.integers(len(group)))]) for group in groups if len(group)]
