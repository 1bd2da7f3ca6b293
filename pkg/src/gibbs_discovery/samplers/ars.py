# ----------------------------- adaptive rejection sampling -----------------------------
"""
Adaptive rejection sampling for univariate log-concave densities.

The envelope is the piecewise-linear upper hull built from tangents at the
abscissae, and the squeeze is the chord between neighbouring abscissae.
Rejected points are added to the hull until `max_points` abscissae are held.
The adapted hull is kept across draws of one sampler.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from gibbs_discovery.core.errors import SamplerError
from gibbs_discovery.samplers.rng import RngLike, resolve_rng

log = logging.getLogger("samplers.ars")

_MAX_POINTS = 64
_MAX_BRACKET_STEPS = 60
_MAX_TRIALS = 100_000
_FLAT_SLOPE = 1e-12
_WARM_DRAWS = 200


@dataclass(frozen=True)
class LogConcaveTarget:
    log_density: Callable[[float], float]
    derivative: Callable[[float], float]
    lower: float = -math.inf
    upper: float = math.inf

    def inside(self, x: float) -> bool:
        return self.lower < x < self.upper


class Envelope:
    """Tangent upper hull and chord squeeze over sorted abscissae."""

    def __init__(self, x: Sequence[float], h: Sequence[float], dh: Sequence[float], lower: float, upper: float) -> None:
        self.x: List[float] = list(x)
        self.h: List[float] = list(h)
        self.dh: List[float] = list(dh)
        self.lower = lower
        self.upper = upper
        self._refresh()

    def _refresh(self) -> None:
        z = [self.lower]
        for j in range(len(self.x) - 1):
            x0, x1 = self.x[j], self.x[j + 1]
            d0, d1 = self.dh[j], self.dh[j + 1]
            if abs(d0 - d1) <= _FLAT_SLOPE * max(1.0, abs(d0), abs(d1)):
                cut = 0.5 * (x0 + x1)
            else:
                cut = (self.h[j + 1] - self.h[j] + x0 * d0 - x1 * d1) / (d0 - d1)
                cut = min(max(cut, x0), x1)
            z.append(cut)
        z.append(self.upper)
        self.z = z
        self._log_masses = np.array([self._segment_log_mass(j) for j in range(len(self.x))])
        if not np.all(np.isfinite(self._log_masses) | (self._log_masses == -math.inf)):
            raise SamplerError("envelope has infinite mass; abscissae do not bracket the mode")

    def _segment_log_mass(self, j: int) -> float:
        z0, z1 = self.z[j], self.z[j + 1]
        h, d, x = self.h[j], self.dh[j], self.x[j]
        width = z1 - z0
        if width <= 0:
            return -math.inf
        if abs(d) <= _FLAT_SLOPE:
            return h + math.log(width) if math.isfinite(width) else math.inf
        if d > 0:
            if not math.isfinite(z1):
                return math.inf
            return h + d * (z1 - x) + math.log(-math.expm1(-d * width)) - math.log(d)
        if not math.isfinite(z0):
            return math.inf
        return h + d * (z0 - x) + math.log(-math.expm1(d * width)) - math.log(-d)

    def upper_hull(self, value: float) -> float:
        j = bisect.bisect_left(self.z, value, 1, len(self.z) - 1) - 1
        return self.h[j] + self.dh[j] * (value - self.x[j])

    def squeeze(self, value: float) -> float:
        j = bisect.bisect_right(self.x, value)
        if j == 0 or j == len(self.x):
            return -math.inf
        x0, x1 = self.x[j - 1], self.x[j]
        return ((x1 - value) * self.h[j - 1] + (value - x0) * self.h[j]) / (x1 - x0)

    def insert(self, value: float, h: float, dh: float) -> None:
        j = bisect.bisect_left(self.x, value)
        if j < len(self.x) and self.x[j] == value:
            return
        self.x.insert(j, value)
        self.h.insert(j, h)
        self.dh.insert(j, dh)
        self._refresh()

    def sample(self, gen: np.random.Generator) -> float:
        weights = np.exp(self._log_masses - logsumexp(self._log_masses))
        j = min(int(np.searchsorted(np.cumsum(weights), gen.random(), side="right")), len(self.x) - 1)
        z0, z1 = self.z[j], self.z[j + 1]
        d = self.dh[j]
        u = gen.random()
        if abs(d) <= _FLAT_SLOPE:
            return z0 + u * (z1 - z0)
        if d > 0:
            return z1 + math.log(u + (1.0 - u) * math.exp(-d * (z1 - z0))) / d
        return z0 + math.log(u + (1.0 - u) * math.exp(d * (z1 - z0))) / d

    # ----------------------------- batch evaluation -----------------------------

    def sample_many(self, gen: np.random.Generator, size: int) -> np.ndarray:
        weights = np.exp(self._log_masses - logsumexp(self._log_masses))
        j = np.minimum(np.searchsorted(np.cumsum(weights), gen.random(size), side="right"), len(self.x) - 1)
        z = np.asarray(self.z)
        z0, z1 = z[j], z[j + 1]
        d = np.asarray(self.dh)[j]
        u = gen.random(size)
        flat = np.abs(d) <= _FLAT_SLOPE
        safe_d = np.where(flat, 1.0, d)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            width = z1 - z0
            rising = z1 + np.log(u + (1.0 - u) * np.exp(-safe_d * width)) / safe_d
            falling = z0 + np.log(u + (1.0 - u) * np.exp(safe_d * width)) / safe_d
            uniform = z0 + u * width
        return np.where(flat, uniform, np.where(d > 0, rising, falling))

    def upper_hull_many(self, values: np.ndarray) -> np.ndarray:
        j = np.searchsorted(np.asarray(self.z[1:-1]), values, side="left")
        x, h, dh = np.asarray(self.x), np.asarray(self.h), np.asarray(self.dh)
        return h[j] + dh[j] * (values - x[j])

    def squeeze_many(self, values: np.ndarray) -> np.ndarray:
        x = np.asarray(self.x)
        inside = (values >= x[0]) & (values <= x[-1])
        return np.where(inside, np.interp(values, x, np.asarray(self.h)), -np.inf)


class AdaptiveRejectionSampler:
    def __init__(self, target: LogConcaveTarget, abscissae: Sequence[float], max_points: int = _MAX_POINTS) -> None:
        self.target = target
        self.max_points = max_points
        self.proposals = 0
        self.accepted = 0
        points = sorted({float(a) for a in abscissae if target.inside(float(a))})
        if not points:
            raise SamplerError("no initial abscissa lies inside the target's support")
        points = self._bracket(points)
        h = [target.log_density(p) for p in points]
        dh = [target.derivative(p) for p in points]
        for a, b in zip(dh, dh[1:]):
            if b > a + 1e-9 * max(1.0, abs(a)):
                raise SamplerError("target log density is not concave at the initial abscissae")
        self.envelope = Envelope(points, h, dh, target.lower, target.upper)

    def _bracket(self, points: List[float]) -> List[float]:
        """Extend the abscissae until the outer slopes point back into an unbounded support."""
        t = self.target
        spread = max(1.0, points[-1] - points[0])
        if not math.isfinite(t.lower):
            step = spread
            for _ in range(_MAX_BRACKET_STEPS):
                if t.derivative(points[0]) > 0:
                    break
                points.insert(0, points[0] - step)
                step *= 2.0
            else:
                raise SamplerError("could not find an abscissa with positive slope")
        if not math.isfinite(t.upper):
            step = spread
            for _ in range(_MAX_BRACKET_STEPS):
                if t.derivative(points[-1]) < 0:
                    break
                points.append(points[-1] + step)
                step *= 2.0
            else:
                raise SamplerError("could not find an abscissa with negative slope")
        return points

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else float("nan")

    def draw(self, rng: RngLike) -> float:
        gen = resolve_rng(rng)
        env = self.envelope
        for _ in range(_MAX_TRIALS):
            x = env.sample(gen)
            if not self.target.inside(x):
                continue
            self.proposals += 1
            w = gen.random()
            upper = env.upper_hull(x)
            if w <= math.exp(env.squeeze(x) - upper):
                self.accepted += 1
                return x
            h = self.target.log_density(x)
            if w <= math.exp(h - upper):
                self.accepted += 1
                return x
            if len(env.x) < self.max_points:
                env.insert(x, h, self.target.derivative(x))
        raise SamplerError("adaptive rejection sampling did not accept a point")

    def draws(self, count: int, rng: RngLike) -> np.ndarray:
        """
        `count` draws. The first few adapt the hull one at a time; the rest are
        proposed in batches from the frozen envelope.
        """
        gen = resolve_rng(rng)
        count = int(count)
        warm = min(count, _WARM_DRAWS)
        out = [self.draw(gen) for _ in range(warm)]
        env = self.envelope
        while len(out) < count:
            need = count - len(out)
            batch = env.sample_many(gen, need + need // 4 + 8)
            batch = batch[(batch > self.target.lower) & (batch < self.target.upper)]
            w = gen.random(batch.size)
            upper = env.upper_hull_many(batch)
            accept = w <= np.exp(env.squeeze_many(batch) - upper)
            for i in np.flatnonzero(~accept):
                accept[i] = w[i] <= math.exp(self.target.log_density(float(batch[i])) - upper[i])
            self.proposals += batch.size
            self.accepted += int(accept.sum())
            out.extend(batch[accept][:need].tolist())
        log.debug("ARS: %d draws, %d abscissae, acceptance %.3f", count, len(env.x), self.acceptance_rate)
        return np.asarray(out[:count], dtype=float)


def default_abscissae(target: LogConcaveTarget) -> List[float]:
    """Three points around the mode, found by walking the slope from a point inside the support."""
    lo, hi = target.lower, target.upper
    if math.isfinite(lo) and math.isfinite(hi):
        return [lo + f * (hi - lo) for f in (0.25, 0.5, 0.75)]
    x = lo + 1.0 if math.isfinite(lo) else hi - 1.0 if math.isfinite(hi) else 0.0
    rising = target.derivative(x) > 0
    bound = hi if rising else lo
    step = 1.0
    mode = x
    for _ in range(_MAX_BRACKET_STEPS):
        y = x + step if rising else x - step
        if not target.inside(y):
            y = 0.5 * (x + bound)
        if (target.derivative(y) > 0) != rising:
            a, b = sorted((x, y))
            da, db = target.derivative(a), target.derivative(b)
            mode = brentq(target.derivative, a, b) if da > 0 > db else (a if abs(da) <= abs(db) else b)
            break
        x = mode = y
        step *= 2.0
        if abs(x - bound) <= 1e-12 * max(1.0, abs(bound)):
            break
    else:
        raise SamplerError("could not locate the mode of the target")

    half = 0.5 * max(1.0, abs(mode))
    points = []
    for p, edge in ((mode - half, lo), (mode, None), (mode + half, hi)):
        points.append(p if edge is None or target.inside(p) else 0.5 * (mode + edge))
    return sorted(set(points))


def sample_log_concave(
    target: LogConcaveTarget,
    rng: RngLike,
    size: Optional[int] = None,
    *,
    abscissae: Optional[Sequence[float]] = None,
):
    """One draw, or `size` draws, from a log-concave target; abscissae default to points around its mode."""
    sampler = AdaptiveRejectionSampler(target, default_abscissae(target) if abscissae is None else abscissae)
    if size is None:
        return sampler.draw(rng)
    return sampler.draws(size, rng)
