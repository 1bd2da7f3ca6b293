from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Sequence, Tuple

from gibbs_discovery.core.errors import DataValidationError, DomainError
from gibbs_discovery.estimators import SampleSummary


@dataclass(frozen=True)
class RawSample:
    labels: Tuple[Hashable, ...]

    def __post_init__(self) -> None:
        if not self.labels:
            raise DomainError("a raw sample needs at least one observation")
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    def species_counts(self) -> Counter:
        return Counter(self.labels)


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    n: int
    k: int
    sum_m: int
    sum_lm: int

    @property
    def k_residual(self) -> int:
        return self.k - self.sum_m

    @property
    def n_residual(self) -> int:
        return self.n - self.sum_lm

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n": self.n,
            "k": self.k,
            "sum_m": self.sum_m,
            "sum_lm": self.sum_lm,
            "k_residual": self.k_residual,
            "n_residual": self.n_residual,
        }


def summarize(raw: RawSample) -> SampleSummary:
    frequencies = Counter(raw.species_counts().values())
    return SampleSummary(n=raw.n, k=sum(frequencies.values()), m=dict(frequencies))


def validate(s: SampleSummary) -> ValidationReport:
    sum_m = sum(s.m.values())
    sum_lm = sum(l * c for l, c in s.m.items())
    return ValidationReport(passed=(sum_m == s.k and sum_lm == s.n), n=s.n, k=s.k, sum_m=sum_m, sum_lm=sum_lm)


def synthesize(s: SampleSummary) -> RawSample:
    """A raw sample realizing the summary: species 1..k in order of increasing frequency."""
    report = validate(s)
    if not report.passed:
        raise DataValidationError("cannot realize an inconsistent summary", report=report)
    labels = []
    species = 0
    for l, count in sorted(s.m.items()):
        for _ in range(count):
            species += 1
            labels.extend([species] * l)
    return RawSample(tuple(labels))


def labels_from_lines(lines: Sequence[str]) -> RawSample:
    labels = [line.strip() for line in lines if line.strip()]
    return RawSample(tuple(labels))
