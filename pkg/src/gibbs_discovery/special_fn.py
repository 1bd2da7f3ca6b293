# ----------------------------- special functions -----------------------------
"""
Special functions and signed log-space arithmetic.

Every product of Pochhammer symbols and gamma ratios in the package is carried
as a SignedLog; values are exponentiated only at the API boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy import special

from gibbs_discovery.core.errors import DomainError

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 10_000
_CANCEL_REL = 1e-15
_DIRECT_POCHHAMMER_MAX = 64


@dataclass(frozen=True)
class SignedLog:
    sign: int
    log_abs: float

    @classmethod
    def zero(cls) -> "SignedLog":
        return cls(0, -math.inf)

    @classmethod
    def one(cls) -> "SignedLog":
        return cls(1, 0.0)

    @classmethod
    def from_float(cls, value: float) -> "SignedLog":
        if value == 0.0:
            return cls.zero()
        return cls(1 if value > 0 else -1, math.log(abs(value)))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_abs)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "SignedLog") -> "SignedLog":
        if other.sign == 0:
            raise ZeroDivisionError("division by a SignedLog zero")
        if self.sign == 0:
            return SignedLog.zero()
        return SignedLog(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "SignedLog":
        return SignedLog(-self.sign, self.log_abs)

    def scale(self, log_factor: float) -> "SignedLog":
        """Multiply by the positive number exp(log_factor)."""
        if self.sign == 0:
            return self
        return SignedLog(self.sign, self.log_abs + log_factor)


def ln_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    return float(special.gammaln(x))


def log_binomial(n: int, k: int) -> float:
    return float(special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1))


def ln_pochhammer(a: float, n: int) -> SignedLog:
    """Sign and log-magnitude of the rising factorial (a)_n = a (a+1) ... (a+n-1)."""
    if n < 0:
        raise DomainError(f"Pochhammer length must be nonnegative, got {n}")
    if n == 0:
        return SignedLog.one()

    if a <= 0 and float(a).is_integer() and -a < n:
        return SignedLog.zero()

    if n <= _DIRECT_POCHHAMMER_MAX:
        factors = a + np.arange(n, dtype=float)
        negatives = int(np.count_nonzero(factors < 0))
        return SignedLog(-1 if negatives % 2 else 1, float(np.log(np.abs(factors)).sum()))

    if a > 0:
        return SignedLog(1, float(special.gammaln(a + n) - special.gammaln(a)))

    # negative factors a, ..., a+m-1 mirror onto the positive run b, ..., b+m-1
    m = min(n, int(math.ceil(-a)))
    b = -a - (m - 1)
    log_neg = float(special.gammaln(b + m) - special.gammaln(b))
    log_pos = float(special.gammaln(a + n) - special.gammaln(a + m)) if n > m else 0.0
    return SignedLog(-1 if m % 2 else 1, log_neg + log_pos)


def _upper_gamma_cf_ln(a: float, x: float) -> float:
    """log Gamma(a; x) by the Legendre continued fraction (modified Lentz), valid for x > a + 1."""
    b = x + 1.0 - a
    c = 1.0 / _CF_TINY
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = b + an / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return -x + a * math.log(x) + math.log(h)


def _upper_gamma_positive_ln(a: float, x: float) -> float:
    q = float(special.gammaincc(a, x))
    if q > 1e-280:
        return math.log(q) + float(special.gammaln(a))
    return _upper_gamma_cf_ln(a, x)


def upper_incomplete_gamma_ln(a: float, x: float) -> SignedLog:
    """
    Sign and log of Gamma(a; x) = int_x^inf t^(a-1) e^(-t) dt for any real a and x > 0.

    a > 0 uses scipy's regularized function. For a <= 0 and x > 1 the continued
    fraction converges (x > a + 1); for x <= 1 the recurrence
    Gamma(a; x) = (Gamma(a+1; x) - x^a e^(-x)) / a is run downward from the
    fractional part of a, which is stable there since x / |a| stays small.
    """
    if not x > 0:
        raise DomainError(f"upper incomplete gamma needs x > 0, got {x}")
    if a > 0:
        return SignedLog(1, _upper_gamma_positive_ln(a, x))
    if x > 1.0:
        return SignedLog(1, _upper_gamma_cf_ln(a, x))

    steps = int(math.ceil(-a))
    start = a + steps
    if start == 0.0:
        current = SignedLog(1, math.log(float(special.exp1(x))))
    else:
        current = SignedLog(1, _upper_gamma_positive_ln(start, x))

    log_x = math.log(x)
    for j in range(1, steps + 1):
        s = start - j
        boundary = SignedLog(-1, s * log_x - x)
        current = signed_log_sum([current, boundary]) / SignedLog.from_float(s)
    return current


def signed_log_sum(terms: Iterable[SignedLog]) -> SignedLog:
    """Sum SignedLog terms exactly in sign, with log-sum-exp inside each sign class."""
    items = list(terms)
    pos = [t.log_abs for t in items if t.sign > 0]
    neg = [t.log_abs for t in items if t.sign < 0]

    log_pos = float(special.logsumexp(pos)) if pos else -math.inf
    log_neg = float(special.logsumexp(neg)) if neg else -math.inf
    if log_pos == -math.inf and log_neg == -math.inf:
        return SignedLog.zero()
    if log_neg == -math.inf:
        return SignedLog(1, log_pos)
    if log_pos == -math.inf:
        return SignedLog(-1, log_neg)

    hi, lo, sign = (log_pos, log_neg, 1) if log_pos >= log_neg else (log_neg, log_pos, -1)
    ratio = math.exp(lo - hi)
    if 1.0 - ratio <= _CANCEL_REL:
        return SignedLog.zero()
    return SignedLog(sign, hi + math.log1p(-ratio))


def max_log_abs(terms: Iterable[SignedLog]) -> float:
    return max((t.log_abs for t in terms if t.sign != 0), default=-math.inf)
