"""Extended-range scalars stored as sign plus base-2 logarithm of the magnitude.

Ordinary floats die around 2**+-1074; the lacunary spectra handled by this
package involve radii like 2**(-2**40) whose powers and products must still be
exact.  A ``LogScalar`` keeps the magnitude as ``log2_mag`` (a float), so
multiplication is float addition of exponents and never overflows for
``log2_mag`` up to 2**50.  Addition is performed with the usual log-sum-exp
trick.  Relative precision of add/sub is about 2**-50; the representation
itself resolves magnitudes to roughly ``ulp(log2_mag) * ln 2`` relative, which
is ~4e-13 at log2_mag = 900 and exact on dyadic-rational exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_LN2 = math.log(2.0)
_LOG2_LN2 = math.log2(_LN2)

__all__ = [
    "LogScalar",
    "ZERO",
    "ONE",
    "pairwise_sum",
    "one_minus_exp2_neg",
]


@dataclass(frozen=True, slots=True)
class LogScalar:
    sign: int
    log2_mag: float

    # -- construction -----------------------------------------------------

    @classmethod
    def from_float(cls, x: float) -> "LogScalar":
        if x == 0.0:
            return ZERO
        if math.isnan(x):
            raise ValueError("cannot represent NaN")
        s = 1 if x > 0 else -1
        ax = abs(x)
        if math.isinf(ax):
            return cls(s, math.inf)
        m, e = math.frexp(ax)  # ax = m * 2**e, m in [0.5, 1)
        return cls(s, e + math.log2(m))

    @classmethod
    def exp2(cls, log2_value: float) -> "LogScalar":
        """Positive scalar 2**log2_value without ever materializing it."""
        return cls(1, float(log2_value))

    # -- conversions -------------------------------------------------------

    def to_float(self) -> float:
        if self.sign == 0:
            return 0.0
        lm = self.log2_mag
        if lm >= 1025.0:
            return math.inf * self.sign
        if lm <= -1080.0:
            return 0.0 * self.sign
        e = math.floor(lm)
        return self.sign * math.ldexp(2.0 ** (lm - e), int(e))

    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def log2(self) -> float:
        """log2 of the magnitude; -inf for zero."""
        return -math.inf if self.sign == 0 else self.log2_mag

    # -- arithmetic ---------------------------------------------------------

    def __mul__(self, other: "LogScalar") -> "LogScalar":
        s = self.sign * other.sign
        if s == 0:
            return ZERO
        return LogScalar(s, self.log2_mag + other.log2_mag)

    def __truediv__(self, other: "LogScalar") -> "LogScalar":
        if other.sign == 0:
            raise ZeroDivisionError("LogScalar division by zero")
        if self.sign == 0:
            return ZERO
        return LogScalar(self.sign * other.sign, self.log2_mag - other.log2_mag)

    def __neg__(self) -> "LogScalar":
        if self.sign == 0:
            return ZERO
        return LogScalar(-self.sign, self.log2_mag)

    def __add__(self, other: "LogScalar") -> "LogScalar":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        a, b = self, other
        if a.log2_mag < b.log2_mag:
            a, b = b, a
        d = b.log2_mag - a.log2_mag  # <= 0
        if a.sign == b.sign:
            if d < -1100.0:
                return a
            return LogScalar(a.sign, a.log2_mag + math.log1p(2.0**d) / _LN2)
        # opposite signs: |a| >= |b|
        if d == 0.0:
            return ZERO
        if d < -1100.0:
            return a
        return LogScalar(a.sign, a.log2_mag + math.log1p(-(2.0**d)) / _LN2)

    def __sub__(self, other: "LogScalar") -> "LogScalar":
        return self + (-other)

    def __pow__(self, p: float) -> "LogScalar":
        if self.sign == 0:
            if p <= 0:
                raise ZeroDivisionError("0 ** nonpositive power")
            return ZERO
        if self.sign < 0:
            if p != round(p):
                raise ValueError("fractional power of a negative LogScalar")
            s = -1 if int(round(p)) % 2 else 1
            return LogScalar(s, self.log2_mag * p)
        return LogScalar(1, self.log2_mag * p)

    def sqrt(self) -> "LogScalar":
        if self.sign < 0:
            raise ValueError("sqrt of a negative LogScalar")
        if self.sign == 0:
            return ZERO
        return LogScalar(1, 0.5 * self.log2_mag)

    def mul_pow2(self, e: float) -> "LogScalar":
        """Scale by 2**e."""
        if self.sign == 0:
            return ZERO
        return LogScalar(self.sign, self.log2_mag + e)

    def abs(self) -> "LogScalar":
        if self.sign == 0:
            return ZERO
        return LogScalar(1, self.log2_mag)

    # -- comparisons ---------------------------------------------------------

    def __lt__(self, other: "LogScalar") -> bool:
        return _cmp(self, other) < 0

    def __le__(self, other: "LogScalar") -> bool:
        return _cmp(self, other) <= 0

    def __gt__(self, other: "LogScalar") -> bool:
        return _cmp(self, other) > 0

    def __ge__(self, other: "LogScalar") -> bool:
        return _cmp(self, other) >= 0

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        if self.sign == 0:
            return "LogScalar(0)"
        s = "-" if self.sign < 0 else ""
        return f"LogScalar({s}2^{self.log2_mag:.6g})"


def _cmp(a: LogScalar, b: LogScalar) -> int:
    if a.sign != b.sign:
        return -1 if a.sign < b.sign else 1
    if a.sign == 0:
        return 0
    if a.log2_mag == b.log2_mag:
        return 0
    bigger = a.log2_mag > b.log2_mag
    if a.sign > 0:
        return 1 if bigger else -1
    return -1 if bigger else 1


ZERO = LogScalar(0, 0.0)
ONE = LogScalar(1, 0.0)


def pairwise_sum(values: list[LogScalar]) -> LogScalar:
    """Sum with pairwise reduction over the given order.

    The fixed reduction tree makes results independent of any parallel
    evaluation of the inputs, and keeps cancellation error near 2**-50 per
    level instead of per element.
    """
    n = len(values)
    if n == 0:
        return ZERO
    if n == 1:
        return values[0]
    if n == 2:
        return values[0] + values[1]
    half = n // 2
    return pairwise_sum(values[:half]) + pairwise_sum(values[half:])


def one_minus_exp2_neg(y: LogScalar) -> LogScalar:
    """1 - 2**(-y) for y >= 0, accurate over the whole LogScalar range.

    Needed for power-mass differences b**m - a**m = b**m * (1 - 2**(-m*d))
    where the gap d = log2(b/a) may be far below float resolution relative
    to log2(b).
    """
    if y.sign < 0:
        raise ValueError("one_minus_exp2_neg requires y >= 0")
    if y.sign == 0:
        return ZERO
    if y.log2_mag > 6.0:  # y > 64: 1 - 2**-64 rounds to 1 at our precision
        return ONE
    yf = y.to_float()
    if yf >= 1e-8:
        return LogScalar.from_float(-math.expm1(-yf * _LN2))
    # tiny y: 1 - 2**-y = y*ln2 * (1 + O(y))
    return LogScalar(1, y.log2_mag + _LOG2_LN2)
