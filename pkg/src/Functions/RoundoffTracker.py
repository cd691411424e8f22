"""Doubles carrying a rigorous absolute error bound.

Each operation is performed in IEEE double precision and contributes at most
EPSILON * |result| of fresh rounding error on top of the propagated input
errors. Error bounds are kept as exact Fractions so the bookkeeping itself
never rounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

EPSILON = Fraction(1, 2 ** 52)
# below the normal range the relative model fails; charge the subnormal spacing
SUBNORMAL_FLOOR = Fraction(1, 2 ** 1074)
SMALLEST_NORMAL = 2.0 ** -1022


def _fresh(result: float) -> Fraction:
    error = EPSILON * abs(Fraction(result))
    if abs(result) < SMALLEST_NORMAL:
        error += SUBNORMAL_FLOOR
    return error


@dataclass(frozen=True)
class TrackedFloat:
    value: float
    error: Fraction = Fraction(0)

    @classmethod
    def exact(cls, value: Union[int, float]) -> "TrackedFloat":
        return cls(float(value), Fraction(0))

    @classmethod
    def approximating(cls, exact: Fraction) -> "TrackedFloat":
        """Nearest double to an exact rational, with its true distance as the error."""
        value = float(exact)
        return cls(value, abs(Fraction(value) - Fraction(exact)))

    @classmethod
    def from_relative(cls, value: float, relative_bound: float) -> "TrackedFloat":
        """Wrap a rounded value known to satisfy |x - value| <= b|x|."""
        b = Fraction(relative_bound)
        return cls(value, b * abs(Fraction(value)) / (1 - b))

    def _coerce(self, other) -> "TrackedFloat":
        if isinstance(other, TrackedFloat):
            return other
        return TrackedFloat.exact(other)

    def __add__(self, other) -> "TrackedFloat":
        other = self._coerce(other)
        result = self.value + other.value
        return TrackedFloat(result, self.error + other.error + _fresh(result))

    __radd__ = __add__

    def __neg__(self) -> "TrackedFloat":
        return TrackedFloat(-self.value, self.error)

    def __sub__(self, other) -> "TrackedFloat":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TrackedFloat":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TrackedFloat":
        other = self._coerce(other)
        result = self.value * other.value
        propagated = (
            abs(Fraction(self.value)) * other.error
            + abs(Fraction(other.value)) * self.error
            + self.error * other.error
        )
        return TrackedFloat(result, propagated + _fresh(result))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "TrackedFloat":
        other = self._coerce(other)
        denominator = abs(Fraction(other.value))
        if denominator <= other.error:
            raise ZeroDivisionError("divisor interval contains zero")
        result = self.value / other.value
        propagated = (
            self.error * denominator + abs(Fraction(self.value)) * other.error
        ) / (denominator * (denominator - other.error))
        return TrackedFloat(result, propagated + _fresh(result))

    @property
    def lower(self) -> Fraction:
        return Fraction(self.value) - self.error

    @property
    def upper(self) -> Fraction:
        return Fraction(self.value) + self.error

    def certified_sign(self) -> int:
        """+1 or -1 when the error bound excludes zero, else 0."""
        if self.lower > 0:
            return 1
        if self.upper < 0:
            return -1
        return 0


def horner(coefficients: Sequence[TrackedFloat], x: TrackedFloat) -> TrackedFloat:
    """p = p_n; p = p*x + p_j for j = n-1..0."""
    if not coefficients:
        return TrackedFloat.exact(0)
    result = coefficients[-1]
    for c in reversed(coefficients[:-1]):
        result = result * x + c
    return result


def oliver_bound(degree: int, epsilon: Fraction, sup_coefficient: Fraction) -> Fraction:
    """(n+1)[exp((2n+1)eps) - 1] sup|p_j|, using exp(x) - 1 <= x/(1 - x)."""
    x = (2 * degree + 1) * Fraction(epsilon)
    if x >= 1:
        raise ValueError(f"(2n+1)*eps = {float(x)} is too large for the exponential bound")
    return (degree + 1) * (x / (1 - x)) * sup_coefficient
