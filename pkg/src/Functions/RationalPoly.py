from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence, Union

from src.Functions.RadicalComplex import RadicalComplex

Coefficient = Union[Fraction, RadicalComplex]


def _coerce(value) -> Coefficient:
    if isinstance(value, RadicalComplex):
        return value
    return Fraction(value)


class RationalPoly:
    """Univariate polynomial in alpha with exact coefficients.

    Coefficients are Fractions or RadicalComplex values; index k holds the
    coefficient of alpha**k. Trailing zeros are trimmed, so the zero
    polynomial has no coefficients and degree -1.
    """

    __slots__ = ("_coefficients",)

    def __init__(self, coefficients: Sequence = ()):
        coeffs: List[Coefficient] = [_coerce(c) for c in coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        self._coefficients = tuple(coeffs)

    @classmethod
    def monomial(cls, power: int, coefficient=1) -> "RationalPoly":
        if power < 0:
            raise ValueError(f"monomial power must be non-negative, got {power}")
        return cls([0] * power + [coefficient])

    @property
    def coefficients(self) -> List[Coefficient]:
        return list(self._coefficients)

    @property
    def degree(self) -> int:
        return len(self._coefficients) - 1

    def coefficient(self, power: int) -> Coefficient:
        if 0 <= power < len(self._coefficients):
            return self._coefficients[power]
        return Fraction(0)

    def is_zero(self) -> bool:
        return not self._coefficients

    def is_rational(self) -> bool:
        return all(
            not isinstance(c, RadicalComplex) or c.is_rational() for c in self._coefficients
        )

    def to_rational(self) -> "RationalPoly":
        """Same polynomial with every coefficient as a Fraction (must be rational)."""
        return RationalPoly(
            [c.to_fraction() if isinstance(c, RadicalComplex) else c for c in self._coefficients]
        )

    def __add__(self, other) -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        size = max(len(self._coefficients), len(other._coefficients))
        return RationalPoly([self.coefficient(k) + other.coefficient(k) for k in range(size)])

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly([-c for c in self._coefficients])

    def __sub__(self, other) -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            other = RationalPoly([other])
        return self + (-other)

    def __rsub__(self, other) -> "RationalPoly":
        return (-self) + other

    def __mul__(self, other) -> "RationalPoly":
        if not isinstance(other, RationalPoly):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        out: List[Coefficient] = [Fraction(0)] * (len(self._coefficients) + len(other._coefficients) - 1)
        for i, a in enumerate(self._coefficients):
            if a == 0:
                continue
            for j, b in enumerate(other._coefficients):
                if b != 0:
                    out[i + j] = out[i + j] + a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def scale(self, factor) -> "RationalPoly":
        factor = _coerce(factor)
        return RationalPoly([c * factor for c in self._coefficients])

    def __pow__(self, exponent: int) -> "RationalPoly":
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result = RationalPoly([1])
        for _ in range(exponent):
            result = result * self
        return result

    def evaluate(self, alpha) -> Coefficient:
        """Exact Horner evaluation at a rational (or radical) point."""
        alpha = _coerce(alpha)
        result: Coefficient = Fraction(0)
        for c in reversed(self._coefficients):
            result = result * alpha + c
        return result

    __call__ = evaluate

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalPoly):
            return NotImplemented
        if len(self._coefficients) != len(other._coefficients):
            return False
        return all(a == b for a, b in zip(self._coefficients, other._coefficients))

    def __hash__(self) -> int:
        return hash(self._coefficients)

    def __repr__(self) -> str:
        return f"RationalPoly({[str(c) for c in self._coefficients]})"

    def __str__(self) -> str:
        if not self._coefficients:
            return "0"
        return " + ".join(
            f"({c})*a^{k}" for k, c in enumerate(self._coefficients) if c != 0
        )
