"""Exact complex scalars of the form sum_d (a_d + i b_d) * sqrt(d).

Every coefficient that shows up in the K-point computation (the rotation
phases, the unit complexes z_hat, lattice norms and the series coefficients)
lives in this ring. Values are immutable and hashable.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

import mpmath  # type: ignore
from sympy import factorint  # type: ignore

from src.Functions.Errors import (
    ConversionBoundExceeded,
    ConversionOverflow,
    MultiTermInverse,
    ZeroInverse,
)

Rational = Union[int, Fraction]
Pair = Tuple[Fraction, Fraction]

MACHINE_EPSILON = 2.0 ** -52
UNIT_ROUNDOFF = 2.0 ** -53

logger = logging.getLogger(__name__)


@dataclass
class ScalarConfig:
    """Tunables for converting exact scalars to doubles."""
    working_epsilon: float = 16 * 2.0 ** -52   # epsilon consumed by every certificate
    reference_precision_bits: int = 256        # first precision tried on cancellation
    max_precision_bits: int = 8192


DEFAULT_SCALAR_CONFIG = ScalarConfig()


@lru_cache(maxsize=None)
def squarefree_split(n: int) -> Tuple[int, int]:
    """Return (k, d) with n = k**2 * d and d squarefree."""
    if n <= 0:
        raise ValueError(f"squarefree_split needs a positive integer, got {n}")
    k, d = 1, 1
    for prime, exponent in factorint(n).items():
        k *= prime ** (exponent // 2)
        if exponent % 2:
            d *= prime
    return k, d


def _as_fraction(value) -> Optional[Fraction]:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return None


class RadicalComplex:
    """Finite sum of Gaussian rationals times square roots of squarefree integers."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Optional[Mapping[int, Tuple[Rational, Rational]]] = None):
        merged: Dict[int, Pair] = {}
        for radicand, (re_part, im_part) in (terms or {}).items():
            k, d = squarefree_split(int(radicand))
            re_part, im_part = Fraction(re_part) * k, Fraction(im_part) * k
            if d in merged:
                old_re, old_im = merged[d]
                re_part, im_part = old_re + re_part, old_im + im_part
            merged[d] = (re_part, im_part)
        self._terms = {d: c for d, c in merged.items() if c[0] or c[1]}
        self._hash: Optional[int] = None

    @classmethod
    def _canonical(cls, terms: Dict[int, Pair]) -> "RadicalComplex":
        # keys are already squarefree; only zero entries need pruning
        value = cls.__new__(cls)
        value._terms = {d: c for d, c in terms.items() if c[0] or c[1]}
        value._hash = None
        return value

    # --- constructors -------------------------------------------------

    @classmethod
    def rational(cls, q: Rational) -> "RadicalComplex":
        q = Fraction(q)
        return cls._canonical({1: (q, Fraction(0))})

    @classmethod
    def gaussian(cls, re_part: Rational, im_part: Rational = 0) -> "RadicalComplex":
        return cls._canonical({1: (Fraction(re_part), Fraction(im_part))})

    @classmethod
    def sqrt(cls, q: Rational) -> "RadicalComplex":
        """Exact square root of a non-negative rational."""
        q = Fraction(q)
        if q < 0:
            raise ValueError(f"sqrt of a negative rational {q}")
        if q == 0:
            return ZERO
        kp, dp = squarefree_split(q.numerator)
        kq, dq = squarefree_split(q.denominator)
        # sqrt(p/r) = kp*sqrt(dp) / (kq*sqrt(dq)) = kp*sqrt(dp*dq) / (kq*dq)
        return cls._canonical({dp * dq: (Fraction(kp, kq * dq), Fraction(0))})

    # --- inspection ---------------------------------------------------

    @property
    def terms(self) -> Dict[int, Pair]:
        return dict(self._terms)

    @property
    def radicands(self) -> Tuple[int, ...]:
        return tuple(sorted(self._terms))

    def is_zero(self) -> bool:
        return not self._terms

    def is_real(self) -> bool:
        return all(im == 0 for _, im in self._terms.values())

    def is_rational(self) -> bool:
        return set(self._terms) <= {1} and self.is_real()

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational number")
        return self._terms.get(1, (Fraction(0), Fraction(0)))[0]

    def real(self) -> "RadicalComplex":
        return RadicalComplex._canonical({d: (a, Fraction(0)) for d, (a, _) in self._terms.items()})

    def imag(self) -> "RadicalComplex":
        return RadicalComplex._canonical({d: (b, Fraction(0)) for d, (_, b) in self._terms.items()})

    # --- arithmetic ---------------------------------------------------

    def __add__(self, other) -> "RadicalComplex":
        if not isinstance(other, RadicalComplex):
            q = _as_fraction(other)
            if q is None:
                return NotImplemented
            other = RadicalComplex.rational(q)
        out = dict(self._terms)
        for d, (c, e) in other._terms.items():
            if d in out:
                a, b = out[d]
                out[d] = (a + c, b + e)
            else:
                out[d] = (c, e)
        return RadicalComplex._canonical(out)

    __radd__ = __add__

    def __neg__(self) -> "RadicalComplex":
        return RadicalComplex._canonical({d: (-a, -b) for d, (a, b) in self._terms.items()})

    def __sub__(self, other) -> "RadicalComplex":
        if not isinstance(other, RadicalComplex):
            q = _as_fraction(other)
            if q is None:
                return NotImplemented
            other = RadicalComplex.rational(q)
        return self + (-other)

    def __rsub__(self, other) -> "RadicalComplex":
        return (-self) + other

    def __mul__(self, other) -> "RadicalComplex":
        if not isinstance(other, RadicalComplex):
            q = _as_fraction(other)
            if q is None:
                return NotImplemented
            if q == 0:
                return ZERO
            return RadicalComplex._canonical(
                {d: (a * q, b * q) for d, (a, b) in self._terms.items()}
            )
        out: Dict[int, Pair] = {}
        for d1, (a, b) in self._terms.items():
            for d2, (c, e) in other._terms.items():
                if d1 == d2:
                    d, k = 1, d1
                elif d1 == 1 or d2 == 1:
                    d, k = d1 * d2, 1
                else:
                    g = gcd(d1, d2)
                    d, k = (d1 // g) * (d2 // g), g
                if b:
                    re_part = a * c - b * e if e else a * c
                    im_part = a * e + b * c if e else b * c
                else:
                    re_part, im_part = a * c, a * e
                if k != 1:
                    re_part, im_part = re_part * k, im_part * k
                if d in out:
                    old_re, old_im = out[d]
                    out[d] = (old_re + re_part, old_im + im_part)
                else:
                    out[d] = (re_part, im_part)
        return RadicalComplex._canonical(out)

    __rmul__ = __mul__

    def conjugate(self) -> "RadicalComplex":
        return RadicalComplex._canonical({d: (a, -b) for d, (a, b) in self._terms.items()})

    def invert(self) -> "RadicalComplex":
        """Inverse of a single-term value q*sqrt(d): conj(q)/|q|^2 * sqrt(d)/d."""
        if not self._terms:
            raise ZeroInverse("cannot invert the zero scalar")
        if len(self._terms) > 1:
            raise MultiTermInverse(f"cannot invert multi-term value {self}")
        (d, (a, b)), = self._terms.items()
        modulus = a * a + b * b
        return RadicalComplex._canonical({d: (a / (modulus * d), -b / (modulus * d))})

    def __truediv__(self, other) -> "RadicalComplex":
        if isinstance(other, RadicalComplex):
            return self * other.invert()
        q = _as_fraction(other)
        if q is None:
            return NotImplemented
        if q == 0:
            raise ZeroInverse(f"division of {self} by zero")
        return self * (1 / q)

    def __pow__(self, exponent: int) -> "RadicalComplex":
        if not isinstance(exponent, int) or exponent < 0:
            return NotImplemented
        result, base = ONE, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def abs_sq(self) -> "RadicalComplex":
        return self * self.conjugate()

    # --- comparisons --------------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, RadicalComplex):
            return self._terms == other._terms
        q = _as_fraction(other)
        if q is None:
            return NotImplemented
        if q == 0:
            return not self._terms
        return self._terms == {1: (q, Fraction(0))}

    def __hash__(self) -> int:
        # rational values compare equal to their Fraction, so they must hash alike
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(self.to_fraction())
            else:
                self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # --- rendering ----------------------------------------------------

    def __repr__(self) -> str:
        return f"RadicalComplex({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        """Serialize as `(p/q + r/s i)·sqrt(d)` terms joined by ` + `."""
        if not self._terms:
            return "0"
        return " + ".join(
            f"({_fmt(a)} + {_fmt(b)} i)·sqrt({d})" for d, (a, b) in sorted(self._terms.items())
        )

    @classmethod
    def from_text(cls, text: str) -> "RadicalComplex":
        text = text.strip()
        if text == "0":
            return ZERO
        terms = {}
        for match in _TERM_PATTERN.finditer(text):
            terms[int(match.group(3))] = (Fraction(match.group(1)), Fraction(match.group(2)))
        if not terms:
            raise ValueError(f"unparseable radical text {text!r}")
        return cls(terms)

    def to_mpc(self, precision_bits: int = 256):
        """High-precision value; used for references, never for certificates."""
        with mpmath.workprec(precision_bits):
            re_sum, im_sum = mpmath.mpf(0), mpmath.mpf(0)
            for d, (a, b) in self._terms.items():
                root = mpmath.sqrt(d)
                re_sum += mpmath.mpf(a.numerator) / a.denominator * root
                im_sum += mpmath.mpf(b.numerator) / b.denominator * root
            return mpmath.mpc(re_sum, im_sum)

    def to_float(self, config: ScalarConfig = DEFAULT_SCALAR_CONFIG) -> Tuple[complex, float]:
        return rc_to_float(self, config)


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


_TERM_PATTERN = re.compile(r"\((-?\d+(?:/\d+)?) \+ (-?\d+(?:/\d+)?) i\)·sqrt\((\d+)\)")

ZERO = RadicalComplex._canonical({})
ONE = RadicalComplex.rational(1)
I = RadicalComplex.gaussian(0, 1)
SQRT3 = RadicalComplex.sqrt(3)


def rc_add(a: RadicalComplex, b: RadicalComplex) -> RadicalComplex:
    return a + b


def rc_mul(a: RadicalComplex, b: RadicalComplex) -> RadicalComplex:
    return a * b


def rc_invert(a: RadicalComplex) -> RadicalComplex:
    return a.invert()


def round_radical_sum(parts: Iterable[Tuple[int, int, int]],
                      config: ScalarConfig = DEFAULT_SCALAR_CONFIG) -> Tuple[float, float]:
    """Round sum (numerator / denominator) * sqrt(radicand) to a double.

    Denominators must be positive; the fractions need not be reduced.
    Returns (value, relative error bound).
    """
    parts = [(num, den, d) for num, den, d in parts if num]
    if not parts:
        return 0.0, 0.0
    try:
        if len(parts) == 1 and parts[0][2] == 1:
            # int / int is correctly rounded
            return parts[0][0] / parts[0][1], UNIT_ROUNDOFF
        approx = [num / den * math.sqrt(d) if d != 1 else num / den for num, den, d in parts]
    except OverflowError as exc:
        raise ConversionOverflow(f"radical term exceeds double range: {exc}") from exc
    total = math.fsum(approx)
    if math.isinf(total):
        raise ConversionOverflow("radical sum exceeds double range")
    if total != 0.0:
        # three roundings per term, one for the correctly rounded fsum
        gamma3 = 3 * UNIT_ROUNDOFF / (1 - 3 * UNIT_ROUNDOFF)
        spread = math.fsum(abs(t) for t in approx)
        error = UNIT_ROUNDOFF * abs(total) / (1 - UNIT_ROUNDOFF) + gamma3 * spread / (1 - gamma3)
        error *= 1.0 + 1e-6
        if error < abs(total):
            bound = error / (abs(total) - error)
            if bound <= config.working_epsilon / 2:
                return total, bound
    return _part_to_float_precise(parts, config)


def _part_to_float_precise(parts, config: ScalarConfig) -> Tuple[float, float]:
    bits = config.reference_precision_bits
    while bits <= config.max_precision_bits:
        with mpmath.workprec(bits):
            value, spread = mpmath.mpf(0), mpmath.mpf(0)
            for num, den, d in parts:
                term = mpmath.mpf(num) / den
                if d != 1:
                    term *= mpmath.sqrt(d)
                value += term
                spread += abs(term)
            # about five roundings per term, each at most 2**-bits relative
            slack = (6 * len(parts) + 8) * mpmath.ldexp(1, 1 - bits) * spread
            if value != 0 and slack * 1024 * 2 ** 53 <= abs(value):
                rounded = float(value)
                if math.isinf(rounded):
                    raise ConversionOverflow("radical sum exceeds double range")
                return rounded, UNIT_ROUNDOFF * (1 + 1.0 / 512)
        logger.debug(f"cancellation at {bits} bits, doubling precision")
        bits *= 2
    raise ConversionBoundExceeded(
        f"could not round radical sum within {config.max_precision_bits} bits"
    )


def rc_to_float(a: RadicalComplex, config: ScalarConfig = DEFAULT_SCALAR_CONFIG) -> Tuple[complex, float]:
    """Round an exact scalar to a complex double with a guaranteed relative error bound.

    The bound b satisfies |z - z~| <= b*|z| with z the exact value.
    """
    terms = a._terms
    re_value, re_bound = round_radical_sum(
        ((c[0].numerator, c[0].denominator, d) for d, c in terms.items()), config
    )
    im_value, im_bound = round_radical_sum(
        ((c[1].numerator, c[1].denominator, d) for d, c in terms.items()), config
    )
    return complex(re_value, im_value), max(re_bound, im_bound)
