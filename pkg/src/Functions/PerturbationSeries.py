import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Set

from src.Functions.ChiralBasis import (
    ZERO_MODE,
    ChiralVector,
    apply_H0,
    apply_H1,
    apply_step,
    inner,
    pairing,
)
from src.Functions.MomentumLattice import OrbitIndex
from src.Functions.RadicalComplex import ZERO
from src.Functions.RationalPoly import RationalPoly


@dataclass
class SeriesConfig:
    """Configuration for the zero-mode perturbation series."""
    order: int = 8   # highest power of alpha kept in psi


class PerturbationSeries:
    """Terms Psi^0..Psi^N of psi^alpha = sum_n alpha^n Psi^n at the K point.

    Psi^0 is the constant zero mode and Psi^n = -P(H0)^{-1}P H1 Psi^{n-1}.
    """

    def __init__(self, terms: List[ChiralVector]):
        if not terms:
            raise ValueError("a perturbation series needs at least Psi^0")
        self.terms = list(terms)
        self.logger = logging.getLogger(__name__)
        self._norm_sq: Dict[int, Fraction] = {}
        self._h1_norm_sq: Dict[int, Fraction] = {}

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    def truncate(self, order: int) -> "PerturbationSeries":
        if not 0 <= order <= self.order:
            raise ValueError(f"cannot truncate order-{self.order} series to {order}")
        return PerturbationSeries(self.terms[: order + 1])

    def term(self, n: int) -> ChiralVector:
        if not 0 <= n <= self.order:
            raise ValueError(f"Psi^{n} is not available (series order {self.order})")
        return self.terms[n]

    # --- norms ----------------------------------------------------------

    def norm_sq_of_term(self, n: int) -> Fraction:
        if n not in self._norm_sq:
            psi = self.term(n)
            self._norm_sq[n] = inner(psi, psi).to_fraction()
        return self._norm_sq[n]

    def h1_norm_sq_of_term(self, n: int) -> Fraction:
        if n not in self._h1_norm_sq:
            image = apply_H1(self.term(n))
            self._h1_norm_sq[n] = inner(image, image).to_fraction()
        return self._h1_norm_sq[n]

    # --- Fermi velocity series -------------------------------------------

    def numerator_series(self) -> RationalPoly:
        """Coefficients of <sum a^m Psi^m*(-r), sum a^n Psi^n(r)>."""
        coefficients = []
        for k in range(2 * self.order + 1):
            total = ZERO
            for m in range(max(0, k - self.order), k // 2 + 1):
                value = pairing(self.terms[m], self.terms[k - m])
                total = total + (value if 2 * m == k else value * 2)
            coefficients.append(total.to_fraction())
        return RationalPoly(coefficients)

    def denominator_series(self) -> RationalPoly:
        """Coefficients of <sum a^n Psi^n, sum a^n Psi^n>."""
        coefficients = []
        for k in range(2 * self.order + 1):
            total = ZERO
            for m in range(max(0, k - self.order), k // 2 + 1):
                value = inner(self.terms[m], self.terms[k - m])
                total = total + (value if 2 * m == k else value.real() * 2)
            coefficients.append(total.to_fraction())
        return RationalPoly(coefficients)

    # --- evaluation and checks ---------------------------------------------

    def evaluate(self, alpha: Fraction) -> ChiralVector:
        """psi^{N,alpha} = sum_n alpha^n Psi^n, exactly."""
        alpha = Fraction(alpha)
        total = ChiralVector()
        power = Fraction(1)
        for psi in self.terms:
            total = total + psi.scale(power)
            power *= alpha
        return total

    def support(self) -> Set[OrbitIndex]:
        indices: Set[OrbitIndex] = set()
        for psi in self.terms:
            indices.update(index for index, _ in psi.items())
        return indices

    def verify_invariants(self) -> None:
        """Raise ValueError unless the defining identities hold exactly."""
        if self.terms[0] != ZERO_MODE:
            raise ValueError("Psi^0 is not the constant zero mode")
        for n in range(1, self.order + 1):
            if inner(ZERO_MODE, self.terms[n]):
                raise ValueError(f"Psi^{n} has a component along the zero mode")
            residual = apply_H0(self.terms[n]) + apply_H1(self.terms[n - 1])
            if residual:
                raise ValueError(f"H0 Psi^{n} + H1 Psi^{n - 1} != 0 ({len(residual)} entries)")
        for i in range(0, self.order + 1, 2):
            for j in range(1, self.order + 1, 2):
                if inner(self.terms[i], self.terms[j]):
                    raise ValueError(f"Psi^{i} and Psi^{j} are not orthogonal")
        self.logger.info(f"✓ Series identities hold through order {self.order}")

    def describe(self, n: int) -> str:
        return f"Psi^{n} =\n{self.term(n).describe()}"


_SERIES_CACHE: Dict[str, PerturbationSeries] = {}


def compute_series(order: Optional[int] = None, config: Optional[SeriesConfig] = None) -> PerturbationSeries:
    """Series to the given order, extending a cached lower-order series when possible.

    Without an explicit order the configured truncation order is used.
    """
    if order is None:
        order = (config or SeriesConfig()).order
    if order < 0:
        raise ValueError(f"series order must be non-negative, got {order}")
    cached = _SERIES_CACHE.get("longest")
    if cached is not None and cached.order >= order:
        return cached.truncate(order)
    terms = list(cached.terms) if cached is not None else [ZERO_MODE]
    while len(terms) <= order:
        terms.append(apply_step(terms[-1]))
    series = PerturbationSeries(terms)
    series.logger.debug(f"Computed series to order {order}; largest support {max(len(t) for t in terms)}")
    _SERIES_CACHE["longest"] = series
    return series


def numerator_series(order: int) -> RationalPoly:
    return compute_series(order).numerator_series()


def denominator_series(order: int) -> RationalPoly:
    return compute_series(order).denominator_series()
