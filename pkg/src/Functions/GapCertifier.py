"""Spectral-gap certificate for the projected K-point Hamiltonian.

The Hamiltonian is compressed to the span Xi of 81 chiral basis functions and
conjugated by the projection away from the degree-8 approximate zero mode.
Its smallest nonzero |eigenvalue| is certified on a grid of alphas in
[0, 7/10], and a Lipschitz bound in alpha covers the gaps between grid points.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import isqrt
from operator import mul
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np  # type: ignore

from src.Data.xi_listing import (
    XI_SIZE,
    crossed_out_site,
    designated_orbit_sites,
    reference_orbit_sites,
)
from src.Functions.ChiralBasis import ChiralVector, h1_hops, root_norm
from src.Functions.Eigensolver import EigensolverConfig, eigensolve
from src.Functions.Enclosure import EigenEnclosure, enclose
from src.Functions.Errors import (
    BoundaryDegreeViolation,
    ConversionBoundExceeded,
    CountMismatch,
    GridTooCoarse,
    IngredientViolation,
    MuViolation,
    PointFailure,
    SupportEscape,
    WrongOrder,
)
from src.Functions.MomentumLattice import (
    ORIGIN,
    LatticeSite,
    OrbitIndex,
    canonicalize,
    enumerate_orbits,
    hopping_neighbours,
    norm_sq,
    orbit,
    parse_site,
)
from src.Functions.PerturbationSeries import PerturbationSeries, SeriesConfig, compute_series
from src.Functions.RadicalComplex import ZERO, RadicalComplex, ScalarConfig, rc_to_float, round_radical_sum
from src.Functions.RationalPoly import RationalPoly

SERIES_ORDER = SeriesConfig().order
EXPECTED_MU_SQ = 49
MAX_TERM_NORM_SQ = 3
H1_NORM_BOUND = 3


@dataclass
class GapCertifierConfig:
    """Configuration for the spectral-gap sweep."""
    alpha_max: Fraction = Fraction(7, 10)
    point_threshold: Fraction = Fraction(8, 10)    # certified bound required at each grid point
    gap_target: Fraction = Fraction(3, 4)          # gap claimed on the whole interval
    max_spacing: Fraction = Fraction(1, 388831)    # strict upper limit on h for a certificate
    norm2_bound: float = 10                        # ||H_Xi||_2 on [0, alpha_max]
    max_entry_bound: float = 7                     # max |entry| of H_Xi
    eigensolver: str = "jacobi"                    # "jacobi" or "numpy"
    max_sweeps: int = 60
    threads: int = 1
    block_size: int = 64                           # consecutive grid points sharing warm-started eigensolves
    survey: bool = False                           # coarse grid, figure data only
    keep_eigenvalues: bool = False
    working_epsilon: float = 16 * 2.0 ** -52


# --- Xi ---------------------------------------------------------------------


class XiBasis:
    """Ordered chiral indices spanning Xi: the origin, then (+1, -1) per orbit by norm."""

    def __init__(self, orbits: Iterable[LatticeSite]):
        sites = sorted({canonicalize(s).site for s in orbits}, key=lambda s: (norm_sq(s), s))
        indices: List[OrbitIndex] = []
        for site in sites:
            origin = canonicalize(site)
            if origin == ORIGIN:
                indices.insert(0, ORIGIN)
            else:
                indices.extend([OrbitIndex(site, 1), OrbitIndex(site, -1)])
        self.orbits: Tuple[LatticeSite, ...] = tuple(sites)
        self.indices: Tuple[OrbitIndex, ...] = tuple(indices)
        self.position: Dict[OrbitIndex, int] = {index: k for k, index in enumerate(self.indices)}
        self._sites = frozenset(self.orbits)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, item) -> bool:
        if isinstance(item, OrbitIndex):
            return item in self.position
        if isinstance(item, LatticeSite):
            return canonicalize(item).site in self._sites
        return False

    def with_orbits(self, add: Sequence[str] = (), drop: Sequence[str] = ()) -> "XiBasis":
        """Copy with orbits (given as site labels) added or removed; no size check."""
        sites = set(self.orbits)
        for label in add:
            sites.add(canonicalize(parse_site(label)).site)
        for label in drop:
            sites.discard(canonicalize(parse_site(label)).site)
        return XiBasis(sites)

    def labels(self) -> List[str]:
        return [str(index) for index in self.indices]

    @property
    def max_norm_sq(self) -> int:
        return max(norm_sq(site) for site in self.orbits)


def build_xi() -> XiBasis:
    """Every orbit with |k|^2 <= 48, plus the designated norm-7 orbits."""
    designated = set(designated_orbit_sites())
    excluded = crossed_out_site()
    chosen = [
        site for site in enumerate_orbits(EXPECTED_MU_SQ)
        if (norm_sq(site) < EXPECTED_MU_SQ or site in designated) and site != excluded
    ]
    xi = XiBasis(chosen)
    if len(xi) != XI_SIZE:
        raise CountMismatch(f"Xi has {len(xi)} chiral indices, expected {XI_SIZE}")
    reference = set(reference_orbit_sites())
    if set(xi.orbits) != reference:
        missing = sorted(str(s) for s in reference - set(xi.orbits))
        extra = sorted(str(s) for s in set(xi.orbits) - reference)
        raise CountMismatch(f"Xi differs from the published listing: missing {missing}, extra {extra}")
    return xi


# --- Xi verification ---------------------------------------------------------------


@dataclass
class MuChoice:
    mu_sq: int                          # smallest |k|^2 of an orbit outside Xi
    boundary_norm: int                  # ||P_Xi H1 P_Xi^perp||
    max_boundary_degree: int
    boundary_norm_numeric: float
    boundary_orbits: List[LatticeSite] = field(default_factory=list)

    @property
    def mu(self) -> Fraction:
        root = isqrt(self.mu_sq)
        if root * root != self.mu_sq:
            raise MuViolation(f"mu^2 = {self.mu_sq} is not a perfect square")
        return Fraction(root)


def _outside_neighbour_counts(xi: XiBasis) -> Tuple[int, int, List[LatticeSite]]:
    """Worst number of outside neighbours of an inside site, and vice versa."""
    inward, outward = 0, 0
    outside: Dict[LatticeSite, None] = {}
    for representative in xi.orbits:
        for site in orbit(representative):
            neighbours = [t for t in hopping_neighbours(site) if t not in xi]
            outward = max(outward, len(neighbours))
            for target in neighbours:
                outside.setdefault(target, None)
    for site in outside:
        inside = [t for t in hopping_neighbours(site) if t in xi]
        inward = max(inward, len(inside))
    boundary = sorted({canonicalize(s).site for s in outside}, key=lambda s: (norm_sq(s), s))
    return outward, inward, boundary


def boundary_block(xi: XiBasis) -> np.ndarray:
    """Float matrix of P_Xi^perp H1 P_Xi in the chiral basis (rows: outside images)."""
    rows: Dict[OrbitIndex, int] = {}
    entries = []
    for col, index in enumerate(xi.indices):
        for image, amplitude in h1_hops(index):
            if image in xi:
                continue
            row = rows.setdefault(image, len(rows))
            entries.append((row, col, rc_to_float(amplitude)[0]))
    block = np.zeros((max(len(rows), 1), len(xi)), dtype=np.complex128)
    for row, col, value in entries:
        block[row, col] += value
    return block


def verify_mu_choice(xi: XiBasis, series: Optional[PerturbationSeries] = None) -> MuChoice:
    """Check support containment, boundary hopping degree and mu for Xi."""
    logger = logging.getLogger(__name__)
    series = series or compute_series(SERIES_ORDER)
    logger.info("\n=== Xi Verification ===")

    escaped = sorted(str(index) for index in series.support() if index not in xi)
    if escaped:
        raise SupportEscape(f"series support leaves Xi at {', '.join(escaped)}")
    logger.info(f"✓ Support of Psi^0..Psi^{series.order} lies in Xi ({len(series.support())} indices)")

    outward, inward, boundary = _outside_neighbour_counts(xi)
    degree = max(outward, inward)
    if degree > 1:
        raise BoundaryDegreeViolation(
            f"boundary hopping degree {degree} (inside->outside {outward}, outside->inside {inward})"
        )
    numeric = float(np.linalg.norm(boundary_block(xi), 2))
    if abs(numeric - 1.0) > 1e-12:
        raise BoundaryDegreeViolation(f"||P_Xi H1 P_Xi^perp|| evaluates to {numeric!r}, expected 1")
    logger.info(f"✓ Boundary degree {degree}; ||P_Xi H1 P_Xi^perp|| = 1 ({len(boundary)} outside orbits)")

    candidates = enumerate_orbits(xi.max_norm_sq + 64)
    mu_sq = min(norm_sq(site) for site in candidates if site not in xi)
    if mu_sq != EXPECTED_MU_SQ:
        raise MuViolation(f"smallest |k|^2 outside Xi is {mu_sq}, expected {EXPECTED_MU_SQ}")
    logger.info(f"✓ mu^2 = {mu_sq} (mu = 7)")
    return MuChoice(
        mu_sq=mu_sq,
        boundary_norm=1,
        max_boundary_degree=degree,
        boundary_norm_numeric=numeric,
        boundary_orbits=boundary,
    )


# --- projected matrix ----------------------------------------------------------------


def _conjugate_poly(poly: RationalPoly) -> RationalPoly:
    # alpha is real, so conjugation acts on the coefficients only
    return RationalPoly([c.conjugate() if isinstance(c, RadicalComplex) else c for c in poly.coefficients])


def _integer_parts(poly: RationalPoly) -> Tuple[List[Tuple], List[Tuple]]:
    """Split a radical polynomial into (radicand, low, numerators, denominator) per part.

    The real part of the value at alpha is sum_d sqrt(d) * sum_k numerators[k - low] alpha^k / denominator,
    and likewise for the imaginary part.
    """
    parts: Tuple[Dict[int, Dict[int, Fraction]], Dict[int, Dict[int, Fraction]]] = ({}, {})
    for k, c in enumerate(poly.coefficients):
        terms = c.terms if isinstance(c, RadicalComplex) else {1: (c, Fraction(0))}
        for d, pair in terms.items():
            for side, value in zip(parts, pair):
                if value:
                    side.setdefault(d, {})[k] = value
    packed = []
    for side in parts:
        entries = []
        for d, coefficients in sorted(side.items()):
            low, high = min(coefficients), max(coefficients)
            common = math.lcm(*(c.denominator for c in coefficients.values()))
            numerators = tuple(
                coefficients[k].numerator * (common // coefficients[k].denominator) if k in coefficients else 0
                for k in range(low, high + 1)
            )
            entries.append((d, low, numerators, common))
        packed.append(entries)
    return packed[0], packed[1]


class ProjectedFamily:
    """Entries of the projected matrix as exact polynomials in alpha.

    With v = psi^(8,alpha), M = P(H0 + aH1)P, w = Mv, n = <v,v> and s = <v,w>,
    entry (i, j) of M - (v w^H + w v^H)/n + s v v^H/n^2 equals T_ij(alpha) / n(alpha)^e_ij
    where T_ij is a polynomial with radical coefficients. The integer numerators
    of every T_ij are stored once; at alpha = p/q an entry costs one integer dot
    product against p^k q^(top-k) per radicand.
    """

    def __init__(self, xi: XiBasis, series: PerturbationSeries,
                 h0: Dict[Tuple[int, int], RadicalComplex], h1: Dict[Tuple[int, int], RadicalComplex]):
        self.logger = logging.getLogger(__name__)
        started = time.perf_counter()
        size = len(xi)
        v = [RationalPoly([series.term(k)[index] for k in range(series.order + 1)]) for index in xi.indices]
        m = {key: RationalPoly([h0.get(key, ZERO), h1.get(key, ZERO)]) for key in set(h0) | set(h1)}
        w = [RationalPoly() for _ in range(size)]
        for (i, j), value in m.items():
            if not v[j].is_zero():
                w[i] = w[i] + value * v[j]
        v_bar = [_conjugate_poly(p) for p in v]
        w_bar = [_conjugate_poly(p) for p in w]
        norm = series.denominator_series()
        norm_sq = norm * norm
        s = RationalPoly()
        for i in range(size):
            if not v[i].is_zero() and not w[i].is_zero():
                s = s + v_bar[i] * w[i]

        self.size = size
        self.norm = norm
        self._polys: List[Tuple[int, int, int, RationalPoly]] = []
        for i in range(size):
            for j in range(i, size):
                block = m.get((i, j), RationalPoly())
                correction = RationalPoly()
                if not v[i].is_zero() and not w[j].is_zero():
                    correction = correction + v[i] * w_bar[j]
                if not w[i].is_zero() and not v[j].is_zero():
                    correction = correction + w[i] * v_bar[j]
                outer = RationalPoly()
                if not s.is_zero() and not v[i].is_zero() and not v[j].is_zero():
                    outer = s * v[i] * v_bar[j]
                if not outer.is_zero():
                    poly, power = norm_sq * block - norm * correction + outer, 2
                elif not correction.is_zero():
                    poly, power = norm * block - correction, 1
                else:
                    poly, power = block, 0
                if not poly.is_zero():
                    self._polys.append((i, j, power, poly))

        self._entries = [(i, j, power) + _integer_parts(poly) for i, j, power, poly in self._polys]
        norm_parts, _ = _integer_parts(norm)
        (_, self._norm_low, self._norm_numerators, self._norm_denominator), = norm_parts
        self.top = max([norm.degree] + [poly.degree for _, _, _, poly in self._polys])
        self.logger.debug(
            f"Projected family: {len(self._polys)} entries, degree <= {self.top}, "
            f"built in {time.perf_counter() - started:.1f}s"
        )

    def exact_at(self, alpha) -> Dict[Tuple[int, int], RadicalComplex]:
        """Nonzero entries in both triangles, exactly."""
        alpha = Fraction(alpha)
        norm = self.norm.evaluate(alpha)
        exact: Dict[Tuple[int, int], RadicalComplex] = {}
        for i, j, power, poly in self._polys:
            value = poly.evaluate(alpha)
            if not isinstance(value, RadicalComplex):
                value = RadicalComplex.rational(value)
            if power:
                value = value / norm ** power
            if value:
                exact[(i, j)] = value
                if i != j:
                    exact[(j, i)] = value.conjugate()
        return exact

    def dense_at(self, alpha, config: ScalarConfig) -> Tuple[np.ndarray, float]:
        """Rounded matrix at alpha and the largest entrywise relative error bound."""
        alpha = Fraction(alpha)
        p, q, top = alpha.numerator, alpha.denominator, self.top
        p_powers, q_powers = [1], [1]
        for _ in range(top):
            p_powers.append(p_powers[-1] * p)
            q_powers.append(q_powers[-1] * q)
        powers = [p_powers[k] * q_powers[top - k] for k in range(top + 1)]
        shifted = [powers[low:] for low in range(top + 1)]

        # n(alpha) = a / b with a, b > 0
        a = sum(map(mul, self._norm_numerators, shifted[self._norm_low]))
        b = self._norm_denominator * q_powers[top]
        up = (1, b, b * b)
        down = (q_powers[top], q_powers[top] * a, q_powers[top] * a * a)

        dense = np.zeros((self.size, self.size), dtype=np.complex128)
        worst = 0.0
        for i, j, power, re_parts, im_parts in self._entries:
            scale, divisor = up[power], down[power]
            re_value, re_bound = round_radical_sum(
                ((sum(map(mul, numerators, shifted[low])) * scale, common * divisor, d)
                 for d, low, numerators, common in re_parts),
                config,
            )
            im_value, im_bound = round_radical_sum(
                ((sum(map(mul, numerators, shifted[low])) * scale, common * divisor, d)
                 for d, low, numerators, common in im_parts),
                config,
            )
            bound = max(re_bound, im_bound)
            if bound > config.working_epsilon:
                raise ConversionBoundExceeded(
                    f"entry ({i},{j}) at alpha={alpha} rounds with bound {bound:.3e}",
                    stage="build_projected",
                )
            worst = max(worst, bound)
            dense[i, j] = complex(re_value, im_value)
            if i != j:
                dense[j, i] = complex(re_value, -im_value)
        return dense, worst


# one family per (Xi, series) pair and process
_FAMILY_CACHE: Dict[Tuple, ProjectedFamily] = {}


@dataclass
class ProjectedMatrix:
    alpha: Fraction
    xi: XiBasis
    dense: np.ndarray
    conversion_bound: float                         # max entrywise relative error of `dense`
    family: ProjectedFamily = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.xi)

    @cached_property
    def exact(self) -> Dict[Tuple[int, int], RadicalComplex]:
        """Nonzero entries, both triangles; evaluated on first use."""
        return self.family.exact_at(self.alpha)

    def entry(self, i: int, j: int) -> RadicalComplex:
        return self.exact.get((i, j), ZERO)

    def apply_exact(self, vector: ChiralVector) -> ChiralVector:
        """Exact product with a vector supported in Xi."""
        acc: Dict[OrbitIndex, RadicalComplex] = {}
        for (i, j), value in self.exact.items():
            component = vector[self.xi.indices[j]]
            if component:
                target = self.xi.indices[i]
                acc[target] = acc.get(target, ZERO) + value * component
        return ChiralVector(acc)


class GapCertifier:
    """Builds H^alpha_Xi at exact alphas and certifies its gap."""

    def __init__(
        self,
        series: PerturbationSeries,
        xi: Optional[XiBasis] = None,
        config: Optional[GapCertifierConfig] = None,
    ):
        if series.order != SERIES_ORDER:
            raise WrongOrder(
                f"the projected matrix uses the order-{SERIES_ORDER} series, got {series.order}",
                stage="build_projected",
            )
        self.series = series
        self.xi = xi or build_xi()
        self.config = config or GapCertifierConfig()
        self.logger = logging.getLogger(__name__)
        escaped = [str(index) for index in series.support() if index not in self.xi]
        if escaped:
            raise SupportEscape(f"psi^(8,alpha) leaks outside Xi at {', '.join(sorted(escaped))}",
                                stage="build_projected")
        self.scalar_config = ScalarConfig(working_epsilon=self.config.working_epsilon)
        self.eigensolver_config = EigensolverConfig(self.config.eigensolver, self.config.max_sweeps)
        self._h0, self._h1 = self._compress()

    def _compress(self):
        """Nonzero entries of P_Xi H0 P_Xi and P_Xi H1 P_Xi keyed by (row, col)."""
        h0: Dict[Tuple[int, int], RadicalComplex] = {}
        h1: Dict[Tuple[int, int], RadicalComplex] = {}
        for col, index in enumerate(self.xi.indices):
            if not index.is_origin:
                h0[(self.xi.position[index.partner()], col)] = root_norm(index.site)
            for image, amplitude in h1_hops(index):
                row = self.xi.position.get(image)
                if row is not None:
                    h1[(row, col)] = h1.get((row, col), ZERO) + amplitude
        return h0, h1

    @cached_property
    def family(self) -> ProjectedFamily:
        key = (self.xi.orbits, tuple(self.series.terms))
        if key not in _FAMILY_CACHE:
            _FAMILY_CACHE[key] = ProjectedFamily(self.xi, self.series, self._h0, self._h1)
        return _FAMILY_CACHE[key]

    def compressed_h1(self) -> np.ndarray:
        dense = np.zeros((len(self.xi), len(self.xi)), dtype=np.complex128)
        for (i, j), value in self._h1.items():
            dense[i, j] = rc_to_float(value, self.scalar_config)[0]
        return dense

    def build_projected(self, alpha) -> ProjectedMatrix:
        alpha = Fraction(alpha)
        dense, worst = self.family.dense_at(alpha, self.scalar_config)
        return ProjectedMatrix(alpha, self.xi, dense, worst, self.family)

    def direct_entries(self, alpha) -> Dict[Tuple[int, int], RadicalComplex]:
        """Reference evaluation of M - (v w^H + w v^H)/n + s v v^H/n^2 in the radical field."""
        alpha = Fraction(alpha)
        size = len(self.xi)
        m: Dict[Tuple[int, int], RadicalComplex] = dict(self._h0)
        if alpha:
            for key, value in self._h1.items():
                scaled = value * alpha
                m[key] = m[key] + scaled if key in m else scaled

        psi = self.series.evaluate(alpha)
        v = [psi[index] for index in self.xi.indices]
        w = [ZERO] * size
        for (i, j), value in m.items():
            if v[j]:
                w[i] = w[i] + value * v[j]
        n = sum((x.abs_sq() for x in v), ZERO).to_fraction()
        s = sum((v[i].conjugate() * w[i] for i in range(size)), ZERO)

        exact: Dict[Tuple[int, int], RadicalComplex] = {}
        for i in range(size):
            for j in range(i, size):
                value = m.get((i, j), ZERO)
                correction = v[i] * w[j].conjugate() + w[i] * v[j].conjugate()
                if correction:
                    value = value - correction / n
                if s and v[i] and v[j]:
                    value = value + s * v[i] * v[j].conjugate() / (n * n)
                if value:
                    exact[(i, j)] = value
                    if i != j:
                        exact[(j, i)] = value.conjugate()
        return exact

    def certify_block(self, tasks: Sequence[Tuple[int, Fraction]],
                      keep_eigenvalues: bool = False) -> List["PointResult"]:
        """Certify consecutive grid points; each eigensolve starts from the previous eigenvectors."""
        results = []
        start = None
        for index, alpha in tasks:
            matrix = self.build_projected(alpha)
            pairs = eigensolve(matrix, self.eigensolver_config, start)
            enclosure = enclose(
                matrix,
                pairs,
                norm2_bound=self.config.norm2_bound,
                max_entry_bound=self.config.max_entry_bound,
                epsilon=self.config.working_epsilon,
                zero_mode=True,
            )
            results.append(PointResult.from_enclosure(index, alpha, enclosure, keep_eigenvalues))
            start = pairs[1]
        return results

    def certify_point(self, index: int, alpha: Fraction, keep_eigenvalues: bool = False) -> "PointResult":
        return self.certify_block([(index, Fraction(alpha))], keep_eigenvalues)[0]


def build_projected(alpha, series: PerturbationSeries, xi: Optional[XiBasis] = None) -> ProjectedMatrix:
    return GapCertifier(series, xi).build_projected(alpha)


# --- Lipschitz bound and decomposition hypotheses ---------------------------------------


def lipschitz_constant(series: PerturbationSeries, xi: Optional[XiBasis] = None,
                       config: Optional[GapCertifierConfig] = None) -> int:
    """2 * ||H_Xi|| * ||dQ/da|| + ||H1||, each ingredient rechecked."""
    config = config or GapCertifierConfig()
    logger = logging.getLogger(__name__)
    if series.order != SERIES_ORDER:
        raise WrongOrder(f"expected the order-{SERIES_ORDER} series, got {series.order}",
                         stage="lipschitz_constant")
    xi = xi or build_xi()

    term_norm_sq = max(series.norm_sq_of_term(j) for j in range(series.order + 1))
    if term_norm_sq > MAX_TERM_NORM_SQ:
        raise IngredientViolation(f"max ||Psi^j||^2 = {term_norm_sq} exceeds {MAX_TERM_NORM_SQ}")
    weight = sum(m + n for m in range(series.order + 1) for n in range(series.order + 1))
    dq_bound = MAX_TERM_NORM_SQ * weight

    norm_bound = Fraction(config.norm2_bound)
    h0_room = norm_bound - config.alpha_max * H1_NORM_BOUND
    if h0_room < 0 or xi.max_norm_sq > h0_room * h0_room:
        raise IngredientViolation(
            f"sqrt({xi.max_norm_sq}) + {config.alpha_max}*{H1_NORM_BOUND} exceeds {norm_bound}"
        )
    h1_norm = float(np.linalg.norm(GapCertifier(series, xi, config).compressed_h1(), 2))
    if h1_norm > H1_NORM_BOUND:
        raise IngredientViolation(f"||P_Xi H1 P_Xi|| = {h1_norm:.6f} exceeds {H1_NORM_BOUND}")

    constant = 2 * int(norm_bound) * dq_bound + H1_NORM_BOUND
    logger.info(
        f"Lipschitz constant: 2 x {int(norm_bound)} x {dq_bound} + {H1_NORM_BOUND} = {constant}"
        f" (max ||Psi^j||^2 = {term_norm_sq}, ||P H1 P|| = {h1_norm:.4f})"
    )
    return constant


@dataclass
class DecompositionBound:
    gap: Fraction
    mu: Fraction
    boundary_norm: Fraction
    alpha_max: Fraction

    def denominator(self, alpha) -> Fraction:
        """min(g, mu - 3a) - a * ||P H1 P^perp||; the remainder bound divides by this."""
        alpha = Fraction(alpha)
        if not 0 <= alpha <= self.alpha_max:
            raise ValueError(f"alpha={alpha} outside [0, {self.alpha_max}]")
        return min(self.gap, self.mu - 3 * alpha) - alpha * self.boundary_norm


def check_decomposition(gap_lower, mu, boundary_norm, alpha_max=Fraction(7, 10)) -> DecompositionBound:
    """Verify 3a <= mu and a*b < min(g, mu - 3a) for all a in [0, alpha_max]."""
    gap_lower, mu = Fraction(gap_lower), Fraction(mu)
    boundary_norm, alpha_max = Fraction(boundary_norm), Fraction(alpha_max)
    # both conditions are monotone in alpha, so the endpoint decides
    if 3 * alpha_max > mu:
        raise MuViolation(f"3 * {alpha_max} exceeds mu = {mu}", stage="check_decomposition")
    if not alpha_max * boundary_norm < min(gap_lower, mu - 3 * alpha_max):
        raise MuViolation(
            f"{alpha_max} * {boundary_norm} is not below min({gap_lower}, {mu - 3 * alpha_max})",
            stage="check_decomposition",
        )
    return DecompositionBound(gap_lower, mu, boundary_norm, alpha_max)


# --- sweep ----------------------------------------------------------------------------


@dataclass
class PointResult:
    index: int
    alpha: Fraction
    gap_lower: float
    first_positive: float
    radius: float
    symmetric: bool
    sector_size: int = 0                           # eigenvalues left after removing the zero mode
    eigenvalues: Optional[Tuple[float, ...]] = None

    @classmethod
    def from_enclosure(cls, index: int, alpha: Fraction, enclosure: EigenEnclosure,
                       keep_eigenvalues: bool = False) -> "PointResult":
        return cls(
            index=index,
            alpha=alpha,
            gap_lower=float(enclosure.gap_lower),
            first_positive=enclosure.first_positive(),
            radius=enclosure.radius,
            symmetric=enclosure.symmetric,
            sector_size=len(enclosure.nonzero_sector()),
            eigenvalues=tuple(float(x) for x in enclosure.eigenvalues) if keep_eigenvalues else None,
        )


@dataclass
class GapCertificate:
    grid: int
    spacing: Fraction
    lipschitz: int
    threshold: Fraction
    gap_target: Fraction
    survey: bool
    points: List[PointResult] = field(default_factory=list)
    verdict: bool = False
    wall_time: float = 0.0

    @property
    def min_lower_bound(self) -> float:
        return min(p.gap_lower for p in self.points)

    @property
    def min_first_positive(self) -> float:
        return min(p.first_positive for p in self.points)

    @property
    def max_radius(self) -> float:
        return max(p.radius for p in self.points)

    @property
    def all_symmetric(self) -> bool:
        return all(p.symmetric for p in self.points)

    @property
    def lipschitz_margin_holds(self) -> bool:
        return self.lipschitz * self.spacing / 2 < self.threshold - self.gap_target

    def failing_points(self) -> List[PointResult]:
        return [p for p in self.points if p.gap_lower < self.threshold]

    def to_dict(self) -> Dict:
        return {
            "grid": self.grid,
            "spacing": f"{self.spacing.numerator}/{self.spacing.denominator}",
            "lipschitz": self.lipschitz,
            "threshold": f"{self.threshold.numerator}/{self.threshold.denominator}",
            "gap_target": f"{self.gap_target.numerator}/{self.gap_target.denominator}",
            "survey": self.survey,
            "min_lower_bound": self.min_lower_bound,
            "min_first_positive": self.min_first_positive,
            "max_radius": self.max_radius,
            "all_symmetric": self.all_symmetric,
            "nonzero_sector_size": min((p.sector_size for p in self.points), default=0),
            "lipschitz_margin_holds": self.lipschitz_margin_holds,
            "failing_points": [str(p.alpha) for p in self.failing_points()],
            "verdict": self.verdict,
            "wall_time": self.wall_time,
        }


_WORKER: Optional[GapCertifier] = None


def _init_worker(terms, orbits, config: GapCertifierConfig) -> None:
    global _WORKER
    _WORKER = GapCertifier(PerturbationSeries(terms), XiBasis(orbits), config)


def _certify_grid_block(tasks: List[Tuple[int, Fraction]]) -> List[PointResult]:
    return _WORKER.certify_block(tasks, _WORKER.config.keep_eigenvalues)


def grid_points(grid: int, alpha_max: Fraction = Fraction(7, 10)) -> List[Fraction]:
    """alpha_k = alpha_max * k / N for k = 0..N."""
    if grid < 1:
        raise ValueError(f"grid size must be positive, got {grid}")
    return [alpha_max * k / grid for k in range(grid + 1)]


def sweep_and_certify(
    grid: int,
    threads: int = 1,
    config: Optional[GapCertifierConfig] = None,
    series: Optional[PerturbationSeries] = None,
    xi: Optional[XiBasis] = None,
) -> GapCertificate:
    """Certify the gap at every grid point and combine with the Lipschitz bound."""
    config = config or GapCertifierConfig()
    logger = logging.getLogger(__name__)
    started = time.perf_counter()
    spacing = config.alpha_max / grid if grid > 0 else None
    if spacing is None:
        raise ValueError(f"grid size must be positive, got {grid}")
    if not config.survey and not spacing < config.max_spacing:
        raise GridTooCoarse(
            f"spacing {spacing} is not below {config.max_spacing}; "
            f"use N >= {math.floor(config.alpha_max / config.max_spacing) + 1} or --survey"
        )
    series = series or compute_series(SERIES_ORDER)
    xi = xi or build_xi()
    lipschitz = lipschitz_constant(series, xi, config)

    logger.info("\n=== Spectral Gap Sweep ===")
    logger.info(f"Grid: N={grid}, h={spacing}, threads={threads}, survey={config.survey}")
    tasks = list(enumerate(grid_points(grid, config.alpha_max)))
    # block boundaries depend only on the grid, so results do not depend on the thread count
    size = max(1, config.block_size)
    blocks = [tasks[k:k + size] for k in range(0, len(tasks), size)]
    sweep_started = time.perf_counter()
    if threads <= 1:
        _init_worker(series.terms, xi.orbits, config)
        results = [point for block in blocks for point in _certify_grid_block(block)]
    else:
        with ProcessPoolExecutor(
            max_workers=threads,
            initializer=_init_worker,
            initargs=(series.terms, xi.orbits, config),
        ) as executor:
            results = [point for chunk in executor.map(_certify_grid_block, blocks) for point in chunk]
    per_point = (time.perf_counter() - sweep_started) * max(1, threads) / len(tasks)
    logger.info(f"Sweep cost: {1000 * per_point:.1f} ms per point per thread ({len(blocks)} blocks)")

    certificate = GapCertificate(
        grid=grid,
        spacing=spacing,
        lipschitz=lipschitz,
        threshold=config.point_threshold,
        gap_target=config.gap_target,
        survey=config.survey,
        points=results,
    )
    certificate.wall_time = time.perf_counter() - started
    failing = certificate.failing_points()
    logger.info(
        f"Grid minimum: certified {certificate.min_lower_bound:.12f}, "
        f"first positive eigenvalue {certificate.min_first_positive:.16f}"
    )
    logger.info(f"Largest enclosure radius: {certificate.max_radius:.3e}")
    if failing and not config.survey:
        worst = min(failing, key=lambda p: p.gap_lower)
        raise PointFailure(worst.alpha, worst.gap_lower, config.point_threshold)
    certificate.verdict = (
        not config.survey
        and not failing
        and certificate.lipschitz_margin_holds
        and certificate.all_symmetric
    )
    if certificate.verdict:
        logger.info(f"✓ g^alpha >= {config.gap_target} on [0, {config.alpha_max}]")
    elif config.survey:
        logger.info(f"Survey only, no certificate ({len(failing)} points below {config.point_threshold})")
    return certificate
