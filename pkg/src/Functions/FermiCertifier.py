import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import mpmath  # type: ignore

from src.Functions.Errors import (
    ConversionBoundExceeded,
    Inconclusive,
    IngredientViolation,
    SignMismatch,
    WrongOrder,
)
from src.Functions.PerturbationSeries import PerturbationSeries, SeriesConfig
from src.Functions.RadicalComplex import (
    RadicalComplex,
    ScalarConfig,
    rc_to_float,
)
from src.Functions.RationalPoly import RationalPoly
from src.Functions.RoundoffTracker import TrackedFloat, horner, oliver_bound

ENVELOPE_ORDER = SeriesConfig().order
CLEARED_DEGREE = 18
ROUNDED_H1_NORM = Fraction(3, 20)
# (15 - 20a)^2 = 25 (3 - 4a)^2; the reference bound refers to the smaller normalization
REFERENCE_NORMALIZATION = 25


@dataclass
class FermiCertifierConfig:
    """Configuration for the Fermi-velocity sign certificates."""
    worst_point: Fraction = Fraction(61, 100)     # worst case must be negative here
    best_point: Fraction = Fraction(57, 100)      # best case must be positive here
    eta_norm: str = "exact"                       # "exact" ||H1 Psi^8|| or "rounded" 3/20
    envelope_scale: Fraction = Fraction(1)        # multiplies E(alpha); 1 is the certified value
    reference_coefficient_bound: int = 1000
    root_interval: Tuple[Fraction, Fraction] = (Fraction(1, 2), Fraction(7, 10))
    root_precision_digits: int = 40
    root_scan_steps: int = 400
    working_epsilon: float = 16 * 2.0 ** -52


def eta_bound(alpha, h1_norm) -> RadicalComplex:
    """||psi^alpha - psi^{8,alpha}|| <= alpha^9 ||H1 Psi^8|| / (3/4 - alpha)."""
    alpha = Fraction(alpha)
    if not 0 <= alpha < Fraction(3, 4):
        raise ValueError(f"the remainder bound needs 0 <= alpha < 3/4, got {alpha}")
    if not isinstance(h1_norm, RadicalComplex):
        h1_norm = RadicalComplex.rational(Fraction(h1_norm))
    return h1_norm * (alpha ** 9 / (Fraction(3, 4) - alpha))


@dataclass
class EnvelopePolynomial:
    """base(alpha) +/- E(alpha), with E = 2||eta|| sum a^n||Psi^n|| + ||eta||^2."""
    kind: str                      # "worst" or "best"
    base: RationalPoly
    norms: List[RadicalComplex]    # ||Psi^n||, n = 0..8
    h1_norm: RadicalComplex        # constant in the remainder bound
    scale: Fraction = Fraction(1)

    @property
    def sign(self) -> int:
        return 1 if self.kind == "worst" else -1

    @cached_property
    def norm_poly(self) -> RationalPoly:
        return RationalPoly(self.norms)

    @cached_property
    def eta_numerator(self) -> RationalPoly:
        # alpha^9 c / (3/4 - alpha) = 20 c alpha^9 / (15 - 20 alpha)
        return RationalPoly.monomial(9, self.h1_norm * 20)

    @cached_property
    def clearing_factor(self) -> RationalPoly:
        return RationalPoly([15, -20])

    @cached_property
    def cleared(self) -> RationalPoly:
        """(15 - 20a)^2 times the envelope; degree 18."""
        d = self.clearing_factor
        error_part = self.eta_numerator * d * self.norm_poly * 2 + self.eta_numerator * self.eta_numerator
        return self.base * d * d + error_part.scale(self.scale * self.sign)

    def error_term(self, alpha) -> RadicalComplex:
        """Exact E(alpha) (unscaled)."""
        eta = eta_bound(alpha, self.h1_norm)
        return eta * self.norm_poly.evaluate(Fraction(alpha)) * 2 + eta * eta

    def evaluate_exact(self, alpha) -> RadicalComplex:
        alpha = Fraction(alpha)
        return self.base.evaluate(alpha) + self.error_term(alpha) * (self.scale * self.sign)

    def evaluate_mp(self, x, precision_bits: int = 128):
        """Envelope at an mpmath (or float) point; reference and root finding only."""
        with mpmath.workprec(precision_bits):
            x = _mpf(x) if isinstance(x, Fraction) else mpmath.mpf(x)
            base = mpmath.polyval([_mpf(c) for c in reversed(self.base.coefficients)], x)
            norms = mpmath.polyval([c.to_mpc(precision_bits).real for c in reversed(self.norms)], x)
            eta = self.h1_norm.to_mpc(precision_bits).real * x ** 9 / (mpmath.mpf(3) / 4 - x)
            error = 2 * eta * norms + eta ** 2
            return base + self.sign * _mpf(self.scale) * error


def _mpf(q) -> "mpmath.mpf":
    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator


@dataclass
class SignCertificate:
    alpha: Fraction
    form: str                      # "cleared" or "direct"
    envelope: str
    value: float
    bound: float
    certified_sign: int
    expected_sign: int
    degree: int
    epsilon: float
    sup_coefficient: Optional[float] = None
    oliver_bound: Optional[float] = None
    running_bound: Optional[float] = None
    conversion_bound: Optional[float] = None
    alpha_error_bound: Optional[float] = None
    reference_bound_holds: Optional[bool] = None

    def to_dict(self) -> Dict:
        return {
            "alpha": f"{self.alpha.numerator}/{self.alpha.denominator}",
            "form": self.form,
            "envelope": self.envelope,
            "value": self.value,
            "round_off_bound": self.bound,
            "certified_sign": "+" if self.certified_sign > 0 else "-",
            "expected_sign": "+" if self.expected_sign > 0 else "-",
            "degree": self.degree,
            "epsilon": self.epsilon,
            "sup_coefficient": self.sup_coefficient,
            "oliver_bound": self.oliver_bound,
            "running_bound": self.running_bound,
            "coefficient_conversion_bound": self.conversion_bound,
            "alpha_representation_bound": self.alpha_error_bound,
            "reference_coefficient_bound_holds": self.reference_bound_holds,
        }


def _upper_float(q: Fraction) -> float:
    """A double that is >= q."""
    value = float(q)
    if Fraction(value) < q:
        value = math.nextafter(value, math.inf)
    return value


def _converted_coefficients(coefficients, config: ScalarConfig) -> List[TrackedFloat]:
    tracked = []
    for c in coefficients:
        if isinstance(c, RadicalComplex):
            if not c.is_real():
                raise ValueError(f"envelope coefficient {c} is not real")
            value, bound = rc_to_float(c, config)
            value = value.real
        else:
            value, bound = rc_to_float(RadicalComplex.rational(c), config)
            value = value.real
        if bound > config.working_epsilon:
            raise ConversionBoundExceeded(f"coefficient {c} converted with bound {bound}")
        tracked.append(TrackedFloat.from_relative(value, bound))
    return tracked


def _certify_cleared(
    coefficients: Sequence,
    alpha: Fraction,
    expected: int,
    envelope: str,
    config: FermiCertifierConfig,
) -> SignCertificate:
    scalar_config = ScalarConfig(working_epsilon=config.working_epsilon)
    tracked = _converted_coefficients(coefficients, scalar_config)
    x = TrackedFloat.approximating(alpha)
    running = horner(tracked, x)
    degree = max(len(tracked) - 1, 0)

    epsilon = Fraction(config.working_epsilon)
    sup = max((abs(Fraction(c.value)) + c.error for c in tracked), default=Fraction(0))
    oliver = oliver_bound(degree, epsilon, sup)
    abs_alpha = abs(Fraction(x.value))
    conversion = sum((c.error * abs_alpha ** j for j, c in enumerate(tracked)), Fraction(0))
    exact_sup = [abs(Fraction(c.value)) + c.error for c in tracked]
    alpha_error = x.error * sum((j * s for j, s in enumerate(exact_sup)), Fraction(0))
    oliver_total = oliver + conversion + alpha_error
    bound = min(oliver_total, running.error)

    reference_holds = sup / REFERENCE_NORMALIZATION <= config.reference_coefficient_bound
    certificate = SignCertificate(
        alpha=alpha,
        form="cleared",
        envelope=envelope,
        value=running.value,
        bound=_upper_float(bound),
        certified_sign=TrackedFloat(running.value, bound).certified_sign(),
        expected_sign=expected,
        degree=degree,
        epsilon=config.working_epsilon,
        sup_coefficient=_upper_float(sup),
        oliver_bound=_upper_float(oliver),
        running_bound=_upper_float(running.error),
        conversion_bound=_upper_float(conversion),
        alpha_error_bound=_upper_float(alpha_error),
        reference_bound_holds=reference_holds,
    )
    return _finish(certificate)


def _certify_direct(
    envelope: EnvelopePolynomial, alpha: Fraction, expected: int, config: FermiCertifierConfig
) -> SignCertificate:
    """Rational-plus-E form evaluated with a running error bound."""
    scalar_config = ScalarConfig(working_epsilon=config.working_epsilon)
    x = TrackedFloat.approximating(alpha)
    base = horner(_converted_coefficients(envelope.base.coefficients, scalar_config), x)
    norms = horner(_converted_coefficients(envelope.norms, scalar_config), x)
    c, = _converted_coefficients([envelope.h1_norm], scalar_config)
    x9 = x
    for _ in range(8):
        x9 = x9 * x
    eta = c * 20 * x9 / (TrackedFloat.exact(15) - x * 20)
    error = eta * norms * 2 + eta * eta
    scale, = _converted_coefficients([envelope.scale], scalar_config)
    total = base + error * scale * envelope.sign
    certificate = SignCertificate(
        alpha=alpha,
        form="direct",
        envelope=envelope.kind,
        value=total.value,
        bound=_upper_float(total.error),
        certified_sign=total.certified_sign(),
        expected_sign=expected,
        degree=max(envelope.base.degree, 0),
        epsilon=config.working_epsilon,
        running_bound=_upper_float(total.error),
    )
    return _finish(certificate)


def _finish(certificate: SignCertificate) -> SignCertificate:
    label = f"{certificate.envelope} ({certificate.form}) at alpha={certificate.alpha}"
    if certificate.certified_sign == 0:
        raise Inconclusive(
            f"{label}: |{certificate.value:.6e}| does not exceed round-off bound {certificate.bound:.3e}"
        )
    if certificate.certified_sign != certificate.expected_sign:
        raise SignMismatch(
            f"{label}: certified sign {certificate.certified_sign:+d}, expected {certificate.expected_sign:+d}"
        )
    return certificate


def certify_sign(
    p: Union[EnvelopePolynomial, RationalPoly],
    alpha,
    expected: int,
    form: str = "cleared",
    config: Optional[FermiCertifierConfig] = None,
) -> SignCertificate:
    """Certify the sign of p at alpha under worst-case round-off.

    Envelopes are certified either in their cleared degree-18 form or in the
    direct rational-plus-E form; plain polynomials are taken as already cleared.
    """
    config = config or FermiCertifierConfig()
    alpha = Fraction(alpha)
    if not -1 <= alpha <= 1:
        raise ValueError(f"certify_sign needs alpha in [-1, 1], got {alpha}")
    if expected not in (1, -1):
        raise ValueError(f"expected sign must be +1 or -1, got {expected}")
    if isinstance(p, RationalPoly):
        return _certify_cleared(p.coefficients, alpha, expected, "polynomial", config)
    if form == "cleared":
        return _certify_cleared(p.cleared.coefficients, alpha, expected, p.kind, config)
    if form == "direct":
        return _certify_direct(p, alpha, expected, config)
    raise ValueError(f"unknown evaluation form {form!r}")


def build_envelopes(
    series: PerturbationSeries, config: Optional[FermiCertifierConfig] = None
) -> Tuple[EnvelopePolynomial, EnvelopePolynomial]:
    config = config or FermiCertifierConfig()
    if series.order != ENVELOPE_ORDER:
        raise WrongOrder(f"envelopes need the order-{ENVELOPE_ORDER} series, got order {series.order}")
    h1_norm_sq = series.h1_norm_sq_of_term(ENVELOPE_ORDER)
    if h1_norm_sq > ROUNDED_H1_NORM ** 2:
        raise IngredientViolation(
            f"||H1 Psi^8||^2 = {h1_norm_sq} exceeds {ROUNDED_H1_NORM ** 2}", stage="build_envelopes"
        )
    if config.eta_norm == "exact":
        h1_norm = RadicalComplex.sqrt(h1_norm_sq)
    elif config.eta_norm == "rounded":
        h1_norm = RadicalComplex.rational(ROUNDED_H1_NORM)
    else:
        raise ValueError(f"eta_norm must be 'exact' or 'rounded', got {config.eta_norm!r}")
    base = series.numerator_series()
    norms = [RadicalComplex.sqrt(series.norm_sq_of_term(n)) for n in range(ENVELOPE_ORDER + 1)]
    worst = EnvelopePolynomial("worst", base, norms, h1_norm, Fraction(config.envelope_scale))
    best = EnvelopePolynomial("best", base, norms, h1_norm, Fraction(config.envelope_scale))
    if worst.cleared.degree != CLEARED_DEGREE or best.cleared.degree != CLEARED_DEGREE:
        raise ValueError("cleared envelope is not of degree 18")
    return worst, best


def bracket_magic_angle(
    worst: EnvelopePolynomial,
    best: EnvelopePolynomial,
    config: Optional[FermiCertifierConfig] = None,
) -> Tuple[Fraction, Fraction]:
    config = config or FermiCertifierConfig()
    for form in ("cleared", "direct"):
        certify_sign(worst, config.worst_point, -1, form, config)
        certify_sign(best, config.best_point, 1, form, config)
    return config.best_point, config.worst_point


def _as_function(p) -> Callable:
    if isinstance(p, EnvelopePolynomial):
        return p.evaluate_mp
    if isinstance(p, RationalPoly):
        coefficients = [_mpf(c) for c in reversed(p.to_rational().coefficients)]
        return lambda x: mpmath.polyval(coefficients, x)
    return p


def approximate_roots(p, interval=(Fraction(1, 2), Fraction(7, 10)), steps: int = 400, digits: int = 40) -> List[float]:
    """Sign-change scan followed by a bracketing solve. Not rigorous."""
    f = _as_function(p)
    roots: List[float] = []
    with mpmath.workdps(digits):
        lo, hi = _mpf(interval[0]), _mpf(interval[1])
        width = (hi - lo) / steps
        left = lo
        f_left = f(left)
        for k in range(1, steps + 1):
            right = lo + width * k
            f_right = f(right)
            if f_left == 0:
                roots.append(float(left))
            elif f_left * f_right < 0:
                root = mpmath.findroot(f, (left, right), solver="anderson")
                roots.append(float(root))
            left, f_left = right, f_right
        if f_left == 0:
            roots.append(float(left))
    return roots


def fermi_velocity(alpha, numerator: RationalPoly, denominator: RationalPoly, digits: int = 30) -> float:
    """Truncated ratio numerator/denominator; for figures only."""
    with mpmath.workdps(digits):
        x = _mpf(alpha) if isinstance(alpha, Fraction) else mpmath.mpf(alpha)
        return float(_as_function(numerator)(x) / _as_function(denominator)(x))


@dataclass
class FermiReport:
    certificates: List[SignCertificate] = field(default_factory=list)
    bracket: Optional[Tuple[Fraction, Fraction]] = None
    roots: Dict[str, List[float]] = field(default_factory=dict)
    envelope_values: Dict[str, float] = field(default_factory=dict)


class FermiCertifier:
    """Builds both envelopes and certifies the magic-angle bracket."""

    def __init__(self, series: PerturbationSeries, config: Optional[FermiCertifierConfig] = None):
        self.config = config or FermiCertifierConfig()
        self.series = series
        self.logger = logging.getLogger(__name__)
        self.worst, self.best = build_envelopes(series, self.config)
        self.numerator = self.worst.base
        self.denominator = series.denominator_series()

    def certify(self) -> FermiReport:
        self.logger.info("\n=== Fermi Velocity Sign Certificates ===")
        self.logger.info(f"Remainder constant: {self.config.eta_norm} ||H1 Psi^8||")
        report = FermiReport()
        checks = [
            (self.worst, self.config.worst_point, -1),
            (self.best, self.config.best_point, 1),
        ]
        for envelope, point, expected in checks:
            for form in ("cleared", "direct"):
                certificate = certify_sign(envelope, point, expected, form, self.config)
                report.certificates.append(certificate)
                self.logger.info(
                    f"✓ {envelope.kind:5s} {form:7s} alpha={float(point):.2f}: "
                    f"value {certificate.value:+.6f}, bound {certificate.bound:.2e}"
                )
                if certificate.reference_bound_holds is False:
                    self.logger.warning(
                        f"  sup|p_j| = {certificate.sup_coefficient:.1f} exceeds the reference "
                        f"bound {self.config.reference_coefficient_bound} after normalization"
                    )
            report.envelope_values[envelope.kind] = float(envelope.evaluate_mp(_mpf(point)))
        report.bracket = (self.config.best_point, self.config.worst_point)
        self.logger.info(f"Certified bracket: ({report.bracket[0]}, {report.bracket[1]})")
        report.roots = self.roots()
        return report

    def roots(self) -> Dict[str, List[float]]:
        interval = self.config.root_interval
        found = {
            "base": approximate_roots(self.numerator, interval, self.config.root_scan_steps, self.config.root_precision_digits),
            "worst": approximate_roots(self.worst, interval, self.config.root_scan_steps, self.config.root_precision_digits),
            "best": approximate_roots(self.best, interval, self.config.root_scan_steps, self.config.root_precision_digits),
        }
        for name, values in found.items():
            shown = ", ".join(f"{v:.5f}" for v in values) or "none"
            self.logger.info(f"  approximate roots of {name}: {shown}")
        return found

    def check_zero_rows(self, start=Fraction(1, 2), stop=Fraction(7, 10), points: int = 201) -> List[Dict]:
        """Rows (alpha, worst, base, best, ratio) for the zero-crossing figure."""
        rows = []
        for k in range(points):
            alpha = Fraction(start) + (Fraction(stop) - Fraction(start)) * k / (points - 1)
            with mpmath.workprec(128):
                x = _mpf(alpha)
                rows.append({
                    "alpha": float(alpha),
                    "worst": float(self.worst.evaluate_mp(x)),
                    "base": float(_as_function(self.numerator)(x)),
                    "best": float(self.best.evaluate_mp(x)),
                    "ratio": fermi_velocity(alpha, self.numerator, self.denominator),
                })
        return rows
