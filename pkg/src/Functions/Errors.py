from fractions import Fraction
from typing import Optional


class CertificationError(Exception):
    """Base class for every failure raised by the certification pipeline."""

    stage = "certification"

    def __init__(self, message: str, stage: Optional[str] = None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


# Exact scalars
class MultiTermInverse(CertificationError):
    stage = "exact-scalar"


class ZeroInverse(CertificationError, ZeroDivisionError):
    stage = "exact-scalar"


class ConversionOverflow(CertificationError, OverflowError):
    stage = "exact-scalar"


class ConversionBoundExceeded(CertificationError):
    stage = "exact-scalar"


# Lattice and chiral basis
class OriginHasNoPhase(CertificationError):
    stage = "momentum-lattice"


class WrongChirality(CertificationError):
    stage = "chiral-basis"


# Fermi velocity
class WrongOrder(CertificationError):
    stage = "build_envelopes"


class Inconclusive(CertificationError):
    stage = "certify_sign"


class SignMismatch(CertificationError):
    stage = "certify_sign"


# Gap certification
class CountMismatch(CertificationError):
    stage = "build_xi"


class MuViolation(CertificationError):
    stage = "verify_mu_choice"


class BoundaryDegreeViolation(CertificationError):
    stage = "verify_mu_choice"


class SupportEscape(CertificationError):
    stage = "verify_mu_choice"


class NoConvergence(CertificationError):
    stage = "eigensolve"


class MuTooLarge(CertificationError):
    stage = "enclose"


class GridTooCoarse(CertificationError):
    stage = "sweep_and_certify"


class IngredientViolation(CertificationError):
    stage = "lipschitz_constant"


class PointFailure(CertificationError):
    stage = "sweep_and_certify"

    def __init__(self, alpha: Fraction, lower_bound: float, threshold: Fraction):
        super().__init__(
            f"certified lower bound {lower_bound:.12f} at alpha={alpha} "
            f"is below {threshold}"
        )
        self.alpha = alpha
        self.lower_bound = lower_bound


class ZeroModeMissing(CertificationError):
    stage = "enclose"
