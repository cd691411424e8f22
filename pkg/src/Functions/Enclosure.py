"""Rigorous enclosures for approximate eigenpairs of a Hermitian matrix.

The approximate eigenvectors V are never trusted: their orthonormality defect
and residuals are measured in floating point and inflated by the worst-case
rounding of those measurements. If every eigenpair residual is at most `bound`
then the true spectrum can be matched one-to-one with the computed eigenvalues
so that each pair is within 2*m*bound.
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np  # type: ignore

from src.Functions.Errors import IngredientViolation, MuTooLarge, ZeroModeMissing
from src.Functions.RadicalComplex import DEFAULT_SCALAR_CONFIG

logger = logging.getLogger(__name__)

# accounts for the rounding of the radius itself
RADIUS_SLACK = 1.0001
INFLATION = 1.01


@dataclass
class EigenEnclosure:
    alpha: Optional[Fraction]
    eigenvalues: np.ndarray      # ascending approximate eigenvalues
    radius: float                # uniform enclosure radius
    mu: float                    # orthonormality defect including rounding
    residual_sup: float          # sup_i ||A v_i - lambda_i v_i||_inf as computed
    zero_index: Optional[int] = None
    gap_lower: Optional[float] = None
    symmetric: bool = True
    ingredients: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.eigenvalues)

    def intervals(self) -> List[Tuple[float, float]]:
        return [(lam - self.radius, lam + self.radius) for lam in self.eigenvalues]

    def contains(self, value: float) -> bool:
        return any(lo <= value <= hi for lo, hi in self.intervals())

    def nonzero_sector(self) -> np.ndarray:
        """Eigenvalues with the zero-mode index removed."""
        if self.zero_index is None:
            return self.eigenvalues.copy()
        return np.delete(self.eigenvalues, self.zero_index)

    def first_positive(self) -> float:
        """Smallest approximate eigenvalue of the nonzero sector above the zero mode (or above 0)."""
        sector = self.nonzero_sector()
        if self.zero_index is not None:
            above = sector[self.zero_index:]
        else:
            above = sector[sector > 0]
        return float(above[0]) if len(above) else math.inf


def orthonormality_defect(vectors: np.ndarray, epsilon: float) -> float:
    """mu = max|G_ii - 1| + max_{i != j}|G_ij| + 1.01 n^2 eps sup||v||_inf^2 with G = V^H V."""
    n = vectors.shape[0]
    gram = vectors.conj().T @ vectors
    diagonal = np.max(np.abs(np.diag(gram).real - 1.0)) if gram.size else 0.0
    off = np.abs(gram - np.diag(np.diag(gram)))
    off_max = float(off.max()) if off.size else 0.0
    vinf = float(np.max(np.abs(vectors))) if vectors.size else 0.0
    return INFLATION * n * n * epsilon * vinf * vinf + float(diagonal) + off_max


def _check_ingredient(name: str, observed: float, claimed: float, slack: float) -> None:
    # observed values are themselves rounded; allow their relative error
    if observed > claimed * (1 + slack):
        raise IngredientViolation(
            f"{name} = {observed:.6f} exceeds the assumed bound {claimed}", stage="enclose"
        )


def enclose(
    matrix,
    pairs: Tuple[np.ndarray, np.ndarray],
    norm2_bound: Optional[float] = 10,
    max_entry_bound: Optional[float] = 7,
    epsilon: Optional[float] = None,
    zero_mode: bool = True,
    alpha: Optional[Fraction] = None,
) -> EigenEnclosure:
    """Certified radius around each computed eigenvalue.

    `matrix` is a ProjectedMatrix or a Hermitian ndarray whose entries carry a
    relative error of at most `epsilon`. With `zero_mode` the matrix is known
    to have an exact zero eigenvalue; the index closest to zero is assigned to
    it and the certified gap is the distance from zero of the rest.
    """
    dense = np.asarray(getattr(matrix, "dense", matrix), dtype=np.complex128)
    if alpha is None:
        alpha = getattr(matrix, "alpha", None)
    eps = float(DEFAULT_SCALAR_CONFIG.working_epsilon if epsilon is None else epsilon)
    eigenvalues, vectors = pairs
    eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
    vectors = np.asarray(vectors, dtype=np.complex128)
    n = dense.shape[0]
    m = n

    amax = float(np.max(np.abs(dense))) if dense.size else 0.0
    if max_entry_bound is None:
        max_entry_bound = amax * (1 + 4 * eps)
    else:
        _check_ingredient("max entry", amax, max_entry_bound, eps)
    if norm2_bound is None:
        norm2_bound = float(np.linalg.norm(dense)) * (1 + 4 * n * eps)
    else:
        _check_ingredient("spectral norm", float(np.linalg.norm(dense, 2)), norm2_bound, 1e-12)

    mu = orthonormality_defect(vectors, eps)
    if m * mu >= 0.5:
        raise MuTooLarge(f"m*mu = {m * mu:.3e} is not below 1/2 (alpha={alpha})")

    residuals = dense @ vectors - vectors * eigenvalues[None, :]
    rinf = float(np.max(np.abs(residuals))) if residuals.size else 0.0
    vinf = float(np.max(np.abs(vectors))) if vectors.size else 0.0
    lam_sup = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0

    bound = (
        m * (norm2_bound + lam_sup) * mu / math.sqrt(2)
        + math.sqrt(n) * rinf
        + INFLATION * n ** 2.5 * eps * (amax + lam_sup) * vinf
        + n * eps * max_entry_bound * vinf
    )
    radius = 2 * m * bound * RADIUS_SLACK

    zero_index = None
    gap_lower = None
    if zero_mode:
        zero_index = int(np.argmin(np.abs(eigenvalues)))
        if abs(eigenvalues[zero_index]) > radius:
            raise ZeroModeMissing(
                f"no enclosure contains 0 (closest eigenvalue {eigenvalues[zero_index]:.3e}, "
                f"radius {radius:.3e})"
            )
        rest = np.abs(np.delete(eigenvalues, zero_index))
        gap_lower = float(rest.min()) - radius if rest.size else math.inf

    mirrored = np.abs(eigenvalues + eigenvalues[::-1])
    symmetric = bool(np.all(mirrored <= 2 * radius))

    logger.debug(
        f"alpha={alpha}: mu={mu:.3e} rinf={rinf:.3e} radius={radius:.3e}"
        + (f" gap>={gap_lower:.12f}" if gap_lower is not None else "")
    )
    return EigenEnclosure(
        alpha=alpha,
        eigenvalues=eigenvalues,
        radius=radius,
        mu=mu,
        residual_sup=rinf,
        zero_index=zero_index,
        gap_lower=gap_lower,
        symmetric=symmetric,
        ingredients={
            "norm2_bound": norm2_bound,
            "max_entry_bound": max_entry_bound,
            "lambda_sup": lam_sup,
            "vector_sup": vinf,
            "epsilon": eps,
        },
    )


def enclosure_contains_all(enclosure: EigenEnclosure, reference: Sequence[float]) -> bool:
    """Whether each sorted reference eigenvalue lies in the matching sorted interval."""
    ordered = sorted(reference)
    return all(
        abs(ref - lam) <= enclosure.radius
        for ref, lam in zip(ordered, enclosure.eigenvalues)
    )
