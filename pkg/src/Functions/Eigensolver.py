import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np  # type: ignore

from src.Functions.Errors import NoConvergence

EPS = np.finfo(np.float64).eps

logger = logging.getLogger(__name__)


@dataclass
class EigensolverConfig:
    """Configuration for the dense Hermitian eigensolver."""
    method: str = "jacobi"     # "jacobi" (cyclic, deterministic) or "numpy" (LAPACK eigh)
    max_sweeps: int = 60


@lru_cache(maxsize=16)
def round_robin_schedule(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint (p, q) pairs, p < q, covering every pair exactly once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for k in range(size // 2):
            a, b = players[k], players[size - 1 - k]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(
    matrix: np.ndarray,
    max_sweeps: int = 60,
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi with round-robin (parallel) ordering.

    Each round applies disjoint rotations J with J[p,p] = J[q,q] = c,
    J[p,q] = s e^{i theta}, J[q,p] = -s e^{-i theta}, theta = arg(a_pq).
    A pair is skipped once |a_pq| <= eps * sqrt(|a_pp a_qq|) + floor; the
    iteration stops after a sweep with no rotations.

    With `start` (approximate eigenvectors of a nearby matrix) the sweeps run
    on Q^H A Q, where Q is the orthonormalized start basis, and only a few
    sweeps are needed.
    """
    a = np.array(matrix, dtype=np.complex128, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if n < 2:
        return a.diagonal().real.copy(), np.eye(n, dtype=np.complex128)
    if start is None:
        basis = np.eye(n, dtype=np.complex128)
    else:
        basis, _ = np.linalg.qr(np.asarray(start, dtype=np.complex128))
        a = basis.conj().T @ a @ basis
        a = (a + a.conj().T) / 2

    # rows 0..n-1 hold A, rows n..2n-1 the accumulated eigenvectors; both take the column rotation
    work = np.vstack([a, basis])
    a = work[:n]
    floor = EPS * np.linalg.norm(a) / n
    schedule = round_robin_schedule(n)
    for sweep in range(max_sweeps):
        rotations = 0
        for ps, qs in schedule:
            apq = a[ps, qs]
            app = a[ps, ps].real
            aqq = a[qs, qs].real
            mag = np.abs(apq)
            active = mag > EPS * np.sqrt(np.abs(app * aqq)) + floor
            if not active.any():
                continue
            if not active.all():
                ps, qs = ps[active], qs[active]
                apq, app, aqq, mag = apq[active], app[active], aqq[active], mag[active]
            rotations += len(ps)

            phase = apq / mag
            tau = (aqq - app) / (2.0 * mag)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            sp, sq = s * phase, s * np.conj(phase)

            col_p, col_q = work[:, ps], work[:, qs]
            work[:, ps] = c * col_p - sq * col_q
            work[:, qs] = sp * col_p + c * col_q

            row_p, row_q = a[ps, :], a[qs, :]
            a[ps, :] = c[:, None] * row_p - sp[:, None] * row_q
            a[qs, :] = sq[:, None] * row_p + c[:, None] * row_q
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
        if rotations == 0:
            logger.debug(f"Jacobi converged after {sweep} sweeps")
            break
    else:
        raise NoConvergence(f"Jacobi did not converge within {max_sweeps} sweeps (n={n})")
    eigenvalues = a.diagonal().real
    order = np.argsort(eigenvalues, kind="stable")
    return eigenvalues[order].copy(), work[n:, order].copy()


def eigensolve(
    matrix,
    config: EigensolverConfig = EigensolverConfig(),
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvector columns of a Hermitian double matrix.

    Accepts a ProjectedMatrix (its `dense` array is used) or an ndarray.
    `start` warm-starts the Jacobi method and is ignored by LAPACK.
    """
    dense = getattr(matrix, "dense", matrix)
    dense = np.asarray(dense, dtype=np.complex128)
    if config.method == "jacobi":
        return jacobi_eigh(dense, config.max_sweeps, start)
    if config.method == "numpy":
        eigenvalues, eigenvectors = np.linalg.eigh(dense)
        return eigenvalues, eigenvectors
    raise ValueError(f"unknown eigensolver method {config.method!r}")
