"""Numerical rank, span and kernel helpers shared by the algebraic modules.

All rank decisions go through `numerical_rank`: singular values below
``rank_rtol * max(s_max, reference)`` count as zero, and a singular value within
``ambiguity_factor`` of that cutoff raises `NumericalRankAmbiguity` instead of being rounded.
"""

from typing import Optional, Sequence

import numpy as np
from scipy.linalg import svdvals

from .config import DEFAULT_TOLERANCES, ToleranceConfig
from .errors import NumericalRankAmbiguity


def _as_rows(vectors: Sequence[np.ndarray], ncols: int) -> np.ndarray:
    if len(vectors) == 0:
        return np.zeros((0, ncols))
    return np.atleast_2d(np.asarray(vectors, dtype=float))


def rank_cutoff(s: np.ndarray, reference: float, tolerances: ToleranceConfig) -> float:
    largest = float(s[0]) if s.size else 0.0
    return tolerances.rank_rtol * max(largest, reference)


def check_gap(s: np.ndarray, cutoff: float, tolerances: ToleranceConfig, context: str) -> None:
    """Raise when a singular value sits in the ambiguity band around the cutoff."""
    if cutoff <= 0.0:
        return
    factor = tolerances.ambiguity_factor
    band = s[(s > cutoff / factor) & (s < cutoff * factor)]
    if band.size:
        raise NumericalRankAmbiguity(
            f"{context}: singular values {band.tolist()} within a factor {factor} of cutoff {cutoff:.3e}",
            {"context": context, "cutoff": cutoff, "singular_values": s.tolist()},
        )


def numerical_rank(
    matrix: np.ndarray,
    reference: float = 0.0,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    context: str = "rank",
) -> int:
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0
    s = svdvals(matrix)
    cutoff = rank_cutoff(s, reference, tolerances)
    if cutoff == 0.0:
        return 0
    check_gap(s, cutoff, tolerances, context)
    return int(np.sum(s > cutoff))


def span_basis(
    vectors: Sequence[np.ndarray],
    ncols: int,
    reference: float = 0.0,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    context: str = "span",
) -> np.ndarray:
    """Orthonormal rows spanning the given vectors."""
    rows = _as_rows(vectors, ncols)
    if rows.shape[0] == 0:
        return np.zeros((0, ncols))
    _, s, vt = np.linalg.svd(rows, full_matrices=False)
    cutoff = rank_cutoff(s, reference, tolerances)
    if cutoff == 0.0:
        return np.zeros((0, ncols))
    check_gap(s, cutoff, tolerances, context)
    rank = int(np.sum(s > cutoff))
    return vt[:rank]


def kernel_basis(
    matrix: np.ndarray,
    reference: float = 0.0,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    context: str = "kernel",
) -> np.ndarray:
    """Orthonormal rows spanning the kernel of ``matrix`` (acting on column vectors)."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    ncols = matrix.shape[1]
    if matrix.shape[0] == 0 or ncols == 0:
        return np.eye(ncols)
    _, s, vt = np.linalg.svd(matrix, full_matrices=True)
    cutoff = rank_cutoff(s, reference, tolerances)
    if cutoff == 0.0:
        return np.eye(ncols)
    check_gap(s, cutoff, tolerances, context)
    rank = int(np.sum(s > cutoff))
    return vt[rank:]


def complement_within(
    sub_rows: np.ndarray,
    ambient_rows: np.ndarray,
    tolerances: ToleranceConfig = DEFAULT_TOLERANCES,
    context: str = "complement",
) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of ``sub_rows`` inside ``ambient_rows``."""
    ncols = ambient_rows.shape[1]
    if ambient_rows.shape[0] == 0:
        return np.zeros((0, ncols))
    if sub_rows.shape[0] == 0:
        return span_basis(list(ambient_rows), ncols, 1.0, tolerances, context)
    q, _ = np.linalg.qr(sub_rows.T)
    projected = ambient_rows - (ambient_rows @ q) @ q.T
    return span_basis(list(projected), ncols, 1.0, tolerances, context)


def residual_outside(vector: np.ndarray, basis_rows: np.ndarray) -> float:
    """Norm of the component of ``vector`` orthogonal to the row span of ``basis_rows``."""
    vector = np.asarray(vector, dtype=float)
    if basis_rows.shape[0] == 0:
        return float(np.linalg.norm(vector))
    coeffs, *_ = np.linalg.lstsq(basis_rows.T, vector, rcond=None)
    return float(np.linalg.norm(basis_rows.T @ coeffs - vector))


def smallest_singular_value(matrix: np.ndarray) -> Optional[float]:
    """Smallest singular value, or None for an empty matrix."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return None
    return float(svdvals(matrix)[-1])
