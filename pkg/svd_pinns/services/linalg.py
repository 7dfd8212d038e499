"""
Dense real linear algebra for the hidden weight matrix.

The SVD is a one-sided (Hestenes) Jacobi iteration: cyclic sweeps of plane
rotations applied to the columns of A until every pair of columns is
orthogonal to working precision. Column norms then give the singular values,
normalized columns give U, and the accumulated rotations give V.
"""

from dataclasses import dataclass

import numpy as np

from svd_pinns.exceptions import ConvergenceError, DimensionError, NumericError

MAX_SWEEPS = 60
ROTATION_TOLERANCE = 1e-14


@dataclass(frozen=True)
class SvdFactors:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def size(self) -> int:
        return self.sigma.shape[0]


def as_matrix(entries, rows: int = None, cols: int = None) -> np.ndarray:
    """
    Validate and return a float64 matrix.

    Args:
        entries: Nested sequence, 2-d array, or flat row-major sequence
        rows: Row count, required when ``entries`` is flat
        cols: Column count, required when ``entries`` is flat

    Returns:
        np.ndarray: A (rows, cols) float64 array with finite entries
    """
    matrix = np.array(entries, dtype=np.float64)
    if rows is not None and cols is not None:
        if matrix.size != rows * cols:
            raise DimensionError(
                f"{matrix.size} entries cannot fill a {rows}x{cols} matrix"
            )
        matrix = matrix.reshape(rows, cols)
    if matrix.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NumericError("matrix contains non-finite entries", stage="linalg")
    return matrix


def orthonormality_defect(q: np.ndarray) -> float:
    """max |QᵀQ - I|."""
    if q.size == 0:
        return 0.0
    return float(np.max(np.abs(q.T @ q - np.eye(q.shape[1]))))


def svd(a) -> SvdFactors:
    """
    Full SVD of a square matrix, A = U · diag(sigma) · Vᵀ.

    sigma is nonnegative and sorted descending (stable for ties); the
    largest-magnitude entry of every U column is nonnegative.

    Raises:
        DimensionError: ``a`` is not square
        ConvergenceError: columns still not orthogonal after MAX_SWEEPS sweeps
    """
    a = as_matrix(a)
    m, n = a.shape
    if m != n:
        raise DimensionError(f"svd needs a square matrix, got {m}x{n}")
    if m == 0:
        empty = np.zeros((0, 0))
        return SvdFactors(empty, np.zeros(0), empty)

    tolerance = max(ROTATION_TOLERANCE, m * np.finfo(np.float64).eps)
    # rows of gt are the columns of A being orthogonalized
    gt = a.T.copy()
    vt = np.eye(m)

    converged = False
    off_diagonal = 0.0
    sweeps = 0
    while sweeps < MAX_SWEEPS:
        sweeps += 1
        off_diagonal = 0.0
        rotated = False
        for p in range(m - 1):
            for q in range(p + 1, m):
                alpha = gt[p] @ gt[p]
                beta = gt[q] @ gt[q]
                gamma = gt[p] @ gt[q]
                scale = np.sqrt(alpha * beta)
                if scale == 0.0:
                    continue
                cosine = abs(gamma) / scale
                off_diagonal = max(off_diagonal, cosine)
                if cosine <= tolerance:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                row_p = gt[p].copy()
                gt[p] = c * row_p - s * gt[q]
                gt[q] = s * row_p + c * gt[q]
                row_p = vt[p].copy()
                vt[p] = c * row_p - s * vt[q]
                vt[q] = s * row_p + c * vt[q]
                rotated = True
        if not rotated:
            converged = True
            break

    if not converged:
        raise ConvergenceError(off_diagonal, sweeps)

    sigma = np.sqrt(np.einsum("ij,ij->i", gt, gt))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    gt = gt[order]
    v = vt[order].T

    u = np.zeros((m, m))
    negligible = sigma[0] * m * np.finfo(np.float64).eps if sigma[0] > 0 else 0.0
    kept = sigma > negligible
    u[:, kept] = (gt[kept] / sigma[kept, None]).T
    if not np.all(kept):
        u = _complete_basis(u, kept)

    u, v = _fix_signs(u, v)
    return SvdFactors(u=u, sigma=sigma, v=v)


def _complete_basis(u: np.ndarray, kept: np.ndarray) -> np.ndarray:
    """Fill the columns of u belonging to (numerically) zero singular values."""
    known = u[:, kept]
    q, _ = np.linalg.qr(known, mode="complete") if known.shape[1] else (np.eye(u.shape[0]), None)
    complement = q[:, known.shape[1]:]
    completed = u.copy()
    completed[:, ~kept] = complement
    return completed


def _fix_signs(u: np.ndarray, v: np.ndarray):
    pivots = np.argmax(np.abs(u), axis=0)
    signs = np.where(u[pivots, np.arange(u.shape[1])] < 0, -1.0, 1.0)
    return u * signs, v * signs


def reconstruct(factors: SvdFactors) -> np.ndarray:
    """U · diag(sigma) · Vᵀ."""
    m = factors.sigma.shape[0]
    if factors.u.shape != (m, m) or factors.v.shape != (m, m):
        raise DimensionError(
            f"factor shapes u {factors.u.shape}, v {factors.v.shape} "
            f"do not match {m} singular values"
        )
    return (factors.u * factors.sigma) @ factors.v.T
