"""Small dense linear-algebra kernel: LU solve, log-determinant, Jacobi eigen.

Everything here runs on matrices of order <= a few dozen (13 features in the
default pipeline), so the implementations favor robustness and transparent
failure modes over speed.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError

_PIVOT_RTOL = 1e-12
_SYMMETRY_ATOL = 1e-9
_JACOBI_SWEEPS = 100


def _as_square(a) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def lu_factor(a) -> tuple[np.ndarray, np.ndarray, float]:
    """LU factorization with partial pivoting.

    Returns (lu, perm, sign): the packed L\\U matrix, the row permutation
    applied, and the permutation sign. Raises NumericalError naming the
    offending column when a pivot falls below 1e-12 times the matrix scale.
    """
    lu = _as_square(a)
    n = lu.shape[0]
    scale = np.abs(lu).max()
    if scale == 0.0:
        raise NumericalError("singular matrix: all entries are zero (pivot at column 0)")
    perm = np.arange(n)
    sign = 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if abs(lu[p, k]) < _PIVOT_RTOL * scale:
            raise NumericalError(
                f"singular matrix: pivot {lu[p, k]:.3e} at column {k} "
                f"(threshold {_PIVOT_RTOL * scale:.3e})"
            )
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        lu[k + 1 :, k] /= lu[k, k]
        lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    return lu, perm, sign


def lu_solve(a, b) -> np.ndarray:
    """Solve A X = B for X (B may be a vector or a matrix of columns)."""
    lu, perm, _ = lu_factor(a)
    n = lu.shape[0]
    b_arr = np.array(b, dtype=float)
    vector_input = b_arr.ndim == 1
    if vector_input:
        b_arr = b_arr[:, None]
    if b_arr.shape[0] != n:
        raise ValueError(f"dimension mismatch: A is {n}x{n}, B has {b_arr.shape[0]} rows")
    x = b_arr[perm].copy()
    for k in range(n):  # forward substitution, unit lower triangle
        x[k + 1 :] -= np.outer(lu[k + 1 :, k], x[k])
    for k in range(n - 1, -1, -1):  # back substitution
        x[k] /= lu[k, k]
        x[:k] -= np.outer(lu[:k, k], x[k])
    return x[:, 0] if vector_input else x


def det_log(a) -> tuple[float, float]:
    """Determinant as (sign, log|det|), stable for badly scaled matrices."""
    lu, _, sign = lu_factor(a)
    diag = np.diag(lu)
    sign *= float(np.prod(np.sign(diag)))
    return sign, float(np.sum(np.log(np.abs(diag))))


def sym_eigen(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order and the matching eigenvectors as
    columns. The input must be symmetric within 1e-9 (absolute, relative to
    the largest entry); the iteration runs until the off-diagonal Frobenius
    norm drops below 1e-12 of the matrix norm.
    """
    m = _as_square(a)
    scale = max(1.0, float(np.abs(m).max()))
    if float(np.abs(m - m.T).max()) > _SYMMETRY_ATOL * scale:
        raise ValueError("matrix is not symmetric within 1e-9")
    n = m.shape[0]
    m = 0.5 * (m + m.T)
    v = np.eye(n)
    norm = max(float(np.linalg.norm(m)), 1.0)
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(_JACOBI_SWEEPS):
        # summed over off-diagonal entries directly: the sum(m^2) - sum(diag^2)
        # form cancels catastrophically once the matrix is nearly diagonal
        off = math.sqrt(float(np.sum(m[off_mask] ** 2)))
        if off < 1e-12 * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * m[:, p] - s * m[:, q]
                rot_q = s * m[:, p] + c * m[:, q]
                m[:, p], m[:, q] = rot_p, rot_q
                rot_p = c * m[p, :] - s * m[q, :]
                rot_q = s * m[p, :] + c * m[q, :]
                m[p, :], m[q, :] = rot_p, rot_q
                m[p, q] = m[q, p] = 0.0
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    else:
        raise NumericalError("Jacobi eigensolver failed to converge")
    values = np.diag(m).copy()
    order = np.argsort(values)[::-1]
    return values[order], v[:, order]
