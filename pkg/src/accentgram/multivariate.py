"""Multivariate two-group battery.

Decomposes total scatter into between-group B and within-group W, tests
group separation with Pillai's trace and its F approximation, checks
covariance homogeneity with Box's M, and projects speakers onto the single
canonical discriminant axis. Groups are passed as (label, matrix) pairs;
callers fix the ordering (the pipeline sorts labels lexicographically).

Dense linear algebra goes through the in-package LU and Jacobi kernels so
singularity surfaces as a NumericalError with context rather than a numpy
LinAlgError.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .linalg import det_log, lu_solve, sym_eigen
from .special import chisq_cdf, f_cdf

GroupData = Sequence[tuple[str, np.ndarray]]


@dataclass(frozen=True)
class PillaiResult:
    pillai_v: float
    f_stat: float
    df1: int
    df2: int
    p: float
    partial_eta_sq: float


@dataclass(frozen=True)
class BoxMResult:
    m: float
    chi2: float
    df: int
    p: float


@dataclass(frozen=True)
class ManovaResult:
    """Pillai and Box results in one flat record, ready to serialize."""

    pillai_v: float
    f_stat: float
    df1: int
    df2: int
    p: float
    partial_eta_sq: float
    box_m: float
    box_chi2: float
    box_df: int
    box_p: float


@dataclass(frozen=True)
class CdaResult:
    """Single canonical function of a two-group analysis.

    raw_coeffs are scaled so the pooled within-group variance of scores is
    exactly 1; std_coeffs multiply each raw coefficient by the pooled SD of
    its feature. Scores are centered on the grand mean and kept in the
    caller's row order, one array per group.
    """

    eigenvalue: float
    raw_coeffs: np.ndarray
    std_coeffs: np.ndarray
    group_labels: tuple[str, ...]
    scores: tuple[np.ndarray, ...]
    centroids: tuple[float, ...]


def _validated(groups: GroupData, min_rows: int = 2) -> list[tuple[str, np.ndarray]]:
    out: list[tuple[str, np.ndarray]] = []
    seen: set[str] = set()
    n_features = -1
    for label, values in groups:
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] < 1:
            raise DataError(f"group {label!r}: expected an (n x p) matrix, got shape {values.shape}")
        if n_features < 0:
            n_features = values.shape[1]
        elif values.shape[1] != n_features:
            raise DataError(f"group {label!r}: {values.shape[1]} features, others have {n_features}")
        if values.shape[0] < min_rows:
            raise DataError(f"group {label!r}: needs at least {min_rows} rows, got {values.shape[0]}")
        if not np.all(np.isfinite(values)):
            raise DataError(f"group {label!r}: values must be finite")
        if label in seen:
            raise DataError(f"duplicate group label {label!r}")
        seen.add(label)
        out.append((label, values))
    if len(out) < 2:
        raise DataError(f"need at least 2 groups, got {len(out)}")
    return out


def scatter_matrices(groups: GroupData) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Between-group B, within-group W, and S_pooled = W / (N - g)."""
    groups = _validated(groups)
    stacked = np.vstack([values for _, values in groups])
    grand = stacked.mean(axis=0)
    n_features = stacked.shape[1]

    between = np.zeros((n_features, n_features))
    within = np.zeros((n_features, n_features))
    for _, values in groups:
        center = values.mean(axis=0)
        offset = center - grand
        between += values.shape[0] * np.outer(offset, offset)
        resid = values - center
        within += resid.T @ resid
    pooled = within / (stacked.shape[0] - len(groups))
    return between, within, pooled


def pillai_manova(b: np.ndarray, w: np.ndarray, n_total: int, n_groups: int) -> PillaiResult:
    """Pillai's trace V = tr(B (B+W)^-1) with the standard F approximation.

    F = ((2n'+s+1)/(2m+s+1)) * (V/s) / (1 - V/s) on df (s(2m+s+1), s(2n'+s+1))
    where s = min(p, g-1), m = (|p-g+1|-1)/2, n' = (N-g-p-1)/2. Partial
    eta squared is reported as V/s.
    """
    b = np.asarray(b, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if b.shape != w.shape or b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DataError(f"scatter matrices must be square and congruent, got {b.shape} and {w.shape}")
    p = b.shape[0]
    if n_total <= n_groups + p:
        raise DataError(f"need N > g + p for the F approximation, got N={n_total}, g={n_groups}, p={p}")

    v = float(np.trace(lu_solve(b + w, b)))
    s = min(p, n_groups - 1)
    m = (abs(p - n_groups + 1) - 1) / 2.0
    n_prime = (n_total - n_groups - p - 1) / 2.0
    df1 = int(round(s * (2 * m + s + 1)))
    df2 = int(round(s * (2 * n_prime + s + 1)))
    ratio = v / s
    if ratio >= 1.0:
        raise NumericalError(f"Pillai ratio V/s = {ratio} at the boundary, F undefined")
    f_stat = ((2 * n_prime + s + 1) / (2 * m + s + 1)) * ratio / (1.0 - ratio)
    return PillaiResult(
        pillai_v=v,
        f_stat=float(f_stat),
        df1=df1,
        df2=df2,
        p=1.0 - f_cdf(f_stat, float(df1), float(df2)),
        partial_eta_sq=ratio,
    )


def box_m(groups: GroupData) -> BoxMResult:
    """Box's M for equality of group covariance matrices.

    M = (N-g) ln|S_pooled| - sum (n_i - 1) ln|S_i|, chi-square approximated
    with the usual first-order correction on df = p(p+1)(g-1)/2.
    """
    groups = _validated(groups)
    n_features = groups[0][1].shape[1]
    n_total = sum(values.shape[0] for _, values in groups)
    n_groups = len(groups)

    log_dets = []
    for label, values in groups:
        if values.shape[0] <= n_features:
            raise NumericalError(
                f"group {label!r}: covariance is singular with n={values.shape[0]} <= p={n_features}"
            )
        cov = np.cov(values, rowvar=False, ddof=1)
        try:
            sign, log_det = det_log(cov)
        except NumericalError as exc:
            raise NumericalError(f"group {label!r}: {exc}") from exc
        if sign <= 0:
            raise NumericalError(f"group {label!r}: covariance is not positive definite")
        log_dets.append((values.shape[0], log_det))

    pooled = scatter_matrices(groups)[2]
    sign, pooled_log_det = det_log(pooled)
    if sign <= 0:
        raise NumericalError("pooled covariance is not positive definite")

    m_stat = (n_total - n_groups) * pooled_log_det - sum((n_i - 1) * ld for n_i, ld in log_dets)
    c1 = (sum(1.0 / (n_i - 1) for n_i, _ in log_dets) - 1.0 / (n_total - n_groups)) * (
        (2 * n_features**2 + 3 * n_features - 1) / (6.0 * (n_features + 1) * (n_groups - 1))
    )
    chi2 = m_stat * (1.0 - c1)
    df = n_features * (n_features + 1) * (n_groups - 1) // 2
    return BoxMResult(
        m=float(m_stat), chi2=float(chi2), df=df, p=1.0 - chisq_cdf(max(chi2, 0.0), float(df))
    )


def run_manova(groups: GroupData) -> ManovaResult:
    """Pillai and Box tests on one dataset, merged into a flat result."""
    groups = _validated(groups)
    between, within, _ = scatter_matrices(groups)
    n_total = sum(values.shape[0] for _, values in groups)
    pillai = pillai_manova(between, within, n_total, len(groups))
    box = box_m(groups)
    return ManovaResult(
        pillai_v=pillai.pillai_v,
        f_stat=pillai.f_stat,
        df1=pillai.df1,
        df2=pillai.df2,
        p=pillai.p,
        partial_eta_sq=pillai.partial_eta_sq,
        box_m=box.m,
        box_chi2=box.chi2,
        box_df=box.df,
        box_p=box.p,
    )


def _inv_sqrt_psd(matrix: np.ndarray, context: str) -> np.ndarray:
    values, vectors = sym_eigen(matrix)
    if values[-1] <= 1e-12 * max(values[0], 1.0):
        raise NumericalError(f"{context} is singular (smallest eigenvalue {values[-1]:.3e})")
    return (vectors / np.sqrt(values)) @ vectors.T


def cda(groups: GroupData) -> CdaResult:
    """Canonical discriminant axis for exactly two groups.

    Solves B a = lambda W a through the symmetric form
    W^(-1/2) B W^(-1/2), takes the leading eigenpair, and rescales a to
    unit pooled within-group score variance. The sign convention makes the
    largest-|standardized coefficient| entry positive so runs are
    comparable.
    """
    groups = _validated(groups)
    if len(groups) != 2:
        raise DataError(f"canonical analysis supports exactly two groups, got {len(groups)}")
    between, within, pooled = scatter_matrices(groups)

    w_inv_sqrt = _inv_sqrt_psd(within, "within-group scatter")
    sym = w_inv_sqrt @ between @ w_inv_sqrt
    sym = (sym + sym.T) / 2.0  # kill asymmetric roundoff before the Jacobi gate
    eigenvalues, eigenvectors = sym_eigen(sym)
    eigenvalue = max(float(eigenvalues[0]), 0.0)

    axis = w_inv_sqrt @ eigenvectors[:, 0]
    scale = float(axis @ pooled @ axis)
    if scale <= 0.0:
        raise NumericalError("canonical axis has nonpositive pooled variance")
    axis = axis / np.sqrt(scale)
    std_coeffs = axis * np.sqrt(np.diag(pooled))
    flip_at = int(np.argmax(np.abs(std_coeffs)))
    if std_coeffs[flip_at] < 0.0:
        axis = -axis
        std_coeffs = -std_coeffs

    grand = np.vstack([values for _, values in groups]).mean(axis=0)
    scores = tuple((values - grand) @ axis for _, values in groups)
    return CdaResult(
        eigenvalue=eigenvalue,
        raw_coeffs=axis,
        std_coeffs=std_coeffs,
        group_labels=tuple(label for label, _ in groups),
        scores=scores,
        centroids=tuple(float(s.mean()) for s in scores),
    )
