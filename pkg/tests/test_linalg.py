"""Dense solver and eigensolver checked against numpy.linalg."""

import math

import numpy as np
import pytest

from accentgram.errors import NumericalError
from accentgram.linalg import det_log, lu_solve, sym_eigen


def random_spd(rng, n):
    m = rng.standard_normal((n, n))
    return m @ m.T + n * np.eye(n)


def test_lu_solve_matches_numpy():
    rng = np.random.default_rng(10)
    for n in (1, 2, 5, 13, 30):
        a = rng.standard_normal((n, n)) + n * np.eye(n)
        b = rng.standard_normal((n, 3))
        x = lu_solve(a, b)
        assert np.allclose(x, np.linalg.solve(a, b), rtol=0, atol=1e-9)
        # residual is the route-independent check
        assert np.max(np.abs(a @ x - b)) < 1e-9 * max(1.0, np.max(np.abs(b)))


def test_lu_solve_vector_rhs():
    rng = np.random.default_rng(11)
    a = random_spd(rng, 7)
    b = rng.standard_normal(7)
    assert np.allclose(lu_solve(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_det_log_matches_slogdet():
    rng = np.random.default_rng(12)
    for n in (2, 6, 13):
        a = rng.standard_normal((n, n)) + n * np.eye(n)
        sign, logabs = det_log(a)
        nsign, nlog = np.linalg.slogdet(a)
        assert sign == pytest.approx(nsign)
        assert logabs == pytest.approx(nlog, abs=1e-9)


def test_det_log_negative_determinant():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    sign, logabs = det_log(a)
    assert sign == -1.0
    assert logabs == pytest.approx(0.0, abs=1e-12)


def test_singular_matrix_reports_column():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]])
    with pytest.raises(NumericalError) as info:
        lu_solve(a, np.ones(3))
    assert "column" in str(info.value)


def test_zero_matrix_is_singular():
    with pytest.raises(NumericalError):
        det_log(np.zeros((4, 4)))


def test_shape_and_finiteness_validation():
    with pytest.raises(ValueError):
        lu_solve(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        lu_solve(np.array([[1.0, np.nan], [0.0, 1.0]]), np.ones(2))
    with pytest.raises(ValueError):
        lu_solve(np.eye(3), np.ones(4))


def test_sym_eigen_matches_numpy():
    rng = np.random.default_rng(13)
    for n in (1, 2, 5, 13, 20):
        a = random_spd(rng, n)
        values, vectors = sym_eigen(a)
        ref = np.sort(np.linalg.eigvalsh(a))[::-1]
        assert np.allclose(values, ref, rtol=1e-10, atol=1e-10 * ref[0])
        # eigen residual and orthonormality, independent of any library
        scale = np.max(np.abs(a))
        assert np.max(np.abs(a @ vectors - vectors * values)) < 1e-8 * scale
        assert np.max(np.abs(vectors.T @ vectors - np.eye(n))) < 1e-10


def test_sym_eigen_descending_order():
    rng = np.random.default_rng(14)
    values, _ = sym_eigen(random_spd(rng, 9))
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_sym_eigen_residual_stress():
    # near-diagonal and badly scaled matrices hit the sweep-termination path
    rng = np.random.default_rng(15)
    worst = 0.0
    for k in range(20):
        a = random_spd(rng, 13) * 10.0 ** rng.integers(-3, 4)
        values, vectors = sym_eigen(a)
        resid = np.max(np.abs(a @ vectors - vectors * values)) / np.max(np.abs(a))
        worst = max(worst, resid)
    assert worst < 1e-8


def test_sym_eigen_diagonal_is_exact():
    d = np.diag([5.0, 3.0, -1.0])
    values, vectors = sym_eigen(d)
    assert np.array_equal(values, np.array([5.0, 3.0, -1.0]))
    assert np.allclose(np.abs(vectors), np.eye(3))


def test_sym_eigen_rejects_asymmetric():
    a = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        sym_eigen(a)


def test_sym_eigen_accepts_roundoff_asymmetry():
    rng = np.random.default_rng(16)
    a = random_spd(rng, 6)
    a[0, 1] += 1e-12 * a[0, 1]  # below the relative symmetry gate
    values, _ = sym_eigen(a)
    assert math.isfinite(values[0])
