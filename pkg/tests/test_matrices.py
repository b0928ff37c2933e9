import numpy as np
import pytest

from lyapspec.matrices import (
    NumericError,
    ScaledMatrix,
    exterior_power,
    log_psi,
    scaled_multiply,
    scaled_singular_values,
    singular_values,
)


def test_singular_values_identity():
    for d in (1, 2, 3, 5):
        assert np.allclose(singular_values(np.eye(d)), 0.0, atol=1e-14)


def test_singular_values_diagonal():
    s = singular_values(np.diag([3.0, -0.5]))
    assert np.allclose(s, [np.log(3.0), np.log(0.5)], atol=1e-14)


def test_singular_values_permutation():
    P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert np.allclose(singular_values(P), 0.0, atol=1e-13)


def test_singular_values_sorted_and_det_sum():
    rng = np.random.default_rng(7)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        M = rng.uniform(-2.0, 2.0, (d, d))
        s = singular_values(M)
        assert np.all(np.diff(s) <= 1e-12)
        logdet = np.log(abs(np.linalg.det(M)))
        assert abs(s.sum() - logdet) <= 1e-9 * max(1.0, abs(logdet))


def test_singular_values_singular_matrix():
    s = singular_values(np.diag([3.0, 0.0]))
    assert s[0] == pytest.approx(np.log(3.0))
    assert np.isneginf(s[1])


def test_exterior_power_diagonal():
    E = exterior_power(np.diag([2.0, 3.0, 5.0]), 2)
    assert np.allclose(E, np.diag([6.0, 10.0, 15.0]), atol=1e-12)


def test_exterior_power_top_degree_is_det():
    rng = np.random.default_rng(3)
    M = rng.uniform(-2.0, 2.0, (4, 4))
    E = exterior_power(M, 4)
    assert E.shape == (1, 1)
    assert E[0, 0] == pytest.approx(np.linalg.det(M), rel=1e-10)


def test_exterior_power_multiplicative():
    rng = np.random.default_rng(11)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        m = int(rng.integers(1, d + 1))
        M = rng.uniform(-2.0, 2.0, (d, d))
        N = rng.uniform(-2.0, 2.0, (d, d))
        left = exterior_power(M @ N, m)
        right = exterior_power(M, m) @ exterior_power(N, m)
        tol = 1e-8 * (1.0 + np.linalg.norm(exterior_power(M, m)) * np.linalg.norm(exterior_power(N, m)))
        assert np.linalg.norm(left - right) <= tol


def test_exterior_norm_is_singular_value_product():
    # operator norm of the m-th compound equals sigma_1 * ... * sigma_m
    rng = np.random.default_rng(13)
    for _ in range(50):
        d = int(rng.integers(2, 5))
        M = rng.uniform(-2.0, 2.0, (d, d))
        s = singular_values(M)
        for m in range(1, d + 1):
            top = np.log(np.linalg.norm(exterior_power(M, m), ord=2))
            assert top == pytest.approx(s[:m].sum(), abs=1e-9)


def test_exterior_power_degree_out_of_range():
    with pytest.raises(ValueError):
        exterior_power(np.eye(2), 3)
    with pytest.raises(ValueError):
        exterior_power(np.eye(2), 0)


def test_log_psi_simple():
    assert log_psi(np.diag([2.0, 1.0]), [1.0, 1.0]) == pytest.approx(np.log(2.0))
    assert log_psi(np.diag([2.0, 1.0]), [1.0, 0.0]) == pytest.approx(np.log(2.0))
    assert log_psi(np.eye(3), [5.0, -1.0, 2.0]) == pytest.approx(0.0, abs=1e-13)


def test_log_psi_factorization_identity():
    # direct sum_i q_i log sigma_i against the telescoped compound-norm form
    rng = np.random.default_rng(29)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        M = rng.uniform(-2.0, 2.0, (d, d))
        q = rng.uniform(-3.0, 3.0, d)
        direct = log_psi(M, q)
        alt = 0.0
        for m in range(1, d):
            alt += (q[m - 1] - q[m]) * np.log(np.linalg.norm(exterior_power(M, m), ord=2))
        alt += q[d - 1] * np.log(abs(np.linalg.det(M)))
        assert abs(direct - alt) <= 1e-9 * max(1.0, abs(direct))


def test_log_psi_zero_exponent_skips_vanishing_sigma():
    assert log_psi(np.diag([3.0, 0.0]), [1.0, 0.0]) == pytest.approx(np.log(3.0))


def test_log_psi_negative_exponent_on_singular_raises():
    with pytest.raises(ValueError):
        log_psi(np.diag([3.0, 0.0]), [1.0, -1.0])


def test_scaled_matrix_window_and_value():
    rng = np.random.default_rng(17)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        mats = [rng.uniform(-2.0, 2.0, (d, d)) for _ in range(8)]
        S = ScaledMatrix.identity(d)
        direct = np.eye(d)
        for M in mats:
            S = scaled_multiply(ScaledMatrix.from_matrix(M), S)
            direct = M @ direct
        r = np.abs(S.base).sum(axis=1).max()
        assert 0.5 <= r <= 2.0
        want = singular_values(direct)
        got = scaled_singular_values(S)
        assert np.allclose(got, want, atol=1e-9 * max(1.0, np.abs(want).max()))


def test_scaled_matrix_survives_long_chain():
    # 5000 copies of 3*I would overflow a dense product long before the end
    S = ScaledMatrix.identity(2)
    F = ScaledMatrix.from_matrix(3.0 * np.eye(2))
    for _ in range(5000):
        S = scaled_multiply(F, S)
    assert S.log_scale == pytest.approx(5000 * np.log(3.0), rel=1e-12)
    assert np.allclose(scaled_singular_values(S), 5000 * np.log(3.0), rtol=1e-12)


def test_scaled_multiply_dimension_mismatch():
    with pytest.raises(ValueError):
        scaled_multiply(ScaledMatrix.identity(2), ScaledMatrix.identity(3))


def test_from_matrix_zero_raises():
    with pytest.raises(NumericError):
        ScaledMatrix.from_matrix(np.zeros((2, 2)))
