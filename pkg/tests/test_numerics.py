import math

import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal
from scipy.special import eval_genlaguerre

import numerics
from errors import ConvergenceError, ValidationError
from model import ModelParams, build_chain_hamiltonian
from numerics import (
    SymTridiag,
    eig_sym_dense,
    eig_sym_tridiag,
    expi_weighted_sum,
    laguerre,
    laguerre_table,
    log_factorials,
    normalize,
    tridiagonalize,
)


def random_tridiag(rng, size):
    return SymTridiag(rng.normal(size=size), rng.normal(size=size - 1))


def test_exchange_matrix():
    pairs = eig_sym_tridiag(SymTridiag([0.0, 0.0], [1.0]))
    np.testing.assert_allclose(pairs.values, [-1.0, 1.0], atol=1e-14)


def test_diagonal_input_is_returned_sorted():
    pairs = eig_sym_tridiag(SymTridiag([3.0, 0.0, 2.0, 1.0], [0.0, 0.0, 0.0]))
    np.testing.assert_array_equal(pairs.values, [0.0, 1.0, 2.0, 3.0])
    assert pairs.orthonormality_error() == 0.0


def test_single_entry():
    pairs = eig_sym_tridiag(SymTridiag([2.5], []))
    assert pairs.values.tolist() == [2.5]
    assert pairs.vectors.tolist() == [[1.0]]


def test_displaced_oscillator_ladder():
    params = ModelParams(omega=1.0, omega0=0.0, g=2.0, n_max=128)
    pairs = eig_sym_tridiag(build_chain_hamiltonian(params, 1))
    n = np.arange(40)
    np.testing.assert_allclose(pairs.values[:40], n - 4.0, atol=1e-9)


@pytest.mark.parametrize("size", [2, 5, 17, 64])
def test_random_tridiagonal_properties(size):
    rng = np.random.default_rng(size)
    m = random_tridiag(rng, size)
    pairs = eig_sym_tridiag(m)
    assert np.all(np.diff(pairs.values) >= 0)
    assert pairs.residual(m) <= 1e-9 * m.norm_inf()
    assert pairs.orthonormality_error() <= 1e-10
    assert abs(pairs.values.sum() - m.diag.sum()) <= 1e-10 * max(1.0, abs(m.diag.sum()))
    expected = eigh_tridiagonal(m.diag, m.offdiag, eigvals_only=True)
    np.testing.assert_allclose(pairs.values, expected, atol=1e-10)


def test_deterministic_output():
    rng = np.random.default_rng(7)
    m = random_tridiag(rng, 30)
    first, second = eig_sym_tridiag(m), eig_sym_tridiag(m)
    np.testing.assert_array_equal(first.values, second.values)
    np.testing.assert_array_equal(first.vectors, second.vectors)


def test_iteration_cap_names_the_index(monkeypatch):
    monkeypatch.setattr(numerics, "MAX_SWEEPS", 0)
    with pytest.raises(ConvergenceError) as info:
        eig_sym_tridiag(SymTridiag([0.0, 1.0, 2.0], [1.0, 1.0]))
    assert info.value.index == 0
    assert "eigenvalue 0" in str(info.value)


def test_invalid_bands_are_rejected():
    with pytest.raises(ValidationError, match="offdiag"):
        SymTridiag([0.0, 1.0], [1.0, 2.0])
    with pytest.raises(ValidationError, match="diag"):
        SymTridiag([0.0, float("nan")], [1.0])


def test_matvec_matches_dense():
    rng = np.random.default_rng(3)
    m = random_tridiag(rng, 9)
    v = rng.normal(size=(9, 2))
    np.testing.assert_allclose(m.matvec(v), m.to_dense() @ v, atol=1e-13)


def test_householder_reduction():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(12, 12))
    a = a + a.T
    tri, q = tridiagonalize(a)
    np.testing.assert_allclose(q.T @ q, np.eye(12), atol=1e-12)
    np.testing.assert_allclose(q.T @ a @ q, tri.to_dense(), atol=1e-11)


def test_dense_eigendecomposition():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(20, 20))
    a = a + a.T
    pairs = eig_sym_dense(a)
    np.testing.assert_allclose(pairs.values, np.linalg.eigvalsh(a), atol=1e-10)
    assert pairs.residual(a) <= 1e-9 * np.max(np.sum(np.abs(a), axis=1))
    assert pairs.orthonormality_error() <= 1e-10


def test_non_symmetric_input_rejected():
    with pytest.raises(ValidationError, match="symmetric"):
        tridiagonalize(np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_laguerre_low_orders():
    for x in (-3.0, 0.0, 0.7, 12.0):
        assert laguerre(0, 0, x) == 1.0
        assert laguerre(1, 0, x) == pytest.approx(1.0 - x)


def test_laguerre_known_value():
    assert laguerre(4, 0, 16.0) == pytest.approx(705.0, rel=1e-12)


def test_laguerre_matches_scipy():
    x = np.linspace(-64.0, 64.0, 33)
    for k in (0, 1, 5):
        table = laguerre_table(30, k, x)
        # sum of absolute terms of the power series
        magnitude = laguerre_table(30, k, -np.abs(x))
        for n in (0, 3, 17, 30):
            expected = eval_genlaguerre(n, k, x)
            assert np.all(np.abs(table[n] - expected) <= 1e-11 * magnitude[n])


def test_laguerre_recurrence_consistency():
    x = np.linspace(-64.0, 64.0, 41)
    for k in (0, 2, 7):
        table = laguerre_table(60, k, x)
        for n in range(1, 60):
            a = (2 * n + k + 1 - x) * table[n]
            b = (n + k) * table[n - 1]
            lhs = (n + 1) * table[n + 1]
            scale = np.abs(a) + np.abs(b) + np.abs(lhs)
            assert np.all(np.abs(lhs - (a - b)) <= 1e-12 * np.maximum(scale, 1.0))


def test_log_factorials():
    np.testing.assert_allclose(log_factorials(6), [math.log(math.factorial(j)) for j in range(6)], rtol=1e-14)


def test_expi_weighted_sum_examples():
    assert expi_weighted_sum([1.0], [0.0], 3.7) == pytest.approx(1.0)
    assert expi_weighted_sum([0.5, 0.5], [0.0, 1.0], 2 * math.pi) == pytest.approx(1.0)


def test_expi_weighted_sum_collapse_floor():
    n = np.arange(80)
    weights = np.exp(-4.0 + n * math.log(4.0) - log_factorials(80))
    value = expi_weighted_sum(weights, n.astype(float), math.pi)
    assert abs(value) ** 2 == pytest.approx(math.exp(-16.0), rel=1e-6)


def test_expi_weighted_sum_vectorised():
    times = np.linspace(0.0, 3.0, 7)
    values = expi_weighted_sum([0.25, 0.75], [1.0, -2.0], times)
    assert values.shape == (7,)
    assert values[3] == pytest.approx(expi_weighted_sum([0.25, 0.75], [1.0, -2.0], times[3]))


def test_expi_weighted_sum_length_mismatch():
    with pytest.raises(ValidationError, match="energies"):
        expi_weighted_sum([1.0, 0.0], [0.0], 1.0)


def test_normalize_zero_vector():
    with pytest.raises(ValidationError):
        normalize(np.zeros(3))
