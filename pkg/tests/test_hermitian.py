"""Hermitian linear algebra: closed-form cases and random-draw invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from opkernel.errors import InvalidMatrix, NotPSD
from opkernel.hermitian import (
    HermitianMatrix,
    cholesky_psd,
    eigen_hermitian,
    is_psd,
    min_eigenvalue,
    psd_sqrt,
    solve_cholesky,
    trace,
)


def H(rows):
    return HermitianMatrix(np.array(rows, dtype=complex))


def random_hermitian(seed, dim):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianMatrix(a + a.conj().T)


def random_psd(seed, dim):
    rng = np.random.default_rng(seed)
    b = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return HermitianMatrix(b.conj().T @ b)


# ---------------------------------------------------------------- eigen


def test_eigen_identity():
    dec = eigen_hermitian(H(np.eye(3)))
    assert np.allclose(dec.eigenvalues, [1.0, 1.0, 1.0])


def test_eigen_2x2_closed_form():
    dec = eigen_hermitian(H([[2, 1], [1, 2]]))
    assert np.allclose(dec.eigenvalues, [1.0, 3.0], atol=1e-12)


def test_eigen_pauli_y():
    dec = eigen_hermitian(H([[0, 1j], [-1j, 0]]))
    assert np.allclose(dec.eigenvalues, [-1.0, 1.0], atol=1e-12)


def test_eigen_rejects_nonfinite():
    with pytest.raises(InvalidMatrix):
        H([[np.nan, 0], [0, 1]])


def test_eigen_sorted_ascending():
    dec = eigen_hermitian(random_hermitian(7, 6))
    assert np.all(np.diff(dec.eigenvalues) >= 0)


# ---------------------------------------------------------------- min eig / trace


def test_min_eigenvalue_diag():
    assert min_eigenvalue(H([[4, 0], [0, 9]])) == pytest.approx(4.0, abs=1e-12)


def test_min_eigenvalue_rank1():
    assert min_eigenvalue(H([[1, 1], [1, 1]])) == pytest.approx(0.0, abs=1e-12)


def test_min_eigenvalue_closed_form():
    assert min_eigenvalue(H([[2, 1], [1, 2]])) == pytest.approx(1.0, abs=1e-12)


def test_trace_cases():
    assert trace(H(np.eye(4))) == 4.0
    assert trace(H([[4, 0], [0, 9]])) == 13.0
    assert trace(H(np.zeros((2, 2)))) == 0.0


# ---------------------------------------------------------------- is_psd


def test_is_psd_identity():
    assert is_psd(H(np.eye(2))).ok


def test_is_psd_indefinite_witness():
    chk = is_psd(H([[1, 0], [0, -1]]))
    assert not chk.ok
    # witness should be (up to phase) e2
    w = np.abs(chk.witness)
    assert np.allclose(w, [0.0, 1.0], atol=1e-12)


def test_is_psd_boundary():
    assert is_psd(H([[1, 1], [1, 1]])).ok


# ---------------------------------------------------------------- psd_sqrt


def test_psd_sqrt_diag():
    b = psd_sqrt(H([[4, 0], [0, 9]]))
    assert np.allclose(b.entries, [[2, 0], [0, 3]], atol=1e-12)


def test_psd_sqrt_identity():
    b = psd_sqrt(H(np.eye(3)))
    assert np.allclose(b.entries, np.eye(3), atol=1e-12)


def test_psd_sqrt_rank1():
    b = psd_sqrt(H([[1, 1], [1, 1]]))
    assert np.allclose(b.entries, np.ones((2, 2)) / np.sqrt(2), atol=1e-12)


def test_psd_sqrt_rejects_indefinite():
    with pytest.raises(NotPSD):
        psd_sqrt(H([[1, 0], [0, -1]]))


# ---------------------------------------------------------------- cholesky


def test_cholesky_identity():
    low = cholesky_psd(H(np.eye(2)), jitter=0.0)
    assert np.allclose(low, np.eye(2), atol=1e-14)


def test_cholesky_diag():
    low = cholesky_psd(H([[4, 0], [0, 9]]), jitter=0.0)
    assert np.allclose(low, [[2, 0], [0, 3]], atol=1e-14)


def test_cholesky_rank_deficient():
    # ones 2x2: second pivot is exactly 0; succeeds both with and without jitter
    a = H([[1, 1], [1, 1]])
    for jitter in (1e-8, 0.0):
        low = cholesky_psd(a, jitter=jitter)
        resid = np.linalg.norm(low @ low.conj().T - (a.entries + jitter * np.eye(2)))
        assert resid <= 1e-10 * max(1.0, np.linalg.norm(a.entries))


def test_cholesky_indefinite_pivot_index():
    with pytest.raises(NotPSD) as exc_info:
        cholesky_psd(H([[1, 0], [0, -1]]), jitter=0.0)
    assert exc_info.value.pivot_index == 1


def test_solve_cholesky_roundtrip():
    a = random_psd(3, 5)
    shifted = HermitianMatrix(a.entries + 1e-6 * np.eye(5))
    low = cholesky_psd(shifted, jitter=0.0)
    rng = np.random.default_rng(4)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    b = shifted.entries @ x
    assert np.allclose(solve_cholesky(low, b), x, atol=1e-7)


# ---------------------------------------------------------------- properties


@given(st.integers(0, 10_000), st.integers(1, 6))
@settings(max_examples=60, deadline=None)
def test_eigen_reconstruction_and_unitarity(seed, dim):
    a = random_hermitian(seed, dim)
    dec = eigen_hermitian(a)
    v = dec.eigenvectors
    recon = v @ np.diag(dec.eigenvalues) @ v.conj().T
    scale = max(1.0, np.linalg.norm(a.entries))
    assert np.linalg.norm(recon - a.entries) <= 1e-12 * scale
    assert np.linalg.norm(v.conj().T @ v - np.eye(dim)) <= 1e-12


@given(st.integers(0, 10_000), st.integers(1, 5))
@settings(max_examples=100, deadline=None)
def test_psd_sqrt_squares_back(seed, dim):
    a = random_psd(seed, dim)
    b = psd_sqrt(a)
    scale = max(1.0, np.linalg.norm(a.entries))
    assert np.linalg.norm(b.entries @ b.entries - a.entries) <= 1e-10 * scale
    assert min_eigenvalue(b) >= -1e-12 * scale
    assert abs(trace(HermitianMatrix(b.entries @ b.entries)) - trace(a)) <= 1e-10 * scale


@given(st.integers(0, 10_000), st.integers(2, 5))
@settings(max_examples=60, deadline=None)
def test_min_eigenvalue_unitary_invariance(seed, dim):
    """Conjugating by a unitary must not move the smallest eigenvalue."""
    a = random_hermitian(seed, dim)
    u = eigen_hermitian(random_hermitian(seed + 1, dim)).eigenvectors
    conj = HermitianMatrix(u @ a.entries @ u.conj().T)
    assert min_eigenvalue(conj) == pytest.approx(min_eigenvalue(a), abs=1e-10)


@given(st.integers(0, 10_000), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_cholesky_factors_random_psd(seed, dim):
    a = random_psd(seed, dim)
    low = cholesky_psd(a, jitter=0.0)
    scale = max(1.0, np.linalg.norm(a.entries))
    assert np.linalg.norm(low @ low.conj().T - a.entries) <= 1e-10 * scale
    assert np.allclose(np.triu(low, 1), 0.0)
