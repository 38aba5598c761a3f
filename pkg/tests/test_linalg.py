"""Unit tests for the dense linear algebra primitives."""

import numpy as np
import pytest
from numpy.random import Generator, Philox

from aioli import linalg


def rng(seed=0):
    return Generator(Philox(np.random.SeedSequence(seed)))


def random_lower(d, seed=0):
    """A well-conditioned random lower-triangular factor."""
    g = rng(seed)
    L = np.tril(g.normal(size=(d, d)))
    L[np.diag_indices(d)] = np.abs(L[np.diag_indices(d)]) + 1.0
    return L


class TestCholeskyRank1Update:
    def test_identity_e1(self):
        L = np.eye(2)
        out = linalg.cholesky_rank1_update(L, np.array([1.0, 0.0]))
        assert np.allclose(out, np.diag([np.sqrt(2.0), 1.0]))

    def test_zero_vector_is_noop(self):
        L = random_lower(4, seed=1)
        out = linalg.cholesky_rank1_update(L, np.zeros(4))
        assert np.allclose(out, L)

    def test_input_not_modified(self):
        L = random_lower(3, seed=2)
        before = L.copy()
        linalg.cholesky_rank1_update(L, np.ones(3))
        assert np.array_equal(L, before)

    def test_matches_refactorization(self):
        # oracle: factorize L L^T + v v^T from scratch
        for seed in range(10):
            L = random_lower(5, seed=seed)
            v = rng(seed + 100).normal(size=5)
            out = linalg.cholesky_rank1_update(L, v)
            target = L @ L.T + np.outer(v, v)
            expected = np.linalg.cholesky(target)
            rel = np.linalg.norm(out @ out.T - target) / np.linalg.norm(target)
            assert rel <= 1e-10
            assert np.allclose(out, expected, atol=1e-8)

    def test_stays_lower_triangular_with_positive_diagonal(self):
        L = random_lower(6, seed=3)
        out = linalg.cholesky_rank1_update(L, rng(4).normal(size=6))
        assert np.allclose(np.triu(out, 1), 0.0)
        assert np.all(np.diag(out) > 0)

    def test_determinant_monotone(self):
        L = random_lower(4, seed=5)
        out = linalg.cholesky_rank1_update(L, rng(6).normal(size=4))
        assert np.prod(np.diag(out) ** 2) >= np.prod(np.diag(L) ** 2)

    def test_thousand_updates_track_sum(self):
        lam, d = 0.5, 3
        L = np.sqrt(lam) * np.eye(d)
        A = lam * np.eye(d)
        g = rng(7)
        for _ in range(1000):
            v = g.normal(size=d) * 0.1
            L = linalg.cholesky_rank1_update(L, v)
            A += np.outer(v, v)
        rel = np.linalg.norm(L @ L.T - A) / np.linalg.norm(A)
        assert rel <= 1e-8

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            linalg.cholesky_rank1_update(np.eye(2), np.array([np.nan, 0.0]))
        with pytest.raises(ValueError):
            linalg.cholesky_rank1_update(np.array([[np.inf, 0.0], [0.0, 1.0]]),
                                         np.zeros(2))


class TestTriangularSolves:
    def test_identity(self):
        r = np.array([3.0, -1.0, 2.0])
        assert np.allclose(linalg.solve_lower(np.eye(3), r), r)
        assert np.allclose(linalg.solve_upper_transpose(np.eye(3), r), r)

    def test_diagonal(self):
        L = np.diag([2.0, 4.0])
        assert np.allclose(linalg.solve_lower(L, np.array([2.0, 8.0])), [1.0, 2.0])

    def test_two_by_two_transpose_by_hand(self):
        L = np.array([[1.0, 0.0], [1.0, 1.0]])
        # L^T w = (1,1) -> w = (0,1)
        assert np.allclose(linalg.solve_upper_transpose(L, np.array([1.0, 1.0])),
                           [0.0, 1.0])

    def test_residuals(self):
        for seed in range(5):
            L = random_lower(8, seed=seed)
            r = rng(seed + 50).normal(size=8)
            w = linalg.solve_lower(L, r)
            assert np.linalg.norm(L @ w - r) <= 1e-12 * np.linalg.norm(r)
            w = linalg.solve_upper_transpose(L, r)
            assert np.linalg.norm(L.T @ w - r) <= 1e-12 * np.linalg.norm(r)

    def test_solve_then_multiply_back(self):
        L = random_lower(5, seed=9)
        r = rng(10).normal(size=5)
        assert np.allclose(L @ linalg.solve_lower(L, r), r, rtol=1e-12, atol=1e-12)


class TestEig2:
    def test_identity(self):
        pair = linalg.eig2_symmetric_psd(np.eye(2))
        assert pair.p == 2
        assert np.allclose(pair.sigma, [1.0, 1.0])

    def test_rank_one_ones_matrix(self):
        pair = linalg.eig2_symmetric_psd(np.ones((2, 2)))
        assert pair.p == 1
        assert np.allclose(pair.sigma, [2.0])
        assert np.allclose(np.abs(pair.U[:, 0]), 1.0 / np.sqrt(2.0))

    def test_zero_matrix_degenerate(self):
        pair = linalg.eig2_symmetric_psd(np.zeros((2, 2)))
        assert pair.p == 0
        assert pair.U.shape == (2, 0)

    def test_reconstruction_random_gram(self):
        for seed in range(20):
            W = rng(seed).normal(size=(6, 2))
            M = W.T @ W
            pair = linalg.eig2_symmetric_psd(M)
            recon = pair.U @ np.diag(pair.sigma) @ pair.U.T
            assert np.linalg.norm(recon - M) <= 1e-10 * max(1.0, np.linalg.norm(M))
            assert np.allclose(pair.U.T @ pair.U, np.eye(pair.p), atol=1e-12)
            assert np.all(np.diff(pair.sigma) <= 0)

    def test_matches_eigvalsh(self):
        M = np.array([[3.0, 1.2], [1.2, 0.7]])
        pair = linalg.eig2_symmetric_psd(M)
        assert np.allclose(np.sort(pair.sigma), np.sort(np.linalg.eigvalsh(M))[-pair.p:])

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            linalg.eig2_symmetric_psd(np.array([[1.0, 0.5], [0.1, 1.0]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError):
            linalg.eig2_symmetric_psd(np.array([[-1.0, 0.0], [0.0, 1.0]]))

    def test_rank_tol_drops_tiny_eigenvalue(self):
        M = np.diag([1.0, 1e-14])
        pair = linalg.eig2_symmetric_psd(M, rank_tol=1e-10)
        assert pair.p == 1
