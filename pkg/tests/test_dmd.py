"""
ABOUTME: Tests for the truncated SVD and Schmid's DMD
ABOUTME: Checks rank detection, truncation optimality and Ritz pairs on Krylov data
"""

import numpy as np
import pytest

from koopman_forecaster.dmd import dmd, normalize_modes, truncated_svd
from koopman_forecaster.exceptions import RankError, ShapeError

EIGENVALUES = np.array([0.9, 0.5, -0.4, -0.8, 0.1, 0.95])


def _krylov(A, x0, m):
    columns = [x0]
    for _ in range(m):
        columns.append(A @ columns[-1])
    K = np.column_stack(columns)
    return K[:, :-1], K[:, 1:]


@pytest.fixture
def invariant_krylov(rng):
    """
    Krylov data of a symmetric 6 x 6 matrix started inside the invariant
    subspace of its first five eigenvectors.
    """
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    A = Q @ np.diag(EIGENVALUES) @ Q.T
    x0 = Q @ np.array([1.0, 1.0, 1.0, 1.0, 1.0, 0.0])
    X, Y = _krylov(A, x0, 5)
    return A, X, Y


class TestTruncatedSvd:
    """Test rank truncation."""

    def test_identity(self):
        """The identity keeps all three singular values."""
        svd = truncated_svd(np.eye(3), 1e-10)

        assert svd.r == 3
        np.testing.assert_allclose(svd.sigma, np.ones(3))
        assert svd.next_sigma == 0.0

    def test_rank_one_with_noise(self, rng):
        """Noise far below the tolerance is truncated away."""
        u = rng.standard_normal(8)
        v = rng.standard_normal(5)
        X = np.outer(u, v) + 1e-14 * rng.standard_normal((8, 5))

        assert truncated_svd(X, 1e-8).r == 1

    def test_truncation_error_is_next_singular_value(self, rng):
        """||X - U_r S_r V_r^*||_2 equals sigma_{r+1}."""
        X = rng.standard_normal((8, 5))
        svd = truncated_svd(X, 0.5)
        approx = (svd.u_r * svd.sigma) @ svd.v_r.conj().T

        assert np.linalg.norm(X - approx, 2) == pytest.approx(svd.next_sigma, abs=1e-10)

    def test_orthonormal_factors(self, rng):
        """U_r and V_r have orthonormal columns."""
        svd = truncated_svd(rng.standard_normal((9, 6)), 1e-10)

        np.testing.assert_allclose(svd.u_r.T @ svd.u_r, np.eye(svd.r), atol=1e-12)
        np.testing.assert_allclose(svd.v_r.T @ svd.v_r, np.eye(svd.r), atol=1e-12)

    def test_rank_is_scale_invariant(self, rng):
        """The relative threshold ignores overall scaling."""
        X = rng.standard_normal((7, 3)) @ rng.standard_normal((3, 6))

        assert truncated_svd(X, 1e-8).r == truncated_svd(1e6 * X, 1e-8).r == 3

    def test_zero_matrix(self):
        """An all-zero matrix has no usable rank."""
        with pytest.raises(RankError, match="zero"):
            truncated_svd(np.zeros((4, 3)), 1e-10)

    def test_non_finite(self):
        """NaN input is rejected before factoring."""
        with pytest.raises(RankError, match="non-finite"):
            truncated_svd(np.array([[1.0, np.nan]]), 1e-10)


class TestNormalizeModes:
    """Test the Ritz vector phase convention."""

    def test_unit_norm_and_real_pivot(self, rng):
        """Columns have unit norm and a real positive largest entry."""
        modes = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))

        normalized = normalize_modes(modes)

        np.testing.assert_allclose(np.linalg.norm(normalized, axis=0), 1.0)
        pivots = normalized[np.argmax(np.abs(normalized), axis=0), np.arange(3)]
        np.testing.assert_allclose(pivots.imag, 0.0, atol=1e-15)
        assert np.all(pivots.real > 0)

    def test_conjugate_columns_stay_conjugate(self, rng):
        """Conjugate input columns normalize to conjugate outputs."""
        v = rng.standard_normal(5) + 1j * rng.standard_normal(5)

        normalized = normalize_modes(np.column_stack([3.0 * v, -2.0 * v.conj()]))

        np.testing.assert_allclose(normalized[:, 1], normalized[:, 0].conj(), atol=1e-14)


class TestDmd:
    """Test Schmid's DMD."""

    def test_constant_dynamics(self):
        """Repeated snapshots give lambda = 1 and the normalized snapshot as mode."""
        c = np.array([1.0, 2.0, 3.0])
        X = np.column_stack([c, c, c])

        dec = dmd(X, X.copy(), 1e-10)

        assert len(dec) == 1
        assert dec.eigenvalues[0] == pytest.approx(1.0)
        np.testing.assert_allclose(dec.modes[:, 0], c / np.linalg.norm(c), atol=1e-12)

    def test_ritz_values_are_eigenvalues(self, invariant_krylov):
        """Krylov data from an invariant subspace recovers exact eigenvalues."""
        _, X, Y = invariant_krylov

        dec = dmd(X, Y, 1e-10)

        assert len(dec) == 5
        np.testing.assert_allclose(dec.eigenvalues.imag, 0.0, atol=1e-8)
        np.testing.assert_allclose(
            np.sort(dec.eigenvalues.real), np.sort(EIGENVALUES[:5]), atol=1e-8
        )

    def test_ritz_vectors_are_eigenvectors(self, invariant_krylov):
        """Each Ritz pair satisfies A v = lambda v."""
        A, X, Y = invariant_krylov

        dec = dmd(X, Y, 1e-10)

        for lam, v in zip(dec.eigenvalues, dec.modes.T, strict=True):
            assert np.linalg.norm(A @ v - lam * v) < 1e-8

    def test_conjugate_closure(self, rng):
        """Real data gives Ritz values in conjugate pairs."""
        X = rng.standard_normal((6, 4))
        Y = rng.standard_normal((6, 4))

        dec = dmd(X, Y, 1e-10)

        for lam in dec.eigenvalues:
            assert np.min(np.abs(dec.eigenvalues - lam.conj())) < 1e-10

    def test_shape_mismatch(self):
        """X and Y must have the same shape."""
        with pytest.raises(ShapeError):
            dmd(np.ones((3, 2)), np.ones((3, 3)), 1e-10)
