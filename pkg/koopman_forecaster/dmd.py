"""
ABOUTME: Truncated SVD and Schmid's DMD producing Ritz pairs of Y = A X
ABOUTME: Shared Ritz decomposition container used by the refined variant
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalError, RankError, ShapeError


@dataclass(frozen=True, eq=False)
class TruncatedSvd:
    """Rank-r factors of a matrix with the relative truncation metadata."""

    u_r: np.ndarray
    sigma: np.ndarray
    v_r: np.ndarray
    discarded_energy: float
    next_sigma: float

    @property
    def r(self) -> int:
        return self.sigma.shape[0]


@dataclass(frozen=True, eq=False)
class RitzDecomposition:
    """
    Ritz values and unit-norm Ritz vectors of one window.

    ``residuals`` and ``rayleigh`` are only populated by the refined
    Rayleigh-Ritz method. ``basis`` keeps U_r so residual checks can be
    reproduced downstream.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    method: str
    residuals: np.ndarray | None = None
    rayleigh: np.ndarray | None = None
    basis: np.ndarray | None = None

    def __len__(self) -> int:
        return self.eigenvalues.shape[0]

    def is_empty(self) -> bool:
        return len(self) == 0

    def subset(self, mask) -> "RitzDecomposition":
        """Keep the pairs selected by a boolean mask or index array."""
        mask = np.asarray(mask)
        return RitzDecomposition(
            eigenvalues=self.eigenvalues[mask],
            modes=self.modes[:, mask],
            method=self.method,
            residuals=None if self.residuals is None else self.residuals[mask],
            rayleigh=None if self.rayleigh is None else self.rayleigh[mask],
            basis=self.basis,
        )


def _svd(X: np.ndarray):
    try:
        return scipy.linalg.svd(
            X, full_matrices=False, check_finite=False, lapack_driver="gesdd"
        )
    except np.linalg.LinAlgError:
        logging.debug("gesdd did not converge, retrying with gesvd")
        try:
            return scipy.linalg.svd(
                X, full_matrices=False, check_finite=False, lapack_driver="gesvd"
            )
        except np.linalg.LinAlgError as e:
            raise NumericalError(f"SVD did not converge: {e}") from e


def truncated_svd(X: np.ndarray, epsilon: float) -> TruncatedSvd:
    """
    Thin SVD truncated at the numerical rank r = max{i : sigma_i > epsilon * sigma_1}.

    Parameters:
        X: Real or complex matrix.
        epsilon: Relative tolerance in (0, 1).

    Returns:
        TruncatedSvd with U_r, sigma_1..sigma_r, V_r (not transposed).

    Raises:
        RankError: If X is zero or contains non-finite values.
    """
    X = np.asarray(X)
    if X.size == 0 or not np.all(np.isfinite(X)):
        raise RankError("Cannot factor an empty or non-finite matrix")

    u, s, vh = _svd(X)
    if s[0] == 0.0:
        raise RankError("Data matrix is identically zero")

    r = int(np.count_nonzero(s > epsilon * s[0]))
    total = float(np.sum(s**2))
    discarded = float(np.sum(s[r:] ** 2)) / total
    next_sigma = float(s[r]) if r < s.shape[0] else 0.0
    logging.debug(f"Truncated SVD: r={r} of {s.shape[0]}, next sigma={next_sigma:.3e}")
    return TruncatedSvd(
        u_r=u[:, :r],
        sigma=s[:r],
        v_r=vh[:r, :].conj().T,
        discarded_energy=discarded,
        next_sigma=next_sigma,
    )


def normalize_modes(modes: np.ndarray) -> np.ndarray:
    """
    Scale columns to unit 2-norm with their largest entry real positive.

    The phase convention makes Ritz vectors of conjugate eigenvalues come out
    as conjugates of each other.
    """
    modes = np.array(modes, dtype=complex)
    norms = np.linalg.norm(modes, axis=0)
    norms[norms == 0.0] = 1.0
    modes /= norms
    if modes.shape[1]:
        pivot = modes[np.argmax(np.abs(modes), axis=0), np.arange(modes.shape[1])]
        phase = np.ones_like(pivot)
        nonzero = pivot != 0
        phase[nonzero] = pivot[nonzero].conj() / np.abs(pivot[nonzero])
        modes *= phase
    return modes


def _eig(A: np.ndarray):
    try:
        return scipy.linalg.eig(A, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigensolver did not converge: {e}") from e


def dmd(X: np.ndarray, Y: np.ndarray, epsilon: float) -> RitzDecomposition:
    """
    Schmid's DMD: Ritz pairs from the Rayleigh quotient A_r = U_r^T Y V_r Sigma_r^-1.

    Raises:
        ShapeError: If X and Y differ in shape.
        RankError: If X has no usable rank.
        NumericalError: If the eigensolver fails.
    """
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape:
        raise ShapeError(f"X {X.shape} and Y {Y.shape} must have the same shape")

    svd = truncated_svd(X, epsilon)
    A_r = (svd.u_r.conj().T @ Y) @ svd.v_r / svd.sigma
    eigenvalues, W = _eig(A_r)
    modes = normalize_modes(svd.u_r @ W)
    return RitzDecomposition(
        eigenvalues=eigenvalues, modes=modes, method="schmid", basis=svd.u_r
    )
