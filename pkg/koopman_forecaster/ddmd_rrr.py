"""
ABOUTME: Refined Rayleigh-Ritz data driven modal decomposition (DDMD_RRR)
ABOUTME: Residual-bounded Ritz pairs, residual-threshold selection, and spectral radius
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import DEFAULT_EPSILON
from .dmd import RitzDecomposition, normalize_modes, truncated_svd
from .exceptions import ConfigError, NumericalError, RankError, ShapeError

DEFAULT_ETA = 0.075
CONJUGATE_SLACK = 1e-12


@dataclass(frozen=True)
class RrrConfig:
    """Rank tolerance and residual acceptance threshold."""

    epsilon: float = DEFAULT_EPSILON
    eta: float = DEFAULT_ETA

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "eta": self.eta}


def _column_scale(X: np.ndarray) -> np.ndarray:
    """Diagonal of D_x^+ : inverse column norms, 0 for zero columns."""
    norms = np.linalg.norm(X, axis=0)
    scale = np.zeros_like(norms)
    nonzero = norms > 0.0
    scale[nonzero] = 1.0 / norms[nonzero]
    return scale


def _qr_r(Z: np.ndarray, size: int) -> np.ndarray:
    """Upper triangular factor of Z padded with zero rows to ``size`` rows."""
    try:
        (R,) = scipy.linalg.qr(Z, mode="r", check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"QR factorization failed: {e}") from e
    R = R[: min(R.shape[0], size), :]
    if R.shape[0] < size:
        R = np.vstack([R, np.zeros((size - R.shape[0], R.shape[1]), dtype=R.dtype)])
    return R


def _min_singular_pair(M: np.ndarray) -> tuple[float, np.ndarray]:
    try:
        _, s, vh = scipy.linalg.svd(M, full_matrices=False, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Residual SVD did not converge: {e}") from e
    return float(s[-1]), vh[-1, :].conj()


def ddmd_rrr(X: np.ndarray, Y: np.ndarray, cfg: RrrConfig | None = None) -> RitzDecomposition:
    """
    Refined Ritz pairs of the operator A with Y = A X.

    Columns are scaled to unit norm before the SVD; the Rayleigh quotient and
    the residuals come from the R factor of [U_r, B_r] with B_r = Y V_r Sigma_r^-1,
    so A is never formed. ``residuals[i]`` is the smallest ||A u - lambda_i u||
    over unit u in range(U_r), attained by ``modes[:, i]``.

    Raises:
        ShapeError: If X and Y differ in shape.
        RankError: If X has no nonzero column.
        NumericalError: On SVD, QR or eigensolver failure.
    """
    cfg = cfg or RrrConfig()
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != Y.shape:
        raise ShapeError(f"X {X.shape} and Y {Y.shape} must have the same shape")

    scale = _column_scale(X)
    if not np.any(scale):
        raise RankError("All columns of X are zero")
    X1 = X * scale
    Y1 = Y * scale

    svd = truncated_svd(X1, cfg.epsilon)
    r = svd.r
    B = (Y1 @ svd.v_r) / svd.sigma

    R = _qr_r(np.hstack([svd.u_r, B]), 2 * r)
    R11 = R[:r, :r]
    R12 = R[:r, r:]
    R22 = R[r:, r:]
    A_r = np.diag(np.diag(R11).conj()) @ R12

    try:
        eigenvalues = scipy.linalg.eigvals(A_r, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Eigensolver did not converge: {e}") from e

    residuals = np.empty(r)
    rayleigh = np.empty(r, dtype=complex)
    W = np.empty((r, r), dtype=complex)
    for i, lam in enumerate(eigenvalues):
        stacked = np.vstack([R12 - lam * R11, R22])
        residuals[i], w = _min_singular_pair(stacked)
        W[:, i] = w
        rayleigh[i] = w.conj() @ A_r @ w

    modes = normalize_modes(svd.u_r @ W)
    logging.debug(
        f"DDMD_RRR: r={r}, min residual={residuals.min():.3e}, "
        f"max residual={residuals.max():.3e}"
    )
    return RitzDecomposition(
        eigenvalues=eigenvalues,
        modes=modes,
        method="rrr",
        residuals=residuals,
        rayleigh=rayleigh,
        basis=svd.u_r,
    )


def selection_mask(dec: RitzDecomposition, eta: float) -> np.ndarray:
    """
    Boolean mask of the Ritz pairs with residual below ``eta``.

    A non-real pair whose conjugate twin passed is kept as well when its own
    residual exceeds ``eta`` by no more than 1e-12.

    Raises:
        ConfigError: If the decomposition carries no residuals.
    """
    if dec.residuals is None:
        raise ConfigError(f"Mode selection needs residuals; got method {dec.method!r}")

    keep = dec.residuals < eta
    lam = dec.eigenvalues
    for i in np.flatnonzero(keep):
        if lam[i].imag == 0.0:
            continue
        j = int(np.argmin(np.abs(lam - lam[i].conj())))
        if j == i or keep[j]:
            continue
        if dec.residuals[j] < eta + CONJUGATE_SLACK:
            keep[j] = True
    return keep


def select_modes(dec: RitzDecomposition, eta: float) -> RitzDecomposition:
    """Keep the Ritz pairs chosen by ``selection_mask``; the result may be empty."""
    return dec.subset(selection_mask(dec, eta))


def spectral_radius(dec: RitzDecomposition) -> float | None:
    """Largest |lambda| over the pairs, or None when there are none."""
    if dec.is_empty():
        return None
    return float(np.max(np.abs(dec.eigenvalues)))
