"""
ABOUTME: Koopman mode amplitude fitting (exact, weighted least squares) and prediction
ABOUTME: Extrapolates snapshots by powers of the selected Ritz values
"""

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dmd import RitzDecomposition
from .exceptions import (
    ConditioningWarning,
    ConfigError,
    NumericalError,
    PredictionOverflowError,
    RankError,
    ShapeError,
)
from .hankel import HankelMatrix
from .timeseries import SnapshotMatrix

WEIGHT_FLOOR = float(np.finfo(float).eps)
RECENT_SNAPSHOTS = 4
IMAGINARY_TOLERANCE = 1e-8
# log(float max) is ~709.78
LOG_OVERFLOW = 709.0


@dataclass(frozen=True, eq=False)
class KmdModel:
    """
    Fitted Koopman mode decomposition of a lifted window.

    Offset k predicts the snapshot at absolute index ``t0_index + k`` as
    sum_j tail(v_j) * alpha_j * lambda_j**k. ``span`` is the number of
    training columns, so offsets below it are reconstructions.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray
    d: int
    n_h: int
    t0_index: int
    span: int = 1
    residuals: np.ndarray | None = None

    @property
    def r(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def tails(self) -> np.ndarray:
        """Last d rows of the lifted modes (the original observables)."""
        return self.modes[(self.n_h - 1) * self.d :, :]

    def mode_amplitudes(self) -> np.ndarray:
        """|alpha_j| * ||tail(v_j)||, the per-mode contribution scale."""
        return np.abs(self.amplitudes) * np.linalg.norm(self.tails, axis=0)

    def reconstruct(self) -> SnapshotMatrix:
        """Model output over the training span."""
        return predict(self, 0, self.span - 1)


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Per-snapshot weights w_k and diagonal spatial weights Omega."""

    temporal: np.ndarray
    spatial: np.ndarray | None = None

    def __post_init__(self):
        temporal = np.asarray(self.temporal, dtype=float).ravel()
        if temporal.size == 0 or not np.all(np.isfinite(temporal)):
            raise ConfigError("Temporal weights must be a non-empty finite vector")
        if np.any(temporal < 0.0) or not np.any(temporal > 0.0):
            raise ConfigError("Temporal weights must be >= 0 with at least one > 0")
        object.__setattr__(self, "temporal", temporal)
        if self.spatial is not None:
            spatial = np.asarray(self.spatial, dtype=float).ravel()
            if not np.all(np.isfinite(spatial)) or np.any(spatial < 0.0):
                raise ConfigError("Spatial weights must be finite and >= 0")
            object.__setattr__(self, "spatial", spatial)

    @classmethod
    def uniform(cls, n: int) -> "WeightSpec":
        return cls(np.ones(n))

    @classmethod
    def recent(
        cls, n: int, n_recent: int = RECENT_SNAPSHOTS, floor: float = WEIGHT_FLOOR
    ) -> "WeightSpec":
        """Forgetting-factor weights: 1 on the last ``n_recent`` snapshots, ``floor`` elsewhere."""
        if n_recent < 1:
            raise ConfigError(f"n_recent must be >= 1, got {n_recent}")
        temporal = np.full(n, floor)
        temporal[-n_recent:] = 1.0
        return cls(temporal)


def fit_amplitudes_exact(modes: np.ndarray, first_snapshot: np.ndarray) -> np.ndarray:
    """
    Amplitudes alpha = pinv(V) f_0.

    Raises:
        RankError: If the mode matrix is rank deficient.
    """
    modes = np.asarray(modes)
    first_snapshot = np.asarray(first_snapshot)
    if modes.shape[0] != first_snapshot.shape[0]:
        raise ShapeError(
            f"Modes have {modes.shape[0]} rows, snapshot has {first_snapshot.shape[0]}"
        )
    rank = np.linalg.matrix_rank(modes)
    if rank < modes.shape[1]:
        raise RankError(f"Mode matrix has rank {rank} < {modes.shape[1]} modes")
    alpha, *_ = scipy.linalg.lstsq(modes, first_snapshot.astype(complex))
    return alpha


def _vandermonde(eigenvalues: np.ndarray, n: int) -> np.ndarray:
    """r x n matrix of lambda_j**k for k = 0..n-1."""
    return np.power.outer(np.asarray(eigenvalues, dtype=complex), np.arange(n))


def _weighted(modes, snapshots, weights: WeightSpec | None):
    n = snapshots.shape[1]
    weights = weights or WeightSpec.uniform(n)
    if weights.temporal.shape[0] != n:
        raise ShapeError(f"Expected {n} temporal weights, got {weights.temporal.shape[0]}")
    if weights.spatial is not None:
        if weights.spatial.shape[0] != modes.shape[0]:
            raise ShapeError(
                f"Expected {modes.shape[0]} spatial weights, got {weights.spatial.shape[0]}"
            )
        root = np.sqrt(weights.spatial)[:, None]
        modes = root * modes
        snapshots = root * snapshots
    return modes, snapshots, weights.temporal


def fit_amplitudes_dense(
    modes: np.ndarray,
    eigenvalues: np.ndarray,
    snapshots: np.ndarray,
    weights: WeightSpec | None = None,
) -> np.ndarray:
    """Weighted LS amplitudes from the explicitly stacked (n*l) x r system."""
    modes, snapshots, w = _weighted(np.asarray(modes), np.asarray(snapshots), weights)
    vand = _vandermonde(eigenvalues, snapshots.shape[1])
    K = scipy.linalg.khatri_rao((vand * w).T, modes)
    rhs = (snapshots * w).ravel(order="F")
    alpha, *_ = scipy.linalg.lstsq(K, rhs.astype(complex))
    return alpha


def fit_amplitudes_wls(
    modes: np.ndarray,
    eigenvalues: np.ndarray,
    snapshots: np.ndarray,
    weights: WeightSpec | None = None,
) -> np.ndarray:
    """
    Weighted LS amplitudes via the Hadamard-product normal equations.

    Minimizes sum_k w_k^2 ||sqrt(Omega)(f_k - sum_j v_j alpha_j lambda_j^k)||^2.
    The r x r system is
    [(V*V) o conj(Vand W^2 Vand*)] alpha = (conj(Vand W) o (V* F W)) 1.

    Falls back to the dense least squares solve, with a ConditioningWarning,
    when the normal matrix is singular or ill-conditioned.
    """
    modes = np.asarray(modes)
    snapshots = np.asarray(snapshots)
    if modes.shape[0] != snapshots.shape[0]:
        raise ShapeError(
            f"Modes have {modes.shape[0]} rows, snapshots have {snapshots.shape[0]}"
        )
    if modes.shape[1] > snapshots.shape[1] * modes.shape[0]:
        raise RankError("More modes than weighted equations")

    V, F, w = _weighted(modes, snapshots, weights)
    vand = _vandermonde(eigenvalues, F.shape[1])
    gram = V.conj().T @ V
    vand_w = vand * w
    normal = gram * (vand_w @ vand_w.conj().T).conj()
    rhs = np.sum(vand_w.conj() * (V.conj().T @ (F * w)), axis=1)

    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            return scipy.linalg.solve(normal, rhs, check_finite=False)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgWarning) as e:
        logging.debug(f"Normal equations failed ({e}); using dense solve")
        warnings.warn(
            "Amplitude normal matrix is singular; used least squares fallback",
            ConditioningWarning,
            stacklevel=2,
        )
        return fit_amplitudes_dense(modes, eigenvalues, snapshots, weights)


def fit_kmd(
    decomposition: RitzDecomposition,
    hankel: HankelMatrix,
    weights: WeightSpec | None = None,
    method: str = "wls",
) -> KmdModel:
    """
    Fit amplitudes for a (selected) decomposition over all Hankel columns.

    ``method="exact"`` interpolates the first column; ``"wls"`` solves the
    weighted least squares problem over all m_H + 1 columns.

    Raises:
        RankError: If the decomposition is empty.
        ConfigError: On an unknown method.
    """
    if decomposition.is_empty():
        raise RankError("Cannot fit a KMD model without modes")
    if decomposition.modes.shape[0] != hankel.ell:
        raise ShapeError(
            f"Modes have {decomposition.modes.shape[0]} rows, Hankel has {hankel.ell}"
        )

    if method == "exact":
        amplitudes = fit_amplitudes_exact(decomposition.modes, hankel.data[:, 0])
    elif method == "wls":
        amplitudes = fit_amplitudes_wls(
            decomposition.modes, decomposition.eigenvalues, hankel.data, weights
        )
    else:
        raise ConfigError(f"Unknown amplitude method {method!r}")

    return KmdModel(
        eigenvalues=decomposition.eigenvalues,
        modes=decomposition.modes,
        amplitudes=amplitudes,
        d=hankel.d,
        n_h=hankel.n_h,
        t0_index=hankel.b + hankel.n_h - 1,
        span=hankel.m_h + 1,
        residuals=decomposition.residuals,
    )


def _check_overflow(model: KmdModel, k_to: int) -> None:
    scale = model.mode_amplitudes()
    for j, (lam, c) in enumerate(zip(model.eigenvalues, scale, strict=True)):
        modulus = abs(lam)
        if modulus <= 1.0:
            continue
        log_growth = math.log(modulus)
        # the power itself must stay finite even for a zero amplitude
        log_scale = max(math.log(c), 0.0) if c > 0.0 else 0.0
        if k_to * log_growth + log_scale > LOG_OVERFLOW:
            step = max(0, math.ceil((LOG_OVERFLOW - log_scale) / log_growth))
            raise PredictionOverflowError(
                f"Mode {j} with |lambda|={modulus:.6g} overflows at step {step}",
                mode=j,
                step=step,
            )


def predict(model: KmdModel, k_from: int, k_to: int) -> SnapshotMatrix:
    """
    Snapshots at offsets k_from..k_to (inclusive) from ``model.t0_index``.

    Returns a real SnapshotMatrix whose ``start_index`` is the absolute index
    of its first column. Negative values are returned unchanged.

    Raises:
        ConfigError: If the offset range is invalid.
        PredictionOverflowError: If some lambda_j**k would overflow.
    """
    if k_from < 0 or k_to < k_from:
        raise ConfigError(f"Invalid prediction range [{k_from}, {k_to}]")
    _check_overflow(model, k_to)

    powers = np.power.outer(model.eigenvalues.astype(complex), np.arange(k_from, k_to + 1))
    values = model.tails @ (model.amplitudes[:, None] * powers)
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"Non-finite prediction over offsets [{k_from}, {k_to}]")

    real_norm = np.linalg.norm(values.real)
    imag_norm = np.linalg.norm(values.imag)
    if imag_norm > IMAGINARY_TOLERANCE * max(real_norm, 1.0):
        logging.warning(
            f"Discarding imaginary residue {imag_norm:.3e} (real part norm {real_norm:.3e})"
        )
    return SnapshotMatrix(values.real, start_index=model.t0_index + k_from)
