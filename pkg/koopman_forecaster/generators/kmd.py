"""
ABOUTME: Exact Koopman mode decomposition signals f_k = sum_j v_j alpha_j lambda_j^k
ABOUTME: Provides the kmd generator plugin
"""

import argparse

import numpy as np

from ..exceptions import ConfigError, SpecError
from ..timeseries import SnapshotMatrix
from .base import SignalGenerator

CONJUGATE_TOLERANCE = 1e-12
IMAGINARY_TOLERANCE = 1e-10


def _check_conjugate_closed(eigenvalues, modes, amplitudes) -> None:
    for j, lam in enumerate(eigenvalues):
        if lam.imag == 0.0:
            continue
        tol = CONJUGATE_TOLERANCE * max(1.0, abs(lam))
        twins = np.flatnonzero(np.abs(eigenvalues - lam.conjugate()) <= tol)
        matched = any(
            np.allclose(modes[:, i], modes[:, j].conj(), rtol=0.0, atol=tol)
            and abs(amplitudes[i] - amplitudes[j].conjugate()) <= tol * max(1.0, abs(amplitudes[j]))
            for i in twins
        )
        if not matched:
            raise SpecError(f"Eigenvalue {lam} has no conjugate twin with conjugate mode and amplitude")


def synthetic_kmd(eigenvalues, modes, amplitudes, n: int) -> SnapshotMatrix:
    """
    Real signal f_k = sum_j v_j alpha_j lambda_j^k for k = 0..n-1.

    Parameters:
        eigenvalues: r complex values.
        modes: l x r matrix (a length-l vector is accepted when r == 1).
        amplitudes: r complex values.
        n: Number of snapshots.

    Raises:
        SpecError: If the triples are not conjugate-closed or the result is not real.
        ConfigError: On inconsistent sizes.
    """
    eigenvalues = np.atleast_1d(np.asarray(eigenvalues, dtype=complex))
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=complex))
    modes = np.asarray(modes, dtype=complex)
    if modes.ndim == 1:
        modes = modes.reshape(-1, 1) if eigenvalues.size == 1 else modes.reshape(1, -1)
    r = eigenvalues.shape[0]
    if modes.shape[1] != r or amplitudes.shape[0] != r:
        raise ConfigError(
            f"Need matching sizes: {r} eigenvalues, {modes.shape[1]} modes, "
            f"{amplitudes.shape[0]} amplitudes"
        )
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")

    _check_conjugate_closed(eigenvalues, modes, amplitudes)

    with np.errstate(over="ignore", invalid="ignore"):
        powers = np.power.outer(eigenvalues, np.arange(n))
        values = modes @ (amplitudes[:, None] * powers)
    if not np.all(np.isfinite(values)):
        raise ConfigError("Synthetic signal overflows; reduce n or |lambda|")
    residue = np.linalg.norm(values.imag)
    if residue > IMAGINARY_TOLERANCE * max(1.0, np.linalg.norm(values.real)):
        raise SpecError(f"Signal has imaginary residue {residue:.3e}")
    return SnapshotMatrix(values.real)


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(item.strip().replace(" ", "")) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Invalid complex list {text!r}: {e}") from e


class KmdGenerator(SignalGenerator):
    """Scalar signal with a prescribed Koopman spectrum."""

    @property
    def description(self) -> str:
        return "Scalar signal sum_j alpha_j lambda_j^k with a given spectrum"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--eigenvalues",
            type=_complex_list,
            required=True,
            help="Comma-separated complex eigenvalues, e.g. '1,0.93+0.29j,0.93-0.29j'",
        )
        parser.add_argument(
            "--amplitudes",
            type=_complex_list,
            default=None,
            help="Comma-separated complex amplitudes (default: all 1)",
        )
        parser.add_argument("--steps", type=int, default=200, help="Number of snapshots")

    def generate(self, args: argparse.Namespace) -> SnapshotMatrix:
        eigenvalues = np.array(args.eigenvalues, dtype=complex)
        amplitudes = (
            np.ones_like(eigenvalues)
            if args.amplitudes is None
            else np.array(args.amplitudes, dtype=complex)
        )
        modes = np.ones((1, eigenvalues.shape[0]), dtype=complex)
        return synthetic_kmd(eigenvalues, modes, amplitudes, args.steps)
