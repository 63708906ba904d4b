"""
ABOUTME: Stationary sinusoid mixtures (all Koopman eigenvalues on the unit circle)
ABOUTME: Provides the sinusoids generator plugin
"""

import argparse

import numpy as np

from ..exceptions import ConfigError
from ..timeseries import SnapshotMatrix
from .base import SignalGenerator


def sinusoid_mixture(
    frequencies,
    amplitudes,
    n: int,
    phases=None,
    dt: float = 1.0,
    offset: float = 0.0,
) -> SnapshotMatrix:
    """
    Scalar signal offset + sum_i a_i cos(omega_i k dt + phi_i), k = 0..n-1.

    ``frequencies`` are angular frequencies in radians per time unit.
    """
    frequencies = np.atleast_1d(np.asarray(frequencies, dtype=float))
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=float))
    phases = (
        np.zeros_like(frequencies)
        if phases is None
        else np.atleast_1d(np.asarray(phases, dtype=float))
    )
    if not frequencies.shape == amplitudes.shape == phases.shape:
        raise ConfigError("frequencies, amplitudes and phases must have the same length")
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")
    if not dt > 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")

    t = np.arange(n) * dt
    values = offset + amplitudes @ np.cos(np.outer(frequencies, t) + phases[:, None])
    return SnapshotMatrix(values.reshape(1, -1), dt=dt)


def _float_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Invalid number list {text!r}") from e


class SinusoidsGenerator(SignalGenerator):
    """Sum of cosines with optional offset."""

    @property
    def description(self) -> str:
        return "Stationary mixture of sinusoids"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--frequencies", type=_float_list, default=[0.3, 0.7],
            help="Comma-separated angular frequencies (rad per time unit)",
        )
        parser.add_argument(
            "--amplitudes", type=_float_list, default=None,
            help="Comma-separated amplitudes (default: all 1)",
        )
        parser.add_argument("--phases", type=_float_list, default=None)
        parser.add_argument("--offset", type=float, default=0.0)
        parser.add_argument("--dt", type=float, default=1.0)
        parser.add_argument("--steps", type=int, default=300, help="Number of snapshots")

    def generate(self, args: argparse.Namespace) -> SnapshotMatrix:
        amplitudes = args.amplitudes or [1.0] * len(args.frequencies)
        return sinusoid_mixture(
            args.frequencies,
            amplitudes,
            args.steps,
            phases=args.phases,
            dt=args.dt,
            offset=args.offset,
        )
