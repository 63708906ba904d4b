"""
ABOUTME: Lorenz system trajectories by fixed-step fourth-order Runge-Kutta
ABOUTME: Provides the lorenz generator plugin
"""

import argparse
import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError, IntegrationError
from ..timeseries import SnapshotMatrix
from .base import SignalGenerator


@dataclass(frozen=True)
class LorenzParams:
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0
    dt: float = 0.01
    x0: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if len(self.x0) != 3:
            raise ConfigError(f"x0 must have 3 components, got {len(self.x0)}")
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "rho": self.rho,
            "beta": self.beta,
            "dt": self.dt,
            "x0": list(self.x0),
        }


def _vector_field(state: np.ndarray, p: LorenzParams) -> np.ndarray:
    x, y, z = state
    return np.array([p.sigma * (y - x), x * (p.rho - z) - y, x * y - p.beta * z])


def lorenz_simulate(p: LorenzParams, n: int) -> SnapshotMatrix:
    """
    Integrate the Lorenz system for n snapshots (n - 1 RK4 steps of size dt).

    Raises:
        ConfigError: If n < 1.
        IntegrationError: If the state becomes non-finite.
    """
    if n < 1:
        raise ConfigError(f"n must be >= 1, got {n}")

    trajectory = np.empty((3, n))
    state = np.array(p.x0, dtype=float)
    trajectory[:, 0] = state
    h = p.dt
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n):
            k1 = _vector_field(state, p)
            k2 = _vector_field(state + 0.5 * h * k1, p)
            k3 = _vector_field(state + 0.5 * h * k2, p)
            k4 = _vector_field(state + h * k3, p)
            state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.all(np.isfinite(state)):
                raise IntegrationError(f"Lorenz state blew up at step {k}", step=k)
            trajectory[:, k] = state

    logging.debug(f"Simulated Lorenz system: {n} snapshots at dt={h}")
    return SnapshotMatrix(trajectory, dt=h, labels=("x", "y", "z"))


class LorenzGenerator(SignalGenerator):
    """Lorenz attractor trajectory (x, y, z)."""

    @property
    def description(self) -> str:
        return "Lorenz system trajectory integrated with fixed-step RK4"

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        defaults = LorenzParams()
        parser.add_argument("--sigma", type=float, default=defaults.sigma)
        parser.add_argument("--rho", type=float, default=defaults.rho)
        parser.add_argument("--beta", type=float, default=defaults.beta)
        parser.add_argument("--dt", type=float, default=defaults.dt)
        parser.add_argument(
            "--x0", type=float, nargs=3, default=list(defaults.x0), metavar=("X", "Y", "Z")
        )
        parser.add_argument("--steps", type=int, default=4000, help="Number of snapshots")

    def generate(self, args: argparse.Namespace) -> SnapshotMatrix:
        params = LorenzParams(
            sigma=args.sigma, rho=args.rho, beta=args.beta, dt=args.dt, x0=tuple(args.x0)
        )
        return lorenz_simulate(params, args.steps)
