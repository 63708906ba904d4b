"""
ABOUTME: Synthetic data sources for tests and case-study reproduction
ABOUTME: Lorenz trajectories, exact KMD signals, sinusoid mixtures, disturbances
"""

from .base import GeneratorManager, SignalGenerator
from .disturbance import inject_disturbance, parse_disturbance
from .kmd import synthetic_kmd
from .lorenz import LorenzParams, lorenz_simulate
from .sinusoids import sinusoid_mixture

__all__ = [
    "GeneratorManager",
    "LorenzParams",
    "SignalGenerator",
    "inject_disturbance",
    "lorenz_simulate",
    "parse_disturbance",
    "sinusoid_mixture",
    "synthetic_kmd",
]
