"""
ABOUTME: Pytest configuration and shared fixtures
ABOUTME: Provides synthetic signals, temp directories and mock consoles for all tests
"""

import tempfile
from pathlib import Path
from unittest.mock import MagicMock

import numpy as np
import pytest
from rich.console import Console

from koopman_forecaster.generators import inject_disturbance, sinusoid_mixture

# Two undamped sinusoids: four Koopman eigenvalues on the unit circle
FREQUENCIES = (0.3, 0.7)
AMPLITUDES = (1.0, 0.5)

# Black Swan scenario: the step starts exactly at a window boundary
DISTURBANCE_START = 120
DISTURBANCE_LENGTH = 5
DISTURBANCE_MAGNITUDE = 4.0


@pytest.fixture
def temp_dir():
    """Provide a temporary directory for testing."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


@pytest.fixture
def mock_console():
    """Provide a mock Rich console for testing."""
    return MagicMock(spec=Console)


@pytest.fixture
def rng():
    """Seeded random generator for reproducible numerical instances."""
    return np.random.default_rng(20240601)


@pytest.fixture
def two_sinusoids():
    """Stationary scalar signal of 240 snapshots."""
    return sinusoid_mixture(FREQUENCIES, AMPLITUDES, 240)


@pytest.fixture
def disturbed_sinusoids(two_sinusoids):
    """The stationary signal with a step disturbance on [120, 125)."""
    return inject_disturbance(
        two_sinusoids,
        DISTURBANCE_START,
        DISTURBANCE_LENGTH,
        "step",
        DISTURBANCE_MAGNITUDE,
    )


@pytest.fixture
def sinusoid_csv(temp_dir, two_sinusoids):
    """The stationary signal written as a one-column CSV."""
    from koopman_forecaster.timeseries import write_csv

    return write_csv(two_sinusoids, temp_dir / "signal.csv")
