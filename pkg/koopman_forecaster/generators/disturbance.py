"""
ABOUTME: Additive disturbances (step, spike, ramp) injected into snapshot data
ABOUTME: Used to build Black Swan test signals from clean generators
"""

import numpy as np

from ..exceptions import BoundsError, ConfigError
from ..timeseries import SnapshotMatrix

KINDS = ("step", "spike", "ramp")


def _profile(kind: str, length: int, magnitude: float) -> np.ndarray:
    if kind == "step":
        return np.full(length, magnitude)
    if kind == "spike":
        profile = np.zeros(length)
        profile[0] = magnitude
        return profile
    if kind == "ramp":
        return magnitude * np.arange(1, length + 1) / length
    raise ConfigError(f"Unknown disturbance kind {kind!r}; expected one of {KINDS}")


def inject_disturbance(
    s: SnapshotMatrix,
    t_start: int,
    length: int,
    kind: str,
    magnitude: float,
    observables: list[int] | None = None,
) -> SnapshotMatrix:
    """
    Add a disturbance to indices [t_start, t_start + length) of all (or selected) observables.

    ``step`` adds a constant, ``spike`` adds ``magnitude`` at ``t_start`` only,
    and ``ramp`` rises linearly to ``magnitude`` at the last index.

    Raises:
        BoundsError: If the disturbance does not fit in the data.
        ConfigError: On an unknown kind.
    """
    if length < 1:
        raise BoundsError(f"Disturbance length must be >= 1, got {length}")
    if t_start < 0 or t_start + length > s.T:
        raise BoundsError(
            f"Disturbance [{t_start}, {t_start + length}) outside data of length {s.T}"
        )
    rows = list(range(s.d)) if observables is None else list(observables)
    if any(not 0 <= i < s.d for i in rows):
        raise BoundsError(f"Observable indices {rows} outside 0..{s.d - 1}")

    profile = _profile(kind, length, magnitude)
    values = np.array(s.values)
    values[np.ix_(rows, range(t_start, t_start + length))] += profile
    return s.with_values(values)


def parse_disturbance(text: str) -> tuple[str, int, int, float]:
    """
    Parse ``kind:start:length:magnitude``.

    Raises:
        ConfigError: On malformed text.
    """
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(
            f"Disturbance must be kind:start:length:magnitude, got {text!r}"
        )
    kind = parts[0].strip().lower()
    if kind not in KINDS:
        raise ConfigError(f"Unknown disturbance kind {kind!r}; expected one of {KINDS}")
    try:
        return kind, int(parts[1]), int(parts[2]), float(parts[3])
    except ValueError as e:
        raise ConfigError(f"Invalid disturbance {text!r}: {e}") from e
