"""
ABOUTME: Environment variable configuration utilities
ABOUTME: Provides type-safe loading and validation of forecaster defaults from the environment
"""

import os

from .exceptions import ConfigError

DEFAULT_EPSILON = 1e-10
DEFAULT_THREADS = 1
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def get_env_var(
    key: str, default: str | None = None, required: bool = False
) -> str | None:
    """Get environment variable with validation."""
    value = os.getenv(key, default)
    if required and not value:
        raise ConfigError(f"Required environment variable '{key}' not set")
    return value


def get_env_int(key: str, default: int) -> int:
    """Get integer environment variable with validation."""
    try:
        return int(os.getenv(key, str(default)))
    except ValueError as e:
        raise ConfigError(f"Invalid integer value for '{key}': {os.getenv(key)}") from e


def get_env_float(key: str, default: float) -> float:
    """Get float environment variable with validation."""
    try:
        return float(os.getenv(key, str(default)))
    except ValueError as e:
        raise ConfigError(f"Invalid float value for '{key}': {os.getenv(key)}") from e


def default_epsilon() -> float:
    """
    SVD rank tolerance from KF_EPSILON, falling back to 1e-10.

    Raises:
        ConfigError: If the value is not strictly between 0 and 1.
    """
    epsilon = get_env_float("KF_EPSILON", DEFAULT_EPSILON)
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"KF_EPSILON must be between 0 and 1, got {epsilon}")
    return epsilon


def resolve_threads(cli_value: int | None = None) -> int:
    """
    Number of worker threads for window analysis.

    KF_THREADS overrides the command-line value when it is set.
    """
    if os.getenv("KF_THREADS"):
        threads = get_env_int("KF_THREADS", DEFAULT_THREADS)
    else:
        threads = cli_value if cli_value is not None else DEFAULT_THREADS
    if threads < 1:
        raise ConfigError(f"Thread count must be at least 1, got {threads}")
    return threads


def default_log_level() -> str:
    """Log level from KF_LOG_LEVEL (INFO when unset)."""
    level = (get_env_var("KF_LOG_LEVEL", "INFO") or "INFO").upper()
    if level not in LOG_LEVELS:
        raise ConfigError(f"KF_LOG_LEVEL must be one of {LOG_LEVELS}, got {level}")
    return level
