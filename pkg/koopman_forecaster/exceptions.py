"""
ABOUTME: Custom exception classes for Koopman forecasting
ABOUTME: Provides specific error types for configuration, data, and numerical failures
"""


class ConfigError(Exception):
    """Configuration validation error."""

    pass


class SpecError(ConfigError):
    """Synthetic signal specification is inconsistent (e.g. not conjugate-closed)."""

    pass


class DataError(Exception):
    """Data processing error."""

    pass


class IngestError(DataError):
    """CSV ingestion error, optionally pointing at the offending cell."""

    def __init__(self, message: str = "", row: int | None = None, column=None):
        self.row = row
        self.column = column
        if row is not None or column is not None:
            message = f"{message} (row {row}, column {column})"
        super().__init__(message)


class BoundsError(DataError):
    """Requested window or index range lies outside the data."""

    pass


class ShapeError(DataError):
    """Array dimensions do not match."""

    pass


class NumericalError(Exception):
    """Numerical linear algebra failure."""

    pass


class RankError(NumericalError):
    """Data has no usable numerical rank."""

    pass


class IntegrationError(NumericalError):
    """ODE integration produced a non-finite state."""

    def __init__(self, message: str = "", step: int | None = None):
        self.step = step
        super().__init__(message)


class PredictionOverflowError(NumericalError, OverflowError):
    """Eigenvalue powers overflow during extrapolation."""

    def __init__(self, message: str = "", mode: int | None = None, step: int | None = None):
        self.mode = mode
        self.step = step
        super().__init__(message)


class ConditioningWarning(UserWarning):
    """Normal equations were singular; a pseudo-inverse solve was used instead."""

    pass
