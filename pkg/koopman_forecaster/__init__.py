"""
ABOUTME: Koopman mode decomposition forecasting from raw time-series snapshots
ABOUTME: Hankel-DMD with refined Ritz pairs, Black Swan detection, and retouching
"""

from .ddmd_rrr import RrrConfig, ddmd_rrr, select_modes, spectral_radius
from .dmd import RitzDecomposition, TruncatedSvd, dmd, truncated_svd
from .exceptions import ConfigError, DataError, NumericalError
from .forecast import (
    ForecastReport,
    GkpConfig,
    LkpConfig,
    global_predict,
    local_predict,
    retouch,
)
from .hankel import HankelMatrix, build_hankel, extract_tail
from .kmd import (
    KmdModel,
    WeightSpec,
    fit_amplitudes_exact,
    fit_amplitudes_wls,
    fit_kmd,
    predict,
)
from .timeseries import (
    IngestConfig,
    SnapshotMatrix,
    WindowSpec,
    load_csv,
    relative_error,
    write_csv,
)

__version__ = "0.1.0"
__all__ = [
    "ConfigError",
    "DataError",
    "ForecastReport",
    "GkpConfig",
    "HankelMatrix",
    "IngestConfig",
    "KmdModel",
    "LkpConfig",
    "NumericalError",
    "RitzDecomposition",
    "RrrConfig",
    "SnapshotMatrix",
    "TruncatedSvd",
    "WeightSpec",
    "WindowSpec",
    "build_hankel",
    "ddmd_rrr",
    "dmd",
    "extract_tail",
    "fit_amplitudes_exact",
    "fit_amplitudes_wls",
    "fit_kmd",
    "global_predict",
    "load_csv",
    "local_predict",
    "predict",
    "relative_error",
    "retouch",
    "select_modes",
    "spectral_radius",
    "truncated_svd",
    "write_csv",
]
