"""
ABOUTME: Block-Hankel (time-delay) lifting of snapshot windows
ABOUTME: Maps lifted Ritz vectors back to the original observables
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .exceptions import BoundsError, ShapeError
from .timeseries import SnapshotMatrix, WindowSpec


@dataclass(frozen=True, eq=False)
class HankelMatrix:
    """
    Lifted window with ``m_h + 1`` columns of ``n_h`` stacked snapshots.

    Column i holds f_{b+i}, ..., f_{b+i+n_h-1} (0-based) with the observable
    index varying fastest inside each block.
    """

    data: np.ndarray
    d: int
    n_h: int
    m_h: int
    b: int

    @property
    def X(self) -> np.ndarray:
        return self.data[:, :-1]

    @property
    def Y(self) -> np.ndarray:
        return self.data[:, 1:]

    @property
    def ell(self) -> int:
        """Lifted dimension d * n_h."""
        return self.d * self.n_h

    @property
    def last_block(self) -> np.ndarray:
        """Bottom block row: snapshots f_{b+n_h-1} .. f_{b+n_h+m_h-1}."""
        return self.data[(self.n_h - 1) * self.d :, :]


def build_hankel(s: SnapshotMatrix, spec: WindowSpec) -> HankelMatrix:
    """
    Lift the window described by ``spec`` into a block-Hankel matrix.

    Raises:
        BoundsError: If the window does not fit inside ``s``.
    """
    if not spec.fits(s.T):
        raise BoundsError(
            f"Window b={spec.b}, n_H={spec.n_h}, m_H={spec.m_h} exceeds T={s.T}"
        )

    window = s.values[:, spec.b : spec.end]
    # (d, m_h+1, n_h) -> (n_h, d, m_h+1) -> (n_h*d, m_h+1)
    blocks = sliding_window_view(window, spec.n_h, axis=1)
    data = np.ascontiguousarray(blocks.transpose(2, 0, 1)).reshape(
        spec.n_h * s.d, spec.m_h + 1
    )
    data.setflags(write=False)
    logging.debug(f"Built Hankel {data.shape[0]}x{data.shape[1]} at b={spec.b}")
    return HankelMatrix(data=data, d=s.d, n_h=spec.n_h, m_h=spec.m_h, b=spec.b)


def extract_tail(mode: np.ndarray, d: int, n_h: int) -> np.ndarray:
    """
    Return the last d components of a lifted vector.

    Raises:
        ShapeError: If ``len(mode) != d * n_h``.
    """
    mode = np.asarray(mode)
    if mode.ndim != 1 or mode.shape[0] != d * n_h:
        raise ShapeError(f"Mode length {mode.shape} does not match d*n_H = {d * n_h}")
    return mode[(n_h - 1) * d : n_h * d]
