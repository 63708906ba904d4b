"""
ABOUTME: Lorenz system case study with 300x100 Hankel windows on the x coordinate
ABOUTME: Checks in-window KMD reconstruction and residual filtering on chaotic data
"""

import numpy as np
import pytest

from koopman_forecaster.ddmd_rrr import RrrConfig, ddmd_rrr, selection_mask
from koopman_forecaster.generators import LorenzParams, lorenz_simulate
from koopman_forecaster.hankel import build_hankel
from koopman_forecaster.kmd import fit_kmd, predict
from koopman_forecaster.timeseries import SnapshotMatrix, WindowSpec, relative_error

pytestmark = pytest.mark.slow

N_H = 300
M_H = 100
W = N_H + M_H
ETA = 0.01


@pytest.fixture(scope="module")
def lorenz_x():
    """26 time units of the x coordinate of the classic chaotic trajectory."""
    trajectory = lorenz_simulate(LorenzParams(), 2601)
    return SnapshotMatrix(trajectory.values[0:1], dt=trajectory.dt, labels=("x",))


def _window(s, b):
    return build_hankel(s, WindowSpec(b=b, w=W, n_h=N_H, m_h=M_H))


class TestLorenzReconstruction:
    """KMD models reproduce the window they were fitted on."""

    @pytest.mark.parametrize("t_start", [1.0, 6.5])
    def test_window_reconstruction(self, lorenz_x, t_start):
        """All Ritz pairs with least squares amplitudes stay within 1% of the data."""
        b = round(t_start / lorenz_x.dt)
        hankel = _window(lorenz_x, b)
        dec = ddmd_rrr(hankel.X, hankel.Y, RrrConfig())

        model = fit_kmd(dec, hankel, method="wls")
        reconstructed = predict(model, 0, M_H)

        assert hankel.data.shape == (N_H, M_H + 1)
        assert reconstructed.start_index == b + N_H - 1
        assert relative_error(reconstructed.values, hankel.last_block) < 0.01


class TestLorenzSwitchingZone:
    """Residual filtering on windows inside the lobe-switching region."""

    def test_some_window_has_no_trustworthy_pairs(self, lorenz_x):
        """At least one window in t in [14.5, 25.5] keeps no pair below eta."""
        counts = []
        for b in range(1450, 2551 - W, 25):
            hankel = _window(lorenz_x, b)
            dec = ddmd_rrr(hankel.X, hankel.Y, RrrConfig(eta=ETA))
            mask = selection_mask(dec, ETA)

            assert np.all(np.isfinite(dec.residuals))
            counts.append(int(mask.sum()))

        assert min(counts) == 0
