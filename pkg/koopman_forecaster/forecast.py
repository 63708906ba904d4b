"""
ABOUTME: Global Koopman prediction with Black Swan detection and retouching
ABOUTME: Local Koopman prediction with error-driven Hankel resizing
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_EPSILON, DEFAULT_THREADS
from .ddmd_rrr import (
    DEFAULT_ETA,
    RrrConfig,
    ddmd_rrr,
    select_modes,
    selection_mask,
    spectral_radius,
)
from .dmd import RitzDecomposition
from .exceptions import ConfigError, NumericalError
from .hankel import build_hankel
from .kmd import KmdModel, WeightSpec, fit_kmd, predict
from .timeseries import SnapshotMatrix, WindowSpec, relative_error

DEFAULT_INTERVAL = (0.8, 1.05)
DEFAULT_EPS_REF = 0.005
GROW_AXES = ("alternate", "rows", "columns")
WEIGHTINGS = ("uniform", "recent")


@dataclass(frozen=True)
class LkpConfig:
    """Local predictor settings: minimal Hankel size, reset threshold, lead time."""

    n_h_min: int = 3
    m_h_min: int = 2
    eps_ref: float = DEFAULT_EPS_REF
    tau_l: int = 1
    grow_axis: str = "alternate"
    epsilon: float = DEFAULT_EPSILON
    eta: float | None = None

    def __post_init__(self):
        if self.n_h_min < 1 or self.m_h_min < 1:
            raise ConfigError(
                f"Minimal Hankel size must be >= 1x1, got {self.n_h_min}x{self.m_h_min}"
            )
        if not self.eps_ref > 0.0:
            raise ConfigError(f"eps_ref must be positive, got {self.eps_ref}")
        if self.tau_l < 1:
            raise ConfigError(f"tau_l must be >= 1, got {self.tau_l}")
        if self.grow_axis not in GROW_AXES:
            raise ConfigError(f"grow_axis must be one of {GROW_AXES}, got {self.grow_axis!r}")
        if self.eta is not None and not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        # validates epsilon
        RrrConfig(epsilon=self.epsilon)

    @property
    def min_total(self) -> int:
        return self.n_h_min + self.m_h_min

    def to_dict(self) -> dict:
        return {
            "n_h_min": self.n_h_min,
            "m_h_min": self.m_h_min,
            "eps_ref": self.eps_ref,
            "tau_l": self.tau_l,
            "grow_axis": self.grow_axis,
            "epsilon": self.epsilon,
            "eta": self.eta,
        }


@dataclass(frozen=True)
class GkpConfig:
    """
    Global predictor settings.

    ``interval`` is the reference band for the spectral radius of accepted
    Ritz values. ``l_bs`` defaults to ``m_h`` when not given.
    """

    w: int
    n_h: int
    m_h: int
    eta: float = DEFAULT_ETA
    dp: int = 1
    n_rep: int = 3
    l_bs: int | None = None
    interval: tuple[float, float] = DEFAULT_INTERVAL
    tau_g: int = 1
    epsilon: float = DEFAULT_EPSILON
    threads: int = DEFAULT_THREADS
    weighting: str = "uniform"
    lkp: LkpConfig = field(default_factory=LkpConfig)

    def __post_init__(self):
        if self.n_h < 1 or self.m_h < 1:
            raise ConfigError(f"Hankel split must be >= 1x1, got {self.n_h}x{self.m_h}")
        if self.w != self.n_h + self.m_h:
            raise ConfigError(
                f"Window size {self.w} must equal n_H + m_H = {self.n_h + self.m_h}"
            )
        if self.n_h <= self.m_h:
            logging.debug(f"Hankel split {self.n_h}x{self.m_h} is not tall (n_H <= m_H)")
        if self.dp < 1:
            raise ConfigError(f"dp must be >= 1, got {self.dp}")
        if self.n_rep < 0:
            raise ConfigError(f"n_rep must be >= 0, got {self.n_rep}")
        if self.l_bs is None:
            object.__setattr__(self, "l_bs", self.m_h)
        elif self.l_bs < 1:
            raise ConfigError(f"l_bs must be >= 1, got {self.l_bs}")
        lo, hi = (float(x) for x in self.interval)
        if not lo < hi:
            raise ConfigError(f"Reference interval needs lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "interval", (lo, hi))
        if self.tau_g < 1:
            raise ConfigError(f"tau_g must be >= 1, got {self.tau_g}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.weighting not in WEIGHTINGS:
            raise ConfigError(f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}")
        RrrConfig(epsilon=self.epsilon, eta=self.eta)

    @property
    def rrr(self) -> RrrConfig:
        return RrrConfig(epsilon=self.epsilon, eta=self.eta)

    @property
    def tau_l(self) -> int:
        return self.lkp.tau_l

    def in_interval(self, radius: float | None) -> bool:
        if radius is None:
            return False
        lo, hi = self.interval
        return lo <= radius <= hi

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "n_h": self.n_h,
            "m_h": self.m_h,
            "eta": self.eta,
            "dp": self.dp,
            "n_rep": self.n_rep,
            "l_bs": self.l_bs,
            "interval": list(self.interval),
            "tau_g": self.tau_g,
            "epsilon": self.epsilon,
            "threads": self.threads,
            "weighting": self.weighting,
            "lkp": self.lkp.to_dict(),
        }


@dataclass(frozen=True, eq=False)
class Prediction:
    """Predicted observable vector (None when Absent) with its lead time."""

    values: np.ndarray | None
    lead: int
    source: str
    window_start: int | None = None


@dataclass(frozen=True)
class FlaggedInterval:
    t_begin: int
    t_end: int
    closed: bool
    sweep: int = 0

    def to_dict(self) -> dict:
        return {
            "t_begin": self.t_begin,
            "t_end": self.t_end,
            "closed": self.closed,
            "sweep": self.sweep,
        }


@dataclass(frozen=True, eq=False)
class SpectrumEntry:
    """All Ritz pairs of one window with the acceptance mask."""

    sweep: int
    p: int
    window_start: int
    eigenvalues: np.ndarray
    residuals: np.ndarray
    accepted: np.ndarray
    radius: float | None
    amplitudes: np.ndarray | None = None
    error: str | None = None

    @property
    def n_accepted(self) -> int:
        return int(np.count_nonzero(self.accepted))


@dataclass(frozen=True)
class HankelStep:
    p: int
    n_h: int
    m_h: int
    reset: bool
    error: float


@dataclass(eq=False)
class ForecastReport:
    """Everything a forecast run produced."""

    predictions: dict[int, Prediction] = field(default_factory=dict)
    errors: dict[int, float] = field(default_factory=dict)
    component_errors: dict[int, np.ndarray] = field(default_factory=dict)
    flagged_intervals: list[FlaggedInterval] = field(default_factory=list)
    spectrum_log: list[SpectrumEntry] = field(default_factory=list)
    retouched: SnapshotMatrix | None = None
    mode_log: list[tuple[int, int]] = field(default_factory=list)
    hankel_log: list[HankelStep] = field(default_factory=list)
    sweeps: int = 0

    def score(self, actual: SnapshotMatrix) -> None:
        """Fill in relative errors for every prediction with a known actual value."""
        self.errors.clear()
        self.component_errors.clear()
        for index, prediction in sorted(self.predictions.items()):
            if prediction.values is None or not 0 <= index < actual.T:
                continue
            truth = actual.column(index)
            self.errors[index] = relative_error(prediction.values, truth)
            with np.errstate(divide="ignore", invalid="ignore"):
                component = np.abs(prediction.values - truth) / np.abs(truth)
            component[(truth == 0.0) & (prediction.values == truth)] = 0.0
            self.component_errors[index] = component


@dataclass(frozen=True, eq=False)
class WindowResult:
    """
    Outcome of one active window. ``accepted`` means the window is clean:
    its accepted spectral radius lies inside the reference interval.
    """

    p: int
    b: int
    decomposition: RitzDecomposition | None = None
    mask: np.ndarray | None = None
    radius: float | None = None
    accepted: bool = False
    model: KmdModel | None = None
    full_model: KmdModel | None = None
    error: str | None = None

    @property
    def n_selected(self) -> int:
        return 0 if self.mask is None else int(np.count_nonzero(self.mask))

    def spectrum_entry(self, sweep: int) -> SpectrumEntry:
        dec = self.decomposition
        if dec is None:
            return SpectrumEntry(
                sweep=sweep,
                p=self.p,
                window_start=self.b,
                eigenvalues=np.empty(0, dtype=complex),
                residuals=np.empty(0),
                accepted=np.empty(0, dtype=bool),
                radius=None,
                error=self.error,
            )
        amplitudes = None
        if self.full_model is not None:
            amplitudes = self.full_model.mode_amplitudes()
        return SpectrumEntry(
            sweep=sweep,
            p=self.p,
            window_start=self.b,
            eigenvalues=dec.eigenvalues,
            residuals=dec.residuals,
            accepted=self.mask,
            radius=self.radius,
            amplitudes=amplitudes,
            error=self.error,
        )


def _weights(cfg: GkpConfig, n: int) -> WeightSpec:
    return WeightSpec.recent(n) if cfg.weighting == "recent" else WeightSpec.uniform(n)


def analyze_window(
    s: SnapshotMatrix, p: int, cfg: GkpConfig, full_fit: bool = False
) -> WindowResult:
    """
    Hankel -> DDMD_RRR -> selection -> amplitude fit for the window ending at p - 1.

    Numerical failures are captured in ``WindowResult.error`` instead of raised.
    """
    spec = WindowSpec.ending_at(p, cfg.n_h, cfg.m_h)
    hankel = build_hankel(s, spec)
    try:
        dec = ddmd_rrr(hankel.X, hankel.Y, cfg.rrr)
    except NumericalError as e:
        return WindowResult(p, spec.b, error=str(e))

    mask = selection_mask(dec, cfg.eta)
    selected = dec.subset(mask)
    radius = spectral_radius(selected)
    weights = _weights(cfg, hankel.m_h + 1)

    model = None
    full_model = None
    try:
        if not selected.is_empty():
            model = fit_kmd(selected, hankel, weights)
        if full_fit:
            full_model = fit_kmd(dec, hankel, weights)
    except NumericalError as e:
        return WindowResult(p, spec.b, dec, mask, radius, error=str(e))

    logging.debug(
        f"Window p={p}: {len(selected)}/{len(dec)} pairs accepted, radius={radius}"
    )
    return WindowResult(
        p,
        spec.b,
        dec,
        mask,
        radius,
        accepted=cfg.in_interval(radius),
        model=model,
        full_model=full_model,
    )


def window_positions(t: int, cfg: GkpConfig) -> list[int]:
    """p = w, w + dp, ... up to T."""
    return list(range(cfg.w, t + 1, cfg.dp))


def analyze_windows(
    s: SnapshotMatrix, positions: list[int], cfg: GkpConfig, full_fit: bool = False
) -> list[WindowResult]:
    """Analyze windows concurrently; results keep the order of ``positions``."""
    if cfg.threads == 1 or len(positions) < 2:
        return [analyze_window(s, p, cfg, full_fit) for p in positions]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(lambda p: analyze_window(s, p, cfg, full_fit), positions))


class LocalPredictor:
    """
    Stepwise local predictor.

    Each step p fits a KMD on the Hankel window ending at p - 1 and predicts
    indices p .. p + tau_l - 1. The window is reset to the minimal size when the
    previous one-step prediction missed by more than ``eps_ref`` and grows by
    one row or column otherwise.
    """

    def __init__(self, s: SnapshotMatrix, cfg: LkpConfig, k0: int):
        if k0 < cfg.min_total:
            raise ConfigError(
                f"k0={k0} must be >= n_h_min + m_h_min = {cfg.min_total}"
            )
        self.s = s
        self.cfg = cfg
        self.k0 = k0
        self.p = k0 - 1
        self.n_h = cfg.n_h_min
        self.m_h = cfg.m_h_min
        self.growths = 0
        self.steps: dict[int, tuple[np.ndarray | None, int]] = {}
        self.forecasts: dict[int, Prediction] = {}
        self.log: list[HankelStep] = []
        self._last_one_step: np.ndarray | None = None

    def _grow(self) -> None:
        axis = self.cfg.grow_axis
        if axis == "alternate":
            axis = "rows" if self.growths % 2 == 0 else "columns"
        if axis == "rows":
            self.n_h += 1
        else:
            self.m_h += 1
        self.growths += 1

    def _resize(self, p: int) -> tuple[bool, float]:
        if p == self.k0:
            return True, 0.0
        if self._last_one_step is None:
            error = np.inf
        else:
            error = relative_error(self._last_one_step, self.s.column(p - 1))
        if error > self.cfg.eps_ref:
            self.n_h, self.m_h, self.growths = self.cfg.n_h_min, self.cfg.m_h_min, 0
            return True, error
        self._grow()
        return False, error

    def _forecast(self, p: int) -> tuple[np.ndarray | None, int | None]:
        """Predictions for indices p .. p + tau_l - 1, or None when Absent."""
        b = p - (self.n_h + self.m_h)
        if b < 0:
            return None, None
        spec = WindowSpec(b=b, w=self.n_h + self.m_h, n_h=self.n_h, m_h=self.m_h)
        try:
            hankel = build_hankel(self.s, spec)
            dec = ddmd_rrr(
                hankel.X, hankel.Y, RrrConfig(self.cfg.epsilon, self.cfg.eta or DEFAULT_ETA)
            )
            if self.cfg.eta is not None:
                dec = select_modes(dec, self.cfg.eta)
            if dec.is_empty():
                return None, b
            model = fit_kmd(dec, hankel)
            offset = p - model.t0_index
            out = predict(model, offset, offset + self.cfg.tau_l - 1)
        except NumericalError as e:
            logging.debug(f"Local step p={p} failed: {e}")
            return None, b
        return out.values, b

    def step(self) -> None:
        p = self.p + 1
        if p > self.s.T:
            raise ConfigError(f"Local prediction cannot step past T={self.s.T}")
        reset, error = self._resize(p)
        values, b = self._forecast(p)
        self._last_one_step = None if values is None else values[:, 0].copy()
        target = p + self.cfg.tau_l - 1
        self.forecasts[target] = Prediction(
            None if values is None else values[:, -1].copy(),
            lead=self.cfg.tau_l,
            source="local",
            window_start=b,
        )
        self.log.append(HankelStep(p, self.n_h, self.m_h, reset, float(error)))
        if reset and p != self.k0:
            logging.debug(f"Local Hankel reset at p={p} (error {error:.3e})")
        self.p = p

    def advance_to(self, p: int) -> None:
        while self.p < p:
            self.step()

    def prediction_for(self, index: int) -> Prediction | None:
        """Lead tau_l prediction of ``index``, stepping forward as needed."""
        step = index - self.cfg.tau_l + 1
        if step < self.k0 or step > self.s.T:
            return None
        self.advance_to(step)
        return self.forecasts.get(index)


def local_predict(
    s: SnapshotMatrix, cfg: LkpConfig, k0: int, kf: int
) -> ForecastReport:
    """
    Local Koopman prediction for steps p = k0..kf.

    Step p reports the prediction of index p + tau_l - 1. Steps whose window
    cannot be built or whose decomposition fails record an Absent prediction.

    Raises:
        ConfigError: If k0 < n_h_min + m_h_min, kf > T or kf < k0.
    """
    if kf > s.T:
        raise ConfigError(f"kf={kf} exceeds T={s.T}")
    if kf < k0:
        raise ConfigError(f"kf={kf} must be >= k0={k0}")
    predictor = LocalPredictor(s, cfg, k0)
    predictor.advance_to(kf)

    resets = sum(1 for entry in predictor.log if entry.reset) - 1
    logging.info(f"Local prediction over [{k0}, {kf}]: {resets} Hankel resets")

    report = ForecastReport(
        predictions=dict(predictor.forecasts),
        hankel_log=list(predictor.log),
        retouched=s,
        sweeps=1,
    )
    report.score(s)
    return report


@dataclass
class _SweepOutcome:
    predictions: dict[int, Prediction]
    intervals: list[FlaggedInterval]
    spectrum: list[SpectrumEntry]
    modes: list[tuple[int, int]]
    hankel_log: list[HankelStep]
    data: SnapshotMatrix
    replaced: bool


class GlobalForecaster:
    """
    Sliding-window global predictor with Black Swan detection.

    Every sweep analyzes all windows on that sweep's data, then walks them in
    order. Windows whose accepted spectral radius leaves the reference interval
    open or extend a Black Swan interval and fall back to local predictions.
    When an interval closes, its leading ``l_bs`` snapshots are replaced, for
    the next sweep, by predictions of the last clean window.
    """

    def __init__(self, cfg: GkpConfig):
        self.cfg = cfg

    def _local_for(self, data: SnapshotMatrix, t_begin: int) -> LocalPredictor | None:
        k0 = max(self.cfg.lkp.min_total, t_begin - self.cfg.w)
        if k0 > data.T:
            return None
        return LocalPredictor(data, self.cfg.lkp, k0)

    def _retouch(
        self, target: np.ndarray, stash: WindowResult | None, interval: FlaggedInterval
    ) -> bool:
        cfg = self.cfg
        if stash is None or stash.model is None:
            logging.warning(
                f"No clean window before interval [{interval.t_begin}, {interval.t_end}]; "
                "skipping retouch"
            )
            return False
        first = interval.t_begin
        last = min(interval.t_begin + cfg.l_bs - 1, interval.t_end, target.shape[1] - 1)
        model = stash.model
        try:
            replacement = predict(model, first - model.t0_index, last - model.t0_index)
        except NumericalError as e:
            logging.warning(f"Retouch of [{first}, {last}] failed: {e}")
            return False
        target[:, first : last + 1] = replacement.values
        logging.info(f"Retouched indices [{first}, {last}] from window at b={stash.b}")
        return True

    def _emit_global(self, result: WindowResult, predictions: dict[int, Prediction]):
        model = result.model
        first = result.p - model.t0_index
        try:
            out = predict(model, first, first + self.cfg.tau_g - 1)
        except NumericalError as e:
            logging.warning(f"Global prediction from p={result.p} failed: {e}")
            return
        for lead, column in enumerate(out.values.T, start=1):
            index = result.p + lead - 1
            earlier = predictions.get(index)
            # keep the longest lead per index
            if earlier is not None and earlier.source == "global" and earlier.lead > lead:
                continue
            predictions[index] = Prediction(
                column.copy(), lead=lead, source="global", window_start=result.b
            )

    def sweep(self, data: SnapshotMatrix, sweep: int, full_fit: bool = False) -> _SweepOutcome:
        cfg = self.cfg
        results = analyze_windows(data, window_positions(data.T, cfg), cfg, full_fit)
        predictions: dict[int, Prediction] = {}
        intervals: list[FlaggedInterval] = []
        spectrum: list[SpectrumEntry] = []
        modes: list[tuple[int, int]] = []
        target = np.array(data.values)
        replaced = False
        hankel_log: list[HankelStep] = []

        stash: WindowResult | None = None
        local: LocalPredictor | None = None
        t_begin: int | None = None
        t_end: int | None = None

        for result in results:
            spectrum.append(result.spectrum_entry(sweep))
            if result.error is not None:
                logging.warning(f"Skipping window p={result.p}: {result.error}")
                modes.append((result.b, 0))
                continue
            modes.append((result.b, result.n_selected))

            if not result.accepted:
                if t_begin is None:
                    t_begin = max(0, result.p - cfg.dp)
                    logging.info(
                        f"Black Swan interval opened at {t_begin} "
                        f"(radius {result.radius}, sweep {sweep})"
                    )
                t_end = result.p
                if local is None:
                    local = self._local_for(data, t_begin)
                if local is not None:
                    for index in range(max(0, result.p - cfg.dp), result.p + 1):
                        prediction = local.prediction_for(index)
                        if prediction is not None:
                            predictions[index] = prediction
            elif t_begin is not None:
                interval = FlaggedInterval(t_begin, result.p - cfg.dp, True, sweep)
                intervals.append(interval)
                logging.info(f"Black Swan interval closed: [{interval.t_begin}, {interval.t_end}]")
                replaced = self._retouch(target, stash, interval) or replaced
                t_begin = t_end = None
                if local is not None:
                    hankel_log.extend(local.log)
                local = None
            else:
                self._emit_global(result, predictions)
                stash = result

        if t_begin is not None:
            intervals.append(FlaggedInterval(t_begin, t_end, False, sweep))
            logging.warning(
                f"Black Swan interval starting at {t_begin} is still open at the end "
                "of the data; not retouched"
            )

        retouched = data.with_values(target) if replaced else data
        if local is not None:
            hankel_log.extend(local.log)
        return _SweepOutcome(
            predictions, intervals, spectrum, modes, hankel_log, retouched, replaced
        )

    def run(self, s: SnapshotMatrix, full_fit: bool = False) -> ForecastReport:
        cfg = self.cfg
        if s.T < cfg.w + 1:
            raise ConfigError(f"Need T >= w + 1 = {cfg.w + 1} snapshots, got T={s.T}")

        report = ForecastReport(retouched=s)
        data = s
        for sweep in range(cfg.n_rep + 1):
            outcome = self.sweep(data, sweep, full_fit)
            report.sweeps = sweep + 1
            report.predictions = outcome.predictions
            report.flagged_intervals.extend(outcome.intervals)
            report.spectrum_log.extend(outcome.spectrum)
            report.mode_log.extend(outcome.modes)
            report.hankel_log.extend(outcome.hankel_log)
            data = outcome.data
            logging.info(
                f"Sweep {sweep}: {len(outcome.intervals)} Black Swan intervals"
            )
            if not outcome.intervals or not outcome.replaced:
                break

        report.retouched = data
        report.score(s)
        return report


def global_predict(s: SnapshotMatrix, cfg: GkpConfig) -> ForecastReport:
    """
    Global Koopman prediction with Black Swan detection and retouching.

    Raises:
        ConfigError: If the data is shorter than w + 1 snapshots.
    """
    return GlobalForecaster(cfg).run(s)


def retouch(s: SnapshotMatrix, cfg: GkpConfig) -> tuple[SnapshotMatrix, list[FlaggedInterval]]:
    """Detection and replacement sweeps only; returns the retouched data and intervals."""
    report = global_predict(s, cfg)
    return report.retouched, report.flagged_intervals
