# =====================
# analytics/rod_stats.py
# Ratio of deviations (RMSSD / SD) and lag-1 autocorrelation on irregular series
# =====================

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from common.config import MIN_DEVIATION_OBSERVATIONS, MIN_ROD_OBSERVATIONS
from common.errors import DegenerateSeries, InsufficientData, InvalidParameter, InvalidSeries


# ── Domain types ─────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class IrregularSeries:
    """
    One variable observed at strictly increasing (possibly uneven) times.

    Arrays are copied to float64 and frozen on construction.
    """

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.timestamps, dtype=np.float64).reshape(-1)
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if t.shape != v.shape:
            raise InvalidSeries(f"{t.size} timestamps but {v.size} values")
        if not np.all(np.isfinite(t)):
            raise InvalidSeries("timestamps must be finite")
        if not np.all(np.isfinite(v)):
            raise InvalidSeries("values must be finite (no NaN/Inf)")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            bad = int(np.argmin(np.diff(t) > 0)) + 1
            raise InvalidSeries(f"timestamps not strictly increasing at index {bad}")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values, dt: float = 1.0) -> "IrregularSeries":
        """Evenly spaced series, handy for synthetic checks."""
        v = np.asarray(values, dtype=np.float64)
        return cls(np.arange(v.size, dtype=np.float64) * dt, v)

    def __len__(self) -> int:
        return int(self.values.size)

    def restrict(self, t_lo: float, t_hi: float) -> "IrregularSeries":
        """Observations with t in (t_lo, t_hi]."""
        mask = (self.timestamps > t_lo) & (self.timestamps <= t_hi)
        return IrregularSeries(self.timestamps[mask], self.values[mask])


@dataclass(frozen=True)
class WindowSpec:
    """
    Which observations enter the statistic evaluated at observation k.

    length=None  -> growing prefix (observations 1..k)
    length=W     -> trailing time window (t_k - W, t_k]
    """

    length: Optional[float] = None

    def __post_init__(self):
        if self.length is not None and not (np.isfinite(self.length) and self.length > 0):
            raise InvalidParameter(f"trailing window length must be > 0, got {self.length}")

    @classmethod
    def growing_prefix(cls) -> "WindowSpec":
        return cls(None)

    @classmethod
    def trailing(cls, length: float) -> "WindowSpec":
        return cls(float(length))

    @property
    def is_growing(self) -> bool:
        return self.length is None

    def __str__(self) -> str:
        return "prefix" if self.is_growing else f"trailing({self.length:g})"


@dataclass(frozen=True)
class StatValue:
    value: float
    n_obs: int


class RodPoint(NamedTuple):
    index: int
    time: float
    rod: float
    std: float
    rmssd: float


# ── Core estimators ──────────────────────────────────────────────────────────
def _rmssd(v: np.ndarray) -> float:
    d = np.diff(v)
    return float(np.sqrt(np.mean(d * d)))


def _std(v: np.ndarray) -> float:
    # exact zero for constant windows; the mean of equal floats can be off by an ulp
    if v.max() == v.min():
        return 0.0
    c = v - v.mean()
    return float(np.sqrt(np.mean(c * c)))


def _require(series: IrregularSeries, needed: int, what: str) -> np.ndarray:
    n = len(series)
    if n < needed:
        raise InsufficientData(needed, n, what)
    return series.values


def rmssd(series: IrregularSeries) -> StatValue:
    """
    Root mean square of successive differences:
        nu = sqrt( 1/(n-1) * sum_{i=2..n} (x_i - x_{i-1})^2 )
    Differences are index-successive; time gaps are ignored.
    """
    v = _require(series, MIN_DEVIATION_OBSERVATIONS, "rmssd")
    return StatValue(_rmssd(v), v.size)


def std_dev(series: IrregularSeries) -> StatValue:
    """Population standard deviation (1/n), centered on the window mean."""
    v = _require(series, MIN_DEVIATION_OBSERVATIONS, "std_dev")
    return StatValue(_std(v), v.size)


def rod(series: IrregularSeries) -> StatValue:
    """Ratio of deviations RoD = rmssd / std_dev."""
    v = _require(series, MIN_ROD_OBSERVATIONS, "rod")
    sigma = _std(v)
    if sigma == 0.0:
        raise DegenerateSeries("rod undefined: constant window (std_dev = 0)")
    return StatValue(_rmssd(v) / sigma, v.size)


def lag1_autocorr(series: IrregularSeries) -> StatValue:
    """
    Lag-1 autocorrelation with the window mean as center:
        rho = [1/(n-1) * sum (x_i - m)(x_{i-1} - m)] / [1/n * sum (x_i - m)^2]
    """
    v = _require(series, MIN_ROD_OBSERVATIONS, "lag1_autocorr")
    if _std(v) == 0.0:
        raise DegenerateSeries("autocorrelation undefined: constant window")
    c = v - v.mean()
    cov = float(np.dot(c[1:], c[:-1])) / (v.size - 1)
    var = float(np.mean(c * c))
    return StatValue(cov / var, v.size)


# ── Windowed evaluation ──────────────────────────────────────────────────────
def window_slices(series: IrregularSeries, window: WindowSpec) -> np.ndarray:
    """
    First in-window index for every observation k.

    Growing prefix starts at 0; a trailing window of length W starts at the first i with
    t_i > t_k - W, so the edge observation belongs to exactly one of two adjacent windows.
    """
    t = series.timestamps
    if window.is_growing:
        return np.zeros(t.size, dtype=np.int64)
    return np.searchsorted(t, t - window.length, side="right").astype(np.int64)


def rod_sequence(series: IrregularSeries, window: WindowSpec) -> list[RodPoint]:
    """
    RoD, SD and RMSSD evaluated at every observation over the window ending there.

    Observations whose window holds fewer than 3 points or is constant are skipped, so the
    returned list may be shorter than the series (or empty).
    """
    t, v = series.timestamps, series.values
    starts = window_slices(series, window)
    points: list[RodPoint] = []
    for k in range(t.size):
        w = v[starts[k] : k + 1]
        if w.size < MIN_ROD_OBSERVATIONS:
            continue
        sigma = _std(w)
        if sigma == 0.0:
            continue
        nu = _rmssd(w)
        points.append(RodPoint(k, float(t[k]), nu / sigma, sigma, nu))
    return points
