# =====================
# analytics/detector.py
# Change detection: a single RoD increase plus a tandem condition, per variable and jointly
# =====================

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from analytics.rod_stats import IrregularSeries, WindowSpec, rod_sequence
from common.errors import InvalidParameter, InvalidSeries


# ── Tandem rules ─────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class TandemRule:
    """
    Extra condition that must hold together with RoD(k) > RoD(k-1).

    variant:
      "none"   RoD alone
      "sd"     std_dev(k) > std_dev(k-1)
      "rmssd"  rmssd(k) > rmssd(k-1)
      "range"  observed value at t_k outside [lower, upper]
    """

    variant: str = "none"
    lower: Optional[float] = None
    upper: Optional[float] = None

    VARIANTS = ("none", "sd", "rmssd", "range")

    def __post_init__(self):
        if self.variant not in self.VARIANTS:
            raise InvalidParameter(f"unknown tandem rule {self.variant!r}")
        if self.variant == "range":
            if self.lower is None or self.upper is None or not self.lower < self.upper:
                raise InvalidParameter("range tandem needs lower < upper")

    @classmethod
    def none(cls) -> "TandemRule":
        return cls("none")

    @classmethod
    def sd_increase(cls) -> "TandemRule":
        return cls("sd")

    @classmethod
    def rmssd_increase(cls) -> "TandemRule":
        return cls("rmssd")

    @classmethod
    def range_violation(cls, lower: float, upper: float) -> "TandemRule":
        return cls("range", float(lower), float(upper))

    @classmethod
    def parse(cls, text: str) -> "TandemRule":
        """`none`, `sd`, `rmssd` or `range:<lower>:<upper>`."""
        text = text.strip().lower()
        if text.startswith("range"):
            parts = text.split(":")
            if len(parts) != 3:
                raise InvalidParameter(f"range tandem must look like range:<lo>:<hi>, got {text!r}")
            return cls.range_violation(float(parts[1]), float(parts[2]))
        return cls(text)

    def __str__(self) -> str:
        if self.variant == "range":
            return f"range:{self.lower:g}:{self.upper:g}"
        return self.variant


# ── Events and samples ───────────────────────────────────────────────────────
@dataclass(frozen=True)
class DetectionEvent:
    variable_index: int
    observation_index: int
    time: float
    rod_before: float
    rod_after: float

    def as_dict(self) -> dict:
        return {
            "variable_index": self.variable_index,
            "observation_index": self.observation_index,
            "time": self.time,
            "rod_before": self.rod_before,
            "rod_after": self.rod_after,
        }


@dataclass(frozen=True, eq=False)
class MultivariateSample:
    """Several variables observed on one shared timestamp grid."""

    timestamps: np.ndarray
    channels: tuple

    def __post_init__(self):
        t = np.array(self.timestamps, dtype=np.float64).reshape(-1)
        chans = tuple(np.array(c, dtype=np.float64).reshape(-1) for c in self.channels)
        if not chans:
            raise InvalidSeries("a multivariate sample needs at least one channel")
        for i, c in enumerate(chans):
            if c.shape != t.shape:
                raise InvalidSeries(f"channel {i} has {c.size} values for {t.size} timestamps")
        # per-channel validation (monotone time, finite values)
        series = tuple(IrregularSeries(t, c) for c in chans)
        object.__setattr__(self, "timestamps", series[0].timestamps)
        object.__setattr__(self, "channels", tuple(s.values for s in series))
        object.__setattr__(self, "_series", series)

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def channel(self, i: int) -> IrregularSeries:
        return self._series[i]

    def restrict(self, t_lo: float, t_hi: float) -> "MultivariateSample":
        """Observations with t in (t_lo, t_hi], all channels."""
        mask = (self.timestamps > t_lo) & (self.timestamps <= t_hi)
        return MultivariateSample(self.timestamps[mask], tuple(c[mask] for c in self.channels))


AllVariables = None
Quorum = Union[None, Sequence[int]]


# ── Detection ────────────────────────────────────────────────────────────────
def _tandem_holds(tandem: TandemRule, prev, cur, value: float) -> bool:
    if tandem.variant == "none":
        return True
    if tandem.variant == "sd":
        return cur.std > prev.std
    if tandem.variant == "rmssd":
        return cur.rmssd > prev.rmssd
    return value < tandem.lower or value > tandem.upper


def detect_univariate(
    series: IrregularSeries,
    window: WindowSpec,
    tandem: TandemRule,
    variable_index: int = 0,
    stop_at_first: bool = False,
) -> list[DetectionEvent]:
    """
    Events at every observation k where RoD(k) > RoD(k-1) and the tandem rule holds.

    k-1 and k are consecutive *valid* entries of the RoD sequence (windows with < 3 points
    or zero SD are skipped). Inequalities are strict; ties never fire.
    """
    points = rod_sequence(series, window)
    events: list[DetectionEvent] = []
    for prev, cur in zip(points, points[1:]):
        if not cur.rod > prev.rod:
            continue
        if not _tandem_holds(tandem, prev, cur, float(series.values[cur.index])):
            continue
        events.append(DetectionEvent(variable_index, cur.index, cur.time, prev.rod, cur.rod))
        if stop_at_first:
            break
    return events


def _quorum_indices(sample: MultivariateSample, quorum: Quorum) -> list[int]:
    if quorum is None:
        return list(range(sample.n_channels))
    indices = sorted(set(int(i) for i in quorum))
    if not indices or indices[0] < 0 or indices[-1] >= sample.n_channels:
        raise InvalidParameter(f"quorum {list(quorum)} outside 0..{sample.n_channels - 1}")
    return indices


def detect_channels(
    sample: MultivariateSample,
    window: WindowSpec,
    tandem: TandemRule,
    quorum: Quorum = AllVariables,
) -> dict[int, list[DetectionEvent]]:
    """Univariate events for every variable in the quorum."""
    return {
        i: detect_univariate(sample.channel(i), window, tandem, variable_index=i)
        for i in _quorum_indices(sample, quorum)
    }


def joint_detection_indices(
    sample: MultivariateSample,
    window: WindowSpec,
    tandem: TandemRule,
    quorum: Quorum = AllVariables,
) -> list[int]:
    """Sorted observation indices at which every quorum variable fires."""
    common: Optional[set] = None
    for i in _quorum_indices(sample, quorum):
        events = detect_univariate(sample.channel(i), window, tandem, variable_index=i)
        idx = {e.observation_index for e in events}
        common = idx if common is None else common & idx
        if not common:
            return []
    return sorted(common or ())


def detect_multivariate(
    sample: MultivariateSample,
    window: WindowSpec,
    tandem: TandemRule,
    quorum: Quorum = AllVariables,
) -> Optional[tuple[int, float]]:
    """
    Earliest observation index where every quorum variable has an event at that same index.

    Returns (observation_index, time) or None.
    """
    joint = joint_detection_indices(sample, window, tandem, quorum)
    if not joint:
        return None
    k = joint[0]
    logging.debug("🔺 joint detection at observation %d (t=%g)", k, sample.timestamps[k])
    return k, float(sample.timestamps[k])


first_joint_detection = detect_multivariate
