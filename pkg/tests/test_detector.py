import numpy as np
import pytest

import analytics.detector as detector
from analytics.detector import (
    DetectionEvent,
    MultivariateSample,
    TandemRule,
    detect_channels,
    detect_multivariate,
    detect_univariate,
    first_joint_detection,
    joint_detection_indices,
)
from analytics.rod_stats import IrregularSeries, RodPoint, WindowSpec, rod_sequence
from cli.run_config import load_run_config
from common.errors import InvalidParameter, InvalidSeries
from simulation.sampler import SamplePlan, sample
from simulation.sde import initial_state, simulate

# =====================
# tests/test_detector.py
# Unit tests for the RoD change-detection rule and joint detection
# =====================

PREFIX = WindowSpec.growing_prefix()
TANDEMS = [TandemRule.none(), TandemRule.sd_increase(), TandemRule.rmssd_increase()]


def series(values):
    return IrregularSeries.from_values(values)


@pytest.fixture
def noisy_sample():
    rng = np.random.default_rng(2024)
    t = np.cumsum(rng.uniform(1.0, 2.0, size=120))
    return MultivariateSample(t, tuple(rng.normal(size=120) for _ in range(3)))


# ---------- Tandem rules ----------


def test_tandem_parse_round_trip():
    for text in ("none", "sd", "rmssd", "range:-1:2.5"):
        assert str(TandemRule.parse(text)) == text


def test_tandem_range_needs_ordered_bounds():
    with pytest.raises(InvalidParameter):
        TandemRule.range_violation(2.0, 1.0)
    with pytest.raises(InvalidParameter):
        TandemRule.parse("range:1")


def test_tandem_unknown_variant():
    with pytest.raises(InvalidParameter):
        TandemRule.parse("kendall")


# ---------- Univariate ----------


def test_decreasing_rod_gives_no_events():
    s = series(np.arange(10.0))
    rods = [p.rod for p in rod_sequence(s, PREFIX)]
    assert all(b < a for a, b in zip(rods, rods[1:]))
    assert detect_univariate(s, PREFIX, TandemRule.none()) == []


def test_large_oscillation_fires_with_sd_tandem():
    events = detect_univariate(series([0, 1, 0, 1, 5, -5]), PREFIX, TandemRule.sd_increase())
    assert events
    assert {e.observation_index for e in events} & {4, 5}


def test_events_cite_consecutive_valid_windows():
    s = series(np.random.default_rng(5).normal(size=200))
    points = rod_sequence(s, WindowSpec.trailing(15.0))
    valid = [p.index for p in points]
    by_index = {p.index: p for p in points}
    for e in detect_univariate(s, WindowSpec.trailing(15.0), TandemRule.none()):
        assert e.rod_after > e.rod_before
        assert e.observation_index in valid[1:]
        prev = valid[valid.index(e.observation_index) - 1]
        assert e.rod_before == by_index[prev].rod


def test_range_violation_checks_raw_value():
    values = [0.0, 1.0, 0.0, 1.0, 5.0, -5.0]
    loose = detect_univariate(series(values), PREFIX, TandemRule.range_violation(-10, 10))
    tight = detect_univariate(series(values), PREFIX, TandemRule.range_violation(-1, 1))
    assert loose == []
    assert [e.observation_index for e in tight] == [5]


@pytest.mark.parametrize("tandem", [TandemRule.sd_increase(), TandemRule.rmssd_increase()])
def test_tandem_events_are_subset_of_rod_alone(tandem):
    rng = np.random.default_rng(31)
    for _ in range(20):
        s = series(rng.normal(size=80))
        plain = {e.observation_index for e in detect_univariate(s, PREFIX, TandemRule.none())}
        paired = {e.observation_index for e in detect_univariate(s, PREFIX, tandem)}
        assert paired <= plain


def test_stop_at_first_returns_only_first_event():
    s = series(np.random.default_rng(8).normal(size=100))
    every = detect_univariate(s, PREFIX, TandemRule.none())
    first = detect_univariate(s, PREFIX, TandemRule.none(), stop_at_first=True)
    assert len(every) > 1
    assert first == every[:1]


def test_detection_is_deterministic():
    s = series(np.random.default_rng(8).normal(size=100))
    assert detect_univariate(s, PREFIX, TandemRule.sd_increase()) == detect_univariate(
        s, PREFIX, TandemRule.sd_increase()
    )


def test_event_as_dict():
    e = DetectionEvent(1, 7, 42.0, 0.5, 0.75)
    assert e.as_dict() == {
        "variable_index": 1,
        "observation_index": 7,
        "time": 42.0,
        "rod_before": 0.5,
        "rod_after": 0.75,
    }


# ---------- MultivariateSample ----------


def test_sample_rejects_mismatched_channel():
    with pytest.raises(InvalidSeries):
        MultivariateSample([0.0, 1.0, 2.0], ([1.0, 2.0, 3.0], [1.0, 2.0]))


def test_sample_needs_a_channel():
    with pytest.raises(InvalidSeries):
        MultivariateSample([0.0, 1.0], ())


def test_sample_restrict_keeps_channels_aligned(noisy_sample):
    sub = noisy_sample.restrict(20.0, 60.0)
    mask = (noisy_sample.timestamps > 20.0) & (noisy_sample.timestamps <= 60.0)
    assert len(sub) == int(mask.sum())
    for i in range(noisy_sample.n_channels):
        np.testing.assert_array_equal(sub.channels[i], noisy_sample.channels[i][mask])


# ---------- Multivariate ----------


def test_single_channel_matches_first_univariate_event():
    rng = np.random.default_rng(12)
    t = np.arange(50.0)
    v = rng.normal(size=50)
    first = detect_univariate(IrregularSeries(t, v), PREFIX, TandemRule.none())[0]
    assert detect_multivariate(MultivariateSample(t, (v,)), PREFIX, TandemRule.none()) == (
        first.observation_index,
        first.time,
    )


@pytest.mark.parametrize("tandem", TANDEMS)
def test_joint_detection_is_min_of_intersection(noisy_sample, tandem):
    window = WindowSpec.trailing(20.0)
    per_channel = [
        {e.observation_index for e in detect_univariate(noisy_sample.channel(i), window, tandem)}
        for i in range(noisy_sample.n_channels)
    ]
    common = sorted(set.intersection(*per_channel))
    assert joint_detection_indices(noisy_sample, window, tandem) == common
    result = detect_multivariate(noisy_sample, window, tandem)
    if common:
        assert result == (common[0], float(noisy_sample.timestamps[common[0]]))
    else:
        assert result is None


def test_channels_never_simultaneous(monkeypatch):
    fires = {0: 7, 1: 9}

    def fake_detect(series, window, tandem, variable_index=0, stop_at_first=False):
        k = fires[variable_index]
        return [DetectionEvent(variable_index, k, float(k), 1.0, 2.0)]

    monkeypatch.setattr(detector, "detect_univariate", fake_detect)
    t = np.arange(12.0)
    s = MultivariateSample(t, (np.sin(t), np.cos(t)))
    assert detect_multivariate(s, PREFIX, TandemRule.none()) is None


def fixed_points(rows):
    return [RodPoint(k, float(k), rod, std, rmssd) for k, (rod, std, rmssd) in enumerate(rows)]


@pytest.mark.parametrize("tandem", TANDEMS)
def test_equal_rod_never_fires(monkeypatch, tandem):
    rows = [(1.0, 1.0, 1.0), (1.2, 2.0, 2.4), (1.2, 3.0, 3.6), (1.2, 4.0, 4.8)]
    monkeypatch.setattr(detector, "rod_sequence", lambda series, window: fixed_points(rows))
    events = detect_univariate(series(np.arange(4.0)), PREFIX, tandem)
    # only the first rise counts; the repeated 1.2 values are ties
    assert [e.observation_index for e in events] == [1]


@pytest.mark.parametrize(
    "tandem, rows",
    [
        (TandemRule.sd_increase(), [(1.0, 2.0, 2.0), (1.1, 2.0, 2.2), (1.2, 2.0, 2.4)]),
        (TandemRule.rmssd_increase(), [(1.0, 2.0, 2.0), (1.1, 1.8, 2.0), (1.2, 1.6, 2.0)]),
    ],
)
def test_equal_tandem_statistic_never_fires(monkeypatch, tandem, rows):
    monkeypatch.setattr(detector, "rod_sequence", lambda series, window: fixed_points(rows))
    assert detect_univariate(series(np.arange(3.0)), PREFIX, tandem) == []


def test_quorum_subset_only_uses_listed_channels(noisy_sample):
    window = WindowSpec.trailing(20.0)
    tandem = TandemRule.none()
    events = detect_channels(noisy_sample, window, tandem, quorum=[0, 2])
    assert sorted(events) == [0, 2]
    firing = [{e.observation_index for e in events[i]} for i in (0, 2)]
    expected = sorted(firing[0] & firing[1])
    assert joint_detection_indices(noisy_sample, window, tandem, quorum=[2, 0]) == expected


def test_quorum_out_of_range(noisy_sample):
    with pytest.raises(InvalidParameter):
        detect_multivariate(noisy_sample, PREFIX, TandemRule.none(), quorum=[3])
    with pytest.raises(InvalidParameter):
        detect_multivariate(noisy_sample, PREFIX, TandemRule.none(), quorum=[])


def brute_sd_events(values):
    """Prefix indices where RoD and SD both rise against the previous valid prefix."""
    fired, prev = set(), None
    for k in range(2, len(values)):
        v = np.asarray(values[: k + 1], dtype=float)
        sd = np.std(v)
        if sd == 0:
            continue
        cur = (np.sqrt(np.mean(np.diff(v) ** 2)) / sd, sd)
        if prev is not None and cur[0] > prev[0] and cur[1] > prev[1]:
            fired.add(k)
        prev = cur
    return fired


def test_hopf_demo_joint_detection_is_pinned():
    config = load_run_config(preset="hopf-demo")
    model = config.build_model()
    trajectory = simulate(model, initial_state(model), 0.0, 100.0, 0.05, config.simulation_seed())
    s = sample(trajectory, config.sample_plan())
    result = first_joint_detection(s, PREFIX, TandemRule.sd_increase())
    assert result is not None
    k, t = result
    assert k == 10
    assert t == pytest.approx(58.53, abs=0.005)
    # after the ramp crosses lambda = 0 at t = 50
    assert t > 50.0
    common = brute_sd_events(s.channels[0]) & brute_sd_events(s.channels[1])
    assert k == min(common)
