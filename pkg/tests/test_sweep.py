import pandas as pd
import pytest

import experiments.sweep as sweep
from analytics.detector import TandemRule
from common.errors import ArmFailure, ConfigError, NonFiniteState
from experiments.reports import write_rate_table
from experiments.sweep import (
    RATE_COLUMNS,
    Arm,
    SweepConfig,
    arm_samples,
    iter_arms,
    run_short_series_sweep,
    simulate_arm,
)

# =====================
# tests/test_sweep.py
# Unit tests for the short-series TP/FP sweep harness
# =====================


def tiny_config(**overrides):
    params = dict(
        a=1.0,
        noise_levels=(0.0, 0.1),
        runs_per_arm=2,
        sampling_configs=((25.0, 75.0),),
        windows=(250.0, 500.0),
        samples_per_trajectory=3,
        t_end=1100.0,
        master_seed=5,
    )
    params.update(overrides)
    return SweepConfig(**params)


# ---------- Config ----------


@pytest.mark.parametrize(
    "field, value",
    [
        ("a", 0.0),
        ("noise_levels", (-0.1,)),
        ("runs_per_arm", -1),
        ("windows", (0.0,)),
        ("sampling_configs", ((50.0, 25.0),)),
        ("dt", 0.0),
        ("t_end", 900.0),
        ("threads", 0),
    ],
)
def test_config_validation_names_field(field, value):
    with pytest.raises(ConfigError) as exc:
        tiny_config(**{field: value})
    assert exc.value.field == field


def test_desk_and_full_presets():
    desk = SweepConfig.desk(10.0)
    full = SweepConfig.full()
    assert (desk.a, desk.runs_per_arm, desk.samples_per_trajectory) == (10.0, 20, 25)
    assert (full.a, full.runs_per_arm, full.samples_per_trajectory) == (1.0, 100, 100)
    assert str(full.tandem) == "rmssd"
    assert str(full.classifier_tandem) == "none"
    assert full.windows == (250.0, 500.0, 750.0, 1000.0)


def test_arms_split_evenly():
    arms = iter_arms(tiny_config())
    assert len(arms) == 2 * 2 * 2
    assert sum(a.ramped for a in arms) == len(arms) // 2


def test_arm_samples_are_reproducible():
    config = tiny_config()
    arm = Arm(1.0, 0.1, False, 0)
    first = arm_samples(config, arm, simulate_arm(config, arm), 25.0, 75.0)
    again = arm_samples(config, arm, simulate_arm(config, arm), 25.0, 75.0)
    assert len(first) == 3
    for a, b in zip(first, again):
        assert (a.timestamps == b.timestamps).all()
        assert all((x == y).all() for x, y in zip(a.channels, b.channels))


# ---------- Sweep ----------


def test_empty_config_gives_empty_table():
    table = run_short_series_sweep(tiny_config(runs_per_arm=0))
    assert len(table) == 0
    assert list(table.to_frame().columns) == RATE_COLUMNS


def test_rates_are_consistent_and_zero_noise_has_no_false_positives():
    table = run_short_series_sweep(tiny_config())
    df = table.to_frame()
    assert len(df) == 2 * 2
    assert df["tp_rate"].between(0, 1).all() and df["fp_rate"].between(0, 1).all()
    assert (df["n_ramped_samples"] == 6).all() and (df["n_control_samples"] == 6).all()
    for row in table.rows:
        assert row.tp_count <= row.n_ramped_samples
        assert row.fp_count <= row.n_control_samples
    assert (df.loc[df["sigma"] == 0.0, "fp_rate"] == 0.0).all()


def test_tandem_rules_never_add_false_positives():
    config = tiny_config(noise_levels=(0.1,), runs_per_arm=3)
    plain = run_short_series_sweep(config.replace(tandem=TandemRule.none()))
    for tandem in (TandemRule.sd_increase(), TandemRule.rmssd_increase()):
        paired = run_short_series_sweep(config.replace(tandem=tandem))
        for p, q in zip(plain.rows, paired.rows):
            assert q.fp_count <= p.fp_count
            assert q.tp_count <= p.tp_count


def test_sweep_is_independent_of_threads(tmp_path):
    config = tiny_config(noise_levels=(0.1,))
    one = write_rate_table(run_short_series_sweep(config), tmp_path / "one.csv", {"seed": 5})
    two = write_rate_table(
        run_short_series_sweep(config.replace(threads=2)), tmp_path / "two.csv", {"seed": 5}
    )
    assert one.read_bytes() == two.read_bytes()


def test_failed_arm_is_identified(monkeypatch):
    def explode(config, arm):
        raise NonFiniteState(12, 0.6)

    monkeypatch.setattr(sweep, "simulate_arm", explode)
    with pytest.raises(ArmFailure) as exc:
        run_short_series_sweep(tiny_config())
    assert exc.value.arm == {"a": 1.0, "sigma": 0.0, "arm": "ramped", "run": 0}
    assert isinstance(exc.value.__cause__, NonFiniteState)


def test_rate_table_lookup():
    table = run_short_series_sweep(tiny_config(noise_levels=(0.1,), runs_per_arm=1))
    row = table.get(0.1, 25.0, 75.0, 500.0)
    assert row is not None
    assert row.window == 500.0
    assert table.get(0.2, 25.0, 75.0, 500.0) is None
    assert isinstance(table.to_frame(), pd.DataFrame)
