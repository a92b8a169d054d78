from pathlib import Path

import pytest

from cli.run_config import (
    PRESETS,
    RunConfig,
    deep_merge,
    dump_run_config,
    load_run_config,
    parse_override,
)
from common.config import TABLE2_SIGMA
from common.errors import ConfigError
from simulation.sde import HOPF, VDP3

# =====================
# tests/test_run_config.py
# Unit tests for RunConfig loading, presets, overrides and hashing
# =====================

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_defaults_follow_protocol():
    config = RunConfig()
    assert config.model.name == VDP3
    assert config.simulation.dt == 0.05
    assert config.simulation.t_end == 2000.0
    assert config.experiment.noise_levels == (0.0, 0.01, 0.05, 0.1, 0.25)
    assert config.sampling.configs == ((20.0, 40.0), (25.0, 50.0), (25.0, 75.0), (50.0, 100.0))
    assert config.experiment.windows == (250.0, 500.0, 750.0, 1000.0)
    assert config.detection.tandem == "rmssd"
    assert config.a_values() == (1.0,)


def test_hopf_demo_preset():
    config = load_run_config(preset="hopf-demo")
    model = config.build_model()
    assert model.name == HOPF
    assert model.eta == 0.25 and model.noise_sigma == 0.25
    assert model.ramp.value(0.0) == -1.0 and model.ramp.value(100.0) == 1.0
    sim = config.simulation
    assert (sim.t0, sim.t_end, sim.dt) == (0.0, 100.0, 0.05)
    assert config.detection.window_spec().is_growing
    assert config.tandem_rule().variant == "sd"


def test_every_preset_loads():
    for name in PRESETS:
        assert isinstance(load_run_config(preset=name), RunConfig)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_run_config(preset="nope")


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_mapping({"simulation": {"steps": 10}})
    assert exc.value.field == "simulation.steps"


def test_unknown_section_is_named():
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_mapping({"plots": {}})
    assert exc.value.field == "plots"


@pytest.mark.parametrize("dt", [0.0, -0.05])
def test_non_positive_dt_names_dt(dt):
    with pytest.raises(ConfigError) as exc:
        load_run_config(overrides=[f"simulation.dt={dt}"])
    assert exc.value.field == "simulation.dt"


def test_wrong_type_is_reported():
    with pytest.raises(ConfigError) as exc:
        load_run_config(overrides=["experiment.runs_per_arm=lots"])
    assert exc.value.field == "experiment.runs_per_arm"


def test_bad_tandem_is_reported():
    with pytest.raises(ConfigError) as exc:
        load_run_config(overrides=["detection.tandem=range:3:1"])
    assert exc.value.field == "detection.tandem"


def test_parse_override_reads_yaml_values():
    assert parse_override("sampling.configs=[[25, 75]]") == {"sampling": {"configs": [[25, 75]]}}
    assert parse_override("detection.window=prefix") == {"detection": {"window": "prefix"}}
    with pytest.raises(ConfigError):
        parse_override("dt=0.1")


def test_layering_preset_file_overrides_flags(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("model:\n  a: 10\nexperiment:\n  master_seed: 3\n")
    config = load_run_config(
        path,
        preset="desk",
        overrides=["experiment.master_seed=4"],
        extra={"experiment": {"threads": 2}},
    )
    assert config.model.a == 10.0
    assert config.experiment.runs_per_arm == 20
    assert config.experiment.master_seed == 4
    assert config.experiment.threads == 2


def test_yaml_file_must_be_mapping(tmp_path):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_shipped_configs_load():
    for path in sorted(CONFIG_DIR.glob("*.yaml")):
        assert isinstance(load_run_config(path), RunConfig)


def test_hash_ignores_output_and_threads():
    base = load_run_config()
    moved = load_run_config(
        extra={"output": {"dir": "/tmp/elsewhere"}, "experiment": {"threads": 8}}
    )
    reseeded = load_run_config(extra={"experiment": {"master_seed": 1}})
    assert len(base.hash) == 16
    assert base.hash == moved.hash
    assert base.hash != reseeded.hash


def test_dump_round_trips(tmp_path):
    config = load_run_config(preset="table2", overrides=["model.sigma=0.05"])
    path = tmp_path / "dumped.yaml"
    path.write_text(dump_run_config(config))
    assert load_run_config(path).hash == config.hash


def test_sweep_config_mapping():
    config = load_run_config(preset="zero-noise")
    sweep = config.sweep_config(10.0)
    assert config.a_values() == (1.0, 10.0)
    assert sweep.a == 10.0
    assert sweep.noise_levels == (0.0,)
    assert (sweep.runs_per_arm, sweep.samples_per_trajectory) == (20, 25)
    assert str(sweep.tandem) == "rmssd"
    assert sweep.lambda0 == 1.2


def test_deep_merge_keeps_siblings():
    merged = deep_merge({"a": {"x": 1, "y": 2}}, {"a": {"y": 3}})
    assert merged == {"a": {"x": 1, "y": 3}}


@pytest.mark.parametrize("preset, quorum", [("hopf-demo", "[2]"), ("desk", "[0, 3]")])
def test_quorum_must_name_model_variables(preset, quorum):
    with pytest.raises(ConfigError) as exc:
        load_run_config(preset=preset, overrides=[f"detection.quorum={quorum}"])
    assert exc.value.field == "detection.quorum"


def test_quorum_within_model_variables_loads():
    config = load_run_config(overrides=["detection.quorum=[0, 2]"])
    assert config.detection.quorum == (0, 2)


def test_table2_preset_runs_the_reference_noise_level():
    assert load_run_config(preset="table2").experiment.noise_levels == (TABLE2_SIGMA,)
