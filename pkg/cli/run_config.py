# =====================
# cli/run_config.py
# RunConfig: one declarative description of a run, loaded from presets, YAML and flags
# =====================

import copy
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional

import yaml

from analytics.detector import TandemRule
from analytics.rod_stats import WindowSpec
from common.config import (
    A_EXCITABLE,
    A_NORMAL,
    BIFURCATION_TIME,
    DEFAULT_MASTER_SEED,
    DESK_RUNS_PER_ARM,
    DESK_SAMPLES_PER_TRAJECTORY,
    HARD_TARGET_CELL,
    HOPF_ETA,
    HOPF_GAP_ALPHA,
    HOPF_GAP_BETA,
    HOPF_LAMBDA_END,
    HOPF_LAMBDA_START,
    HOPF_T_END,
    NOISE_LEVELS,
    PROP1_N,
    PROP1_PHIS,
    PROP1_SEEDS,
    ROD_OUTPUT_DIR,
    RUNS_PER_ARM,
    SAMPLES_PER_TRAJECTORY,
    SAMPLING_CONFIGS,
    SIM_DT,
    SIM_T_END,
    TABLE2_CELLS,
    TABLE2_SIGMA,
    VDP_LAMBDA0,
    WINDOWS,
)
from common.errors import ConfigError, InvalidParameter
from common.utils import child_seed, config_hash
from experiments.sweep import SweepConfig
from simulation.sampler import SamplePlan
from simulation.sde import HOPF, VDP3, RampSchedule, SdeModel, model_dim, vdp3_model

# child-seed keys for single-trajectory commands
SIMULATE_KEY = 0
SAMPLE_KEY = 1


# ── Coercion helpers ─────────────────────────────────────────────────────────
def _convert(where: str, value: Any, kind):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(where, f"cannot read {value!r} as {kind.__name__}")


def _float(where: str, value: Any) -> float:
    v = _convert(where, value, float)
    if not math.isfinite(v):
        raise ConfigError(where, "must be finite")
    return v


def _int(where: str, value: Any) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    return _convert(where, value, int)


def _bool(where: str, value: Any) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false", "yes", "no"):
        return value.lower() in ("true", "yes")
    raise ConfigError(where, f"expected true/false, got {value!r}")


def _floats(where: str, value: Any) -> tuple:
    if isinstance(value, (str, bytes)) or not isinstance(value, Iterable):
        raise ConfigError(where, f"expected a list, got {value!r}")
    return tuple(_float(where, v) for v in value)


def _rows(where: str, value: Any, width: int) -> tuple:
    if isinstance(value, (str, bytes)) or not isinstance(value, Iterable):
        raise ConfigError(where, f"expected a list of {width}-element lists, got {value!r}")
    rows = tuple(_floats(where, row) for row in value)
    if any(len(r) != width for r in rows):
        raise ConfigError(where, f"every entry needs {width} numbers")
    return rows


def _set(obj, name: str, value) -> None:
    object.__setattr__(obj, name, value)


# ── Sections ─────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class ModelSection:
    name: str = VDP3
    a: float = A_EXCITABLE
    eta: float = HOPF_ETA
    sigma: float = 0.1

    def __post_init__(self):
        if self.name not in (HOPF, VDP3):
            raise ConfigError("model.name", f"expected {HOPF!r} or {VDP3!r}, got {self.name!r}")
        _set(self, "a", _float("model.a", self.a))
        _set(self, "eta", _float("model.eta", self.eta))
        _set(self, "sigma", _float("model.sigma", self.sigma))
        if not self.a > 0:
            raise ConfigError("model.a", "must be > 0")
        if self.sigma < 0:
            raise ConfigError("model.sigma", "must be >= 0")


@dataclass(frozen=True)
class RampSection:
    """lambda0/lambda_end left empty take the model's protocol values."""

    ramped: bool = True
    lambda0: Optional[float] = None
    lambda_end: Optional[float] = None
    bifurcation_time: float = BIFURCATION_TIME

    def __post_init__(self):
        _set(self, "ramped", _bool("ramp.ramped", self.ramped))
        for name in ("lambda0", "lambda_end"):
            value = getattr(self, name)
            if value is not None:
                _set(self, name, _float(f"ramp.{name}", value))
        _set(self, "bifurcation_time", _float("ramp.bifurcation_time", self.bifurcation_time))
        if not self.bifurcation_time > 0:
            raise ConfigError("ramp.bifurcation_time", "must be > 0")


@dataclass(frozen=True)
class SimulationSection:
    t0: float = 0.0
    t_end: float = SIM_T_END
    dt: float = SIM_DT

    def __post_init__(self):
        for name in ("t0", "t_end", "dt"):
            _set(self, name, _float(f"simulation.{name}", getattr(self, name)))
        if not self.dt > 0:
            raise ConfigError("simulation.dt", f"must be > 0, got {self.dt}")
        if not self.t_end > self.t0:
            raise ConfigError("simulation.t_end", "must exceed simulation.t0")


@dataclass(frozen=True)
class SamplingSection:
    alpha: float = 25.0
    beta: float = 75.0
    configs: tuple = SAMPLING_CONFIGS
    samples_per_trajectory: int = SAMPLES_PER_TRAJECTORY

    def __post_init__(self):
        _set(self, "alpha", _float("sampling.alpha", self.alpha))
        _set(self, "beta", _float("sampling.beta", self.beta))
        _set(self, "configs", _rows("sampling.configs", self.configs, 2))
        _set(self, "samples_per_trajectory",
             _int("sampling.samples_per_trajectory", self.samples_per_trajectory))
        if not 0 < self.alpha < self.beta:
            raise ConfigError("sampling.alpha", "need 0 < alpha < beta")
        for a, b in self.configs:
            if not 0 < a < b:
                raise ConfigError("sampling.configs", f"need 0 < alpha < beta, got ({a}, {b})")
        if self.samples_per_trajectory < 0:
            raise ConfigError("sampling.samples_per_trajectory", "must be >= 0")


@dataclass(frozen=True)
class DetectionSection:
    """window: a length in time units, or null / "prefix" for the growing prefix."""

    window: Optional[float] = 500.0
    tandem: str = "rmssd"
    classifier_tandem: str = "none"
    quorum: Optional[tuple] = None

    def __post_init__(self):
        if isinstance(self.window, str) and self.window.strip().lower() == "prefix":
            _set(self, "window", None)
        if self.window is not None:
            _set(self, "window", _float("detection.window", self.window))
            if not self.window > 0:
                raise ConfigError("detection.window", "must be > 0")
        for name in ("tandem", "classifier_tandem"):
            try:
                _set(self, name, str(TandemRule.parse(str(getattr(self, name)))))
            except (InvalidParameter, ValueError) as e:
                raise ConfigError(f"detection.{name}", str(e))
        if self.quorum is not None:
            q = self.quorum if isinstance(self.quorum, Iterable) else [self.quorum]
            _set(self, "quorum", tuple(_int("detection.quorum", i) for i in q))
            if not self.quorum or min(self.quorum) < 0:
                raise ConfigError("detection.quorum", "variable indices must be >= 0")

    def window_spec(self) -> WindowSpec:
        return WindowSpec(self.window)


@dataclass(frozen=True)
class ExperimentSection:
    master_seed: int = DEFAULT_MASTER_SEED
    noise_levels: tuple = NOISE_LEVELS
    runs_per_arm: int = RUNS_PER_ARM
    windows: tuple = WINDOWS
    tp_cutoff: float = BIFURCATION_TIME
    a_values: tuple = ()
    cells: tuple = (HARD_TARGET_CELL,)
    threads: int = 1
    prop1_phis: tuple = PROP1_PHIS
    prop1_n: int = PROP1_N
    prop1_seeds: int = PROP1_SEEDS

    def __post_init__(self):
        _set(self, "master_seed", _int("experiment.master_seed", self.master_seed))
        _set(self, "noise_levels", _floats("experiment.noise_levels", self.noise_levels))
        _set(self, "runs_per_arm", _int("experiment.runs_per_arm", self.runs_per_arm))
        _set(self, "windows", _floats("experiment.windows", self.windows))
        _set(self, "tp_cutoff", _float("experiment.tp_cutoff", self.tp_cutoff))
        _set(self, "a_values", _floats("experiment.a_values", self.a_values))
        _set(self, "cells", _rows("experiment.cells", self.cells, 3))
        _set(self, "threads", _int("experiment.threads", self.threads))
        _set(self, "prop1_phis", _floats("experiment.prop1_phis", self.prop1_phis))
        _set(self, "prop1_n", _int("experiment.prop1_n", self.prop1_n))
        _set(self, "prop1_seeds", _int("experiment.prop1_seeds", self.prop1_seeds))

        if self.master_seed < 0:
            raise ConfigError("experiment.master_seed", "must be >= 0")
        if any(s < 0 for s in self.noise_levels):
            raise ConfigError("experiment.noise_levels", "must be >= 0")
        if self.runs_per_arm < 0:
            raise ConfigError("experiment.runs_per_arm", "must be >= 0")
        if any(w <= 0 for w in self.windows):
            raise ConfigError("experiment.windows", "must be > 0")
        if any(a <= 0 for a in self.a_values):
            raise ConfigError("experiment.a_values", "must be > 0")
        for alpha, beta, window in self.cells:
            if not (0 < alpha < beta and window > 0):
                raise ConfigError("experiment.cells", f"invalid cell ({alpha}, {beta}, {window})")
        if self.threads < 1:
            raise ConfigError("experiment.threads", "must be >= 1")
        if any(not -1 < p < 1 for p in self.prop1_phis):
            raise ConfigError("experiment.prop1_phis", "need |phi| < 1")
        if self.prop1_n < 3:
            raise ConfigError("experiment.prop1_n", "must be >= 3")
        if self.prop1_seeds < 1:
            raise ConfigError("experiment.prop1_seeds", "must be >= 1")


@dataclass(frozen=True)
class OutputSection:
    dir: str = ROD_OUTPUT_DIR

    def __post_init__(self):
        _set(self, "dir", str(self.dir))


SECTIONS = {
    "model": ModelSection,
    "ramp": RampSection,
    "simulation": SimulationSection,
    "sampling": SamplingSection,
    "detection": DetectionSection,
    "experiment": ExperimentSection,
    "output": OutputSection,
}


# ── RunConfig ────────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    ramp: RampSection = field(default_factory=RampSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    sampling: SamplingSection = field(default_factory=SamplingSection)
    detection: DetectionSection = field(default_factory=DetectionSection)
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    output: OutputSection = field(default_factory=OutputSection)

    def __post_init__(self):
        quorum = self.detection.quorum
        if quorum is not None:
            dim = model_dim(self.model.name)
            if max(quorum) >= dim:
                raise ConfigError(
                    "detection.quorum",
                    f"{self.model.name} has variables 0..{dim - 1}, got {list(quorum)}",
                )

    @classmethod
    def from_mapping(cls, data: Optional[dict]) -> "RunConfig":
        data = data or {}
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a mapping of sections")
        kwargs = {}
        for section, values in data.items():
            if section not in SECTIONS:
                raise ConfigError(str(section), "unknown section")
            values = values or {}
            if not isinstance(values, dict):
                raise ConfigError(section, "section must be a mapping")
            known = {f.name for f in fields(SECTIONS[section])}
            for key in values:
                if key not in known:
                    raise ConfigError(f"{section}.{key}", "unknown key")
            kwargs[section] = SECTIONS[section](**values)
        return cls(**kwargs)

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def hash(self) -> str:
        """Hash of everything that affects results (output location and threads excluded)."""
        payload = self.as_dict()
        payload.pop("output")
        payload["experiment"].pop("threads")
        return config_hash(payload)

    def meta(self) -> dict:
        return {"config_hash": self.hash, "master_seed": self.experiment.master_seed}

    @property
    def output_dir(self) -> Path:
        return Path(self.output.dir)

    # ── Resolved library objects ─────────────────────────────────────────────
    def build_model(self) -> SdeModel:
        m, r, s = self.model, self.ramp, self.simulation
        if m.name == HOPF:
            lam0 = HOPF_LAMBDA_START if r.lambda0 is None else r.lambda0
            lam1 = HOPF_LAMBDA_END if r.lambda_end is None else r.lambda_end
        else:
            lam0 = VDP_LAMBDA0 if r.lambda0 is None else r.lambda0
            if r.lambda_end is None:
                return vdp3_model(m.a, m.sigma, r.ramped, lam0, r.bifurcation_time, s.t_end)
            lam1 = r.lambda_end
        ramp = RampSchedule(lam0, lam1, s.t0, s.t_end)
        if not r.ramped:
            ramp = RampSchedule.held(lam0, s.t0, s.t_end)
        if m.name == HOPF:
            return SdeModel.hopf_normal_form(m.eta, ramp, m.sigma)
        return SdeModel.vdp_three_d(m.a, ramp, m.sigma)

    def simulation_seed(self) -> int:
        return child_seed(self.experiment.master_seed, SIMULATE_KEY)

    def sample_plan(self) -> SamplePlan:
        s = self.sampling
        return SamplePlan(
            s.alpha,
            s.beta,
            self.simulation.t0,
            self.simulation.t_end,
            seed=child_seed(self.experiment.master_seed, SAMPLE_KEY),
        )

    def tandem_rule(self) -> TandemRule:
        return TandemRule.parse(self.detection.tandem)

    def a_values(self) -> tuple:
        """Parametrizations for the experiments; empty experiment.a_values means model.a."""
        return self.experiment.a_values or (self.model.a,)

    def sweep_config(self, a: Optional[float] = None, progress: bool = False) -> SweepConfig:
        r, e = self.ramp, self.experiment
        return SweepConfig(
            a=self.model.a if a is None else a,
            noise_levels=e.noise_levels,
            runs_per_arm=e.runs_per_arm,
            sampling_configs=self.sampling.configs,
            windows=e.windows,
            samples_per_trajectory=self.sampling.samples_per_trajectory,
            tandem=self.tandem_rule(),
            classifier_tandem=TandemRule.parse(self.detection.classifier_tandem),
            master_seed=e.master_seed,
            tp_cutoff=e.tp_cutoff,
            bifurcation_time=r.bifurcation_time,
            t_end=self.simulation.t_end,
            dt=self.simulation.dt,
            lambda0=VDP_LAMBDA0 if r.lambda0 is None else r.lambda0,
            threads=e.threads,
            progress=progress,
        )


# ── Presets ──────────────────────────────────────────────────────────────────
_DESK = {
    "experiment": {"runs_per_arm": DESK_RUNS_PER_ARM},
    "sampling": {"samples_per_trajectory": DESK_SAMPLES_PER_TRAJECTORY},
}

PRESETS: dict[str, dict] = {
    "hopf-demo": {
        "model": {"name": HOPF, "eta": HOPF_ETA, "sigma": HOPF_ETA},
        "ramp": {"lambda0": HOPF_LAMBDA_START, "lambda_end": HOPF_LAMBDA_END},
        "simulation": {"t0": 0.0, "t_end": HOPF_T_END, "dt": SIM_DT},
        "sampling": {"alpha": HOPF_GAP_ALPHA, "beta": HOPF_GAP_BETA},
        "detection": {"window": None, "tandem": "sd"},
    },
    "vdp-normal": {"model": {"name": VDP3, "a": A_NORMAL}},
    "vdp-excitable": {"model": {"name": VDP3, "a": A_EXCITABLE}},
    "desk": _DESK,
    "full": {},
    "table2": {
        "experiment": {
            "a_values": [A_EXCITABLE, A_NORMAL],
            "noise_levels": [TABLE2_SIGMA],
            "cells": [list(c) for c in TABLE2_CELLS],
        },
    },
    "zero-noise": {
        **_DESK,
        "model": {"sigma": 0.0},
        "experiment": {
            "runs_per_arm": DESK_RUNS_PER_ARM,
            "noise_levels": [0.0],
            "a_values": [A_EXCITABLE, A_NORMAL],
        },
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_override(text: str) -> dict:
    """`section.key=value` -> {section: {key: value}}; value is read as YAML."""
    if "=" not in text:
        raise ConfigError(text, "override must look like section.key=value")
    path, raw = text.split("=", 1)
    parts = path.strip().split(".")
    if len(parts) != 2 or not all(parts):
        raise ConfigError(path, "override key must look like section.key")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(path, f"unreadable value {raw!r}: {e}")
    return {parts[0]: {parts[1]: value}}


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(str(path), f"invalid YAML: {e}")
    if data is not None and not isinstance(data, dict):
        raise ConfigError(str(path), "config file must hold a mapping of sections")
    return data or {}


def load_run_config(
    path=None,
    preset: Optional[str] = None,
    overrides: Iterable[str] = (),
    extra: Optional[dict] = None,
) -> RunConfig:
    """Defaults <- preset <- config file <- --set overrides <- dedicated flags (`extra`)."""
    data: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        data = deep_merge(data, PRESETS[preset])
    if path is not None:
        data = deep_merge(data, read_config_file(path))
    for text in overrides:
        data = deep_merge(data, parse_override(text))
    if extra:
        data = deep_merge(data, extra)
    return RunConfig.from_mapping(data)


def dump_run_config(config: RunConfig) -> str:
    """YAML text that loads back to the same RunConfig."""

    def plain(value):
        if isinstance(value, dict):
            return {k: plain(v) for k, v in value.items()}
        if isinstance(value, (tuple, list)):
            return [plain(v) for v in value]
        return value

    return yaml.safe_dump(plain(config.as_dict()), sort_keys=False)
