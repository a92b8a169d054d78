# =====================
# experiments/sweep.py
# Short-series sweep: true/false positive rates of joint RoD detection on sparse samples
# of ramped and control Van der Pol runs
# =====================

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Optional

import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from analytics.detector import MultivariateSample, TandemRule, detect_multivariate
from analytics.rod_stats import WindowSpec
from common.config import (
    A_EXCITABLE,
    BIFURCATION_TIME,
    DEFAULT_MASTER_SEED,
    DESK_RUNS_PER_ARM,
    DESK_SAMPLES_PER_TRAJECTORY,
    NOISE_LEVELS,
    RUNS_PER_ARM,
    SAMPLES_PER_TRAJECTORY,
    SAMPLING_CONFIGS,
    SIM_DT,
    SIM_T_END,
    VDP_LAMBDA0,
    WINDOWS,
)
from common.errors import ArmFailure, ConfigError, RodError
from common.utils import child_seed, seed_key
from simulation.sampler import SamplePlan, sample, sample_plans
from simulation.sde import Trajectory, initial_state, simulate, vdp3_model

RAMPED = 1
CONTROL = 0


# ── Configuration ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class SweepConfig:
    """
    One Van der Pol parametrization swept over noise levels, sampling configs and windows.

    runs_per_arm ramped runs and runs_per_arm control runs are simulated per noise level;
    each trajectory yields samples_per_trajectory sampled series per (alpha, beta).
    """

    a: float = A_EXCITABLE
    noise_levels: tuple = NOISE_LEVELS
    runs_per_arm: int = RUNS_PER_ARM
    sampling_configs: tuple = SAMPLING_CONFIGS
    windows: tuple = WINDOWS
    samples_per_trajectory: int = SAMPLES_PER_TRAJECTORY
    tandem: TandemRule = field(default_factory=TandemRule.rmssd_increase)
    classifier_tandem: TandemRule = field(default_factory=TandemRule.none)
    master_seed: int = DEFAULT_MASTER_SEED
    tp_cutoff: float = BIFURCATION_TIME
    bifurcation_time: float = BIFURCATION_TIME
    t_end: float = SIM_T_END
    dt: float = SIM_DT
    lambda0: float = VDP_LAMBDA0
    threads: int = 1
    progress: bool = False

    def __post_init__(self):
        object.__setattr__(self, "noise_levels", tuple(float(s) for s in self.noise_levels))
        object.__setattr__(self, "windows", tuple(float(w) for w in self.windows))
        object.__setattr__(
            self,
            "sampling_configs",
            tuple((float(a), float(b)) for a, b in self.sampling_configs),
        )
        if not self.a > 0:
            raise ConfigError("a", "time-scale parameter must be > 0")
        if any(s < 0 for s in self.noise_levels):
            raise ConfigError("noise_levels", "noise intensities must be >= 0")
        if self.runs_per_arm < 0:
            raise ConfigError("runs_per_arm", "must be >= 0")
        if self.samples_per_trajectory < 0:
            raise ConfigError("samples_per_trajectory", "must be >= 0")
        if any(w <= 0 for w in self.windows):
            raise ConfigError("windows", "window lengths must be > 0")
        for alpha, beta in self.sampling_configs:
            if not 0 < alpha < beta:
                raise ConfigError(
                    "sampling_configs", f"need 0 < alpha < beta, got ({alpha}, {beta})"
                )
        if not self.dt > 0:
            raise ConfigError("dt", "must be > 0")
        if not self.t_end > self.bifurcation_time > 0:
            raise ConfigError("t_end", "must exceed bifurcation_time")
        if self.threads < 1:
            raise ConfigError("threads", "must be >= 1")

    @classmethod
    def desk(cls, a: float = A_EXCITABLE, **overrides) -> "SweepConfig":
        """Scaled-down protocol for quick runs: 20 runs per arm, 25 samples each."""
        overrides.setdefault("runs_per_arm", DESK_RUNS_PER_ARM)
        overrides.setdefault("samples_per_trajectory", DESK_SAMPLES_PER_TRAJECTORY)
        return cls(a=a, **overrides)

    @classmethod
    def full(cls, a: float = A_EXCITABLE, **overrides) -> "SweepConfig":
        return cls(a=a, **overrides)

    def replace(self, **changes) -> "SweepConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["tandem"] = str(self.tandem)
        d["classifier_tandem"] = str(self.classifier_tandem)
        d.pop("threads")
        d.pop("progress")
        return d


# ── Arms: one simulated trajectory and its sampled series ────────────────────
@dataclass(frozen=True)
class Arm:
    a: float
    sigma: float
    ramped: bool
    run: int

    @property
    def key(self) -> tuple[int, ...]:
        arm = RAMPED if self.ramped else CONTROL
        return (seed_key(self.a), seed_key(self.sigma), arm, self.run)

    def describe(self) -> dict:
        return {"a": self.a, "sigma": self.sigma, "arm": "ramped" if self.ramped else "control",
                "run": self.run}


def iter_arms(config: SweepConfig) -> list[Arm]:
    return [
        Arm(config.a, sigma, ramped, run)
        for sigma in config.noise_levels
        for ramped in (True, False)
        for run in range(config.runs_per_arm)
    ]


def simulate_arm(config: SweepConfig, arm: Arm) -> Trajectory:
    model = vdp3_model(
        config.a,
        arm.sigma,
        arm.ramped,
        lambda0=config.lambda0,
        bifurcation_time=config.bifurcation_time,
        t_end=config.t_end,
    )
    seed = child_seed(config.master_seed, *arm.key)
    return simulate(model, initial_state(model), 0.0, config.t_end, config.dt, seed)


def arm_samples(
    config: SweepConfig, arm: Arm, trajectory: Trajectory, alpha: float, beta: float
) -> list[MultivariateSample]:
    """
    Sampled series of one trajectory for one (alpha, beta). Seeds depend only on the arm and
    the sampling config, so the sweep and the classifier see identical samples.
    """
    base = SamplePlan(alpha, beta, 0.0, config.t_end)
    plans = sample_plans(
        base,
        config.master_seed,
        config.samples_per_trajectory,
        *arm.key,
        seed_key(alpha),
        seed_key(beta),
    )
    return [sample(trajectory, p) for p in plans]


def run_arms(
    config: SweepConfig,
    work: Callable[..., dict],
    arms: Iterable[Arm],
    desc: str,
    *args,
) -> list[dict]:
    """
    Fan out `work` over arms with joblib. Results come back in submission order, so
    aggregation does not depend on the worker count.
    """
    arms = list(arms)
    if not arms:
        return []
    jobs = Parallel(n_jobs=config.threads, return_as="generator")(
        delayed(work)(config, arm, *args) for arm in arms
    )
    return list(
        tqdm(jobs, total=len(arms), desc=desc, unit="traj", disable=not config.progress)
    )


def guarded(work: Callable[..., dict]) -> Callable[..., dict]:
    """Re-raise domain failures inside a work unit as ArmFailure naming the arm."""

    def _run(config: SweepConfig, arm: Arm, *args) -> dict:
        try:
            return work(config, arm, *args)
        except RodError as e:
            raise ArmFailure(arm.describe(), f"{type(e).__name__}: {e}") from e

    _run.__name__ = work.__name__
    return _run


# ── Rate table ───────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class RateRow:
    a: float
    sigma: float
    alpha: float
    beta: float
    window: float
    tandem: str
    tp_count: int
    n_ramped_samples: int
    fp_count: int
    n_control_samples: int

    @property
    def tp_rate(self) -> float:
        return self.tp_count / self.n_ramped_samples if self.n_ramped_samples else 0.0

    @property
    def fp_rate(self) -> float:
        return self.fp_count / self.n_control_samples if self.n_control_samples else 0.0


RATE_COLUMNS = [
    "a",
    "sigma",
    "alpha",
    "beta",
    "window",
    "tandem",
    "tp_rate",
    "fp_rate",
    "n_ramped_samples",
    "n_control_samples",
]


@dataclass
class RateTable:
    rows: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def get(self, sigma: float, alpha: float, beta: float, window: float) -> Optional[RateRow]:
        for r in self.rows:
            if (r.sigma, r.alpha, r.beta, r.window) == (sigma, alpha, beta, window):
                return r
        return None

    def extend(self, other: "RateTable") -> "RateTable":
        self.rows.extend(other.rows)
        return self

    def to_frame(self) -> pd.DataFrame:
        records = [
            {
                "a": r.a,
                "sigma": r.sigma,
                "alpha": r.alpha,
                "beta": r.beta,
                "window": r.window,
                "tandem": r.tandem,
                "tp_rate": r.tp_rate,
                "fp_rate": r.fp_rate,
                "n_ramped_samples": r.n_ramped_samples,
                "n_control_samples": r.n_control_samples,
            }
            for r in self.rows
        ]
        return pd.DataFrame(records, columns=RATE_COLUMNS)


# ── Sweep ────────────────────────────────────────────────────────────────────
def sample_is_positive(
    config: SweepConfig, s: MultivariateSample, window: float, ramped: bool
) -> bool:
    """
    Ramped runs: true positive iff the first joint detection happens by tp_cutoff.
    Control runs: false positive iff there is any joint detection at all.
    """
    first = detect_multivariate(s, WindowSpec.trailing(window), config.tandem)
    if first is None:
        return False
    return first[1] <= config.tp_cutoff if ramped else True


def _sweep_arm(config: SweepConfig, arm: Arm) -> dict:
    trajectory = simulate_arm(config, arm)
    counts = {}
    for alpha, beta in config.sampling_configs:
        samples = arm_samples(config, arm, trajectory, alpha, beta)
        for window in config.windows:
            counts[(alpha, beta, window)] = sum(
                sample_is_positive(config, s, window, arm.ramped) for s in samples
            )
    return counts


sweep_arm = guarded(_sweep_arm)


def run_short_series_sweep(config: SweepConfig) -> RateTable:
    """
    Per (sigma, alpha, beta, window) cell: fraction of ramped samples detected before the
    bifurcation (tp_rate) and fraction of control samples with any detection (fp_rate).
    """
    table = RateTable()
    if config.runs_per_arm == 0:
        logging.info("📭 runs_per_arm = 0, nothing to sweep.")
        return table

    arms = iter_arms(config)
    results = run_arms(config, sweep_arm, arms, desc=f"sweep a={config.a:g}")

    per_arm = config.runs_per_arm * config.samples_per_trajectory
    for sigma in config.noise_levels:
        for alpha, beta in config.sampling_configs:
            for window in config.windows:
                cell = (alpha, beta, window)
                tp = sum(
                    res[cell]
                    for arm, res in zip(arms, results)
                    if arm.sigma == sigma and arm.ramped
                )
                fp = sum(
                    res[cell]
                    for arm, res in zip(arms, results)
                    if arm.sigma == sigma and not arm.ramped
                )
                table.rows.append(
                    RateRow(config.a, sigma, alpha, beta, window, str(config.tandem),
                            tp, per_arm, fp, per_arm)
                )
        logging.info(f"✅ Sweep a={config.a:g} sigma={sigma:g} complete")
    return table
