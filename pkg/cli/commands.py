# =====================
# cli/commands.py
# Subcommand bodies: each takes a resolved RunConfig and writes its artifacts
# =====================
import json
import logging
from pathlib import Path
from typing import Optional

from analytics.detector import (
    MultivariateSample,
    detect_channels,
    joint_detection_indices,
)
from analytics.rod_stats import WindowSpec
from cli.run_config import RunConfig, dump_run_config
from experiments.classifier import run_highfreq_experiment, table2_rows
from experiments.prop1 import validate_prop1
from experiments.reports import write_prop1, write_rate_table, write_roc, write_table2
from experiments.sweep import RateTable, run_short_series_sweep
from simulation.sampler import sample
from simulation.sde import Trajectory, initial_state, simulate
from simulation.writer import read_sample, write_sample, write_trajectory


def _out(config: RunConfig, out: Optional[str], default_name: str) -> Path:
    return Path(out) if out else config.output_dir / default_name


def _save_config(config: RunConfig) -> Path:
    path = config.output_dir / "run_config.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f"# config_hash={config.hash}\n" + dump_run_config(config), encoding="utf-8")
    return path


def _tag(value: float) -> str:
    return f"{value:g}".replace(".", "p").replace("-", "m")


# ── simulate / sample ────────────────────────────────────────────────────────
def simulate_trajectory(config: RunConfig) -> Trajectory:
    model = config.build_model()
    s = config.simulation
    return simulate(model, initial_state(model), s.t0, s.t_end, s.dt, config.simulation_seed())


def sample_series(config: RunConfig) -> MultivariateSample:
    return sample(simulate_trajectory(config), config.sample_plan())


def cmd_simulate(config: RunConfig, out: Optional[str] = None) -> Path:
    trajectory = simulate_trajectory(config)
    path = write_trajectory(trajectory, _out(config, out, "trajectory.csv"), config.meta())
    final = " ".join(f"{v:.6g}" for v in trajectory.states[-1])
    print(f"steps={trajectory.n_points - 1} seed={trajectory.seed} final=[{final}] -> {path}")
    return path


def cmd_sample(config: RunConfig, out: Optional[str] = None) -> Path:
    """Re-simulates the configured trajectory (same seed as `simulate`) and samples it."""
    s = sample_series(config)
    path = write_sample(s, _out(config, out, "sample.csv"), config.meta())
    print(f"observations={len(s)} seed={config.sample_plan().seed} -> {path}")
    return path


# ── detect ───────────────────────────────────────────────────────────────────
def detection_report(config: RunConfig, s: MultivariateSample, window: WindowSpec) -> dict:
    tandem = config.tandem_rule()
    quorum = config.detection.quorum
    events = detect_channels(s, window, tandem, quorum)
    joint = joint_detection_indices(s, window, tandem, quorum)
    first = None
    if joint:
        first = {"observation_index": joint[0], "time": float(s.timestamps[joint[0]])}
    return {
        "config_hash": config.hash,
        "window": str(window),
        "tandem": str(tandem),
        "events": [e.as_dict() for i in sorted(events) for e in events[i]],
        "joint_detection": first,
    }


def cmd_detect(config: RunConfig, series_path: str, out: Optional[str] = None) -> dict:
    s = read_sample(series_path)
    report = detection_report(config, s, config.detection.window_spec())
    text = json.dumps(report, indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n", encoding="utf-8")
        logging.info(f"✅ Wrote {len(report['events'])} events to {out}")
    else:
        print(text)
    return report


# ── experiments ──────────────────────────────────────────────────────────────
def cmd_sweep(config: RunConfig, out: Optional[str] = None, progress: bool = True) -> Path:
    table = RateTable()
    for a in config.a_values():
        table.extend(run_short_series_sweep(config.sweep_config(a, progress=progress)))
    _save_config(config)
    path = write_rate_table(table, _out(config, out, "rates.csv"), config.meta())
    print(f"cells={len(table)} -> {path}")
    return path


def cmd_classify(config: RunConfig, progress: bool = True) -> list:
    """ROC CSV + JSON summary per (a, sigma, cell), plus the AUC table with reference values."""
    rows = []
    for a in config.a_values():
        results = run_highfreq_experiment(
            config.sweep_config(a, progress=progress), config.experiment.cells
        )
        for (sigma, alpha, beta, window), result in results.items():
            cell = f"{_tag(alpha)}_{_tag(beta)}_{_tag(window)}"
            stem = f"roc_a{_tag(a)}_s{_tag(sigma)}_{cell}"
            summary = write_roc(
                result.roc(),
                config.output_dir / f"{stem}.csv",
                config.output_dir / f"{stem}.json",
                config.hash,
                meta=config.meta(),
                a=a,
                sigma=sigma,
                alpha=alpha,
                beta=beta,
                window=window,
            )
            print(json.dumps(summary))
        rows.extend(table2_rows(results))
    _save_config(config)
    write_table2(rows, config.output_dir / "auc_table.csv", config.meta())
    return rows


def cmd_validate_prop1(config: RunConfig, out: Optional[str] = None):
    e = config.experiment
    df = validate_prop1(e.prop1_phis, e.prop1_n, e.prop1_seeds, e.master_seed)
    print(df.to_string(index=False))
    write_prop1(df, _out(config, out, "prop1.csv"), config.meta())
    return df


# ── demo ─────────────────────────────────────────────────────────────────────
def cmd_demo(config: RunConfig) -> dict:
    """Simulate, sample and detect in one go; the hopf-demo preset gives the normal-form run."""
    trajectory = simulate_trajectory(config)
    s = sample(trajectory, config.sample_plan())
    report = detection_report(config, s, config.detection.window_spec())
    first = report["joint_detection"]
    if first is None:
        print(f"no joint detection in {len(s)} observations")
    else:
        print(
            f"joint detection at observation {first['observation_index']} "
            f"(t={first['time']:.4g}, lambda={config.build_model().ramp.value(first['time']):.4g})"
        )
    return report
