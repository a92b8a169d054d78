# =====================
# experiments/reports.py
# CSV/JSON export of rate tables, ROC curves, classifier tables and the AR(1) check
# =====================
import json
import logging
from pathlib import Path
from typing import Optional

import pandas as pd

from experiments.classifier import RocCurve, Table2Row
from experiments.sweep import RateTable
from simulation.writer import PathLike, write_frame

ROC_COLUMNS = ["threshold", "fpr", "tpr"]
TABLE2_COLUMNS = [
    "a", "sigma", "alpha", "beta", "window", "auc", "target", "diff", "hard", "within_tolerance",
]


def write_rate_table(table: RateTable, path: PathLike, meta: Optional[dict] = None) -> Path:
    return write_frame(table.to_frame(), path, meta)


def roc_frame(curve: RocCurve) -> pd.DataFrame:
    return pd.DataFrame({"threshold": curve.thresholds, "fpr": curve.fpr, "tpr": curve.tpr})


def roc_summary(curve: RocCurve, config_hash: str, **extra) -> dict:
    return {
        "auc": curve.auc,
        "n_pos": curve.n_pos,
        "n_neg": curve.n_neg,
        "config_hash": config_hash,
        **extra,
    }


def write_roc(
    curve: RocCurve,
    csv_path: PathLike,
    json_path: PathLike,
    config_hash: str,
    meta: Optional[dict] = None,
    **extra,
) -> dict:
    """ROC points as CSV plus a one-line JSON summary next to it."""
    write_frame(roc_frame(curve), csv_path, meta)
    summary = roc_summary(curve, config_hash, **extra)
    json_path = Path(json_path)
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(summary) + "\n", encoding="utf-8")
    logging.info(f"✅ AUC {curve.auc:.4f} ({curve.n_pos} pos / {curve.n_neg} neg) -> {json_path}")
    return summary


def table2_frame(rows: list[Table2Row]) -> pd.DataFrame:
    records = [
        {
            "a": r.a,
            "sigma": r.sigma,
            "alpha": r.alpha,
            "beta": r.beta,
            "window": r.window,
            "auc": r.auc,
            "target": r.target,
            "diff": r.diff,
            "hard": r.hard,
            "within_tolerance": r.within_tolerance,
        }
        for r in rows
    ]
    return pd.DataFrame(records, columns=TABLE2_COLUMNS)


def write_table2(rows: list[Table2Row], path: PathLike, meta: Optional[dict] = None) -> Path:
    return write_frame(table2_frame(rows), path, meta)


def write_prop1(df: pd.DataFrame, path: PathLike, meta: Optional[dict] = None) -> Path:
    return write_frame(df, path, meta)
