# =====================
# simulation/writer.py
# CSV export of dense trajectories and sampled series, and import of sampled series
# =====================
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from analytics.detector import MultivariateSample
from common.errors import SeriesParseError
from simulation.sde import Trajectory

FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


def _meta_line(meta: Optional[dict]) -> str:
    if not meta:
        return ""
    return "# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n"


def write_frame(df: pd.DataFrame, path: PathLike, meta: Optional[dict] = None) -> Path:
    """
    Write a DataFrame as CSV with an optional leading `# key=value ...` comment line.
    Floats use 17 significant digits so values round-trip bitwise.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(_meta_line(meta))
        df.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logging.info(f"✅ Wrote {len(df)} rows to {path}")
    return path


def _state_frame(times: np.ndarray, columns) -> pd.DataFrame:
    data = {"t": np.asarray(times, dtype=np.float64)}
    for j, col in enumerate(columns, start=1):
        data[f"x{j}"] = np.asarray(col, dtype=np.float64)
    return pd.DataFrame(data)


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    return _state_frame(trajectory.times(), trajectory.states.T)


def sample_frame(sample: MultivariateSample) -> pd.DataFrame:
    return _state_frame(sample.timestamps, sample.channels)


def write_trajectory(trajectory: Trajectory, path: PathLike, meta: Optional[dict] = None) -> Path:
    return write_frame(trajectory_frame(trajectory), path, meta)


def write_sample(sample: MultivariateSample, path: PathLike, meta: Optional[dict] = None) -> Path:
    return write_frame(sample_frame(sample), path, meta)


def _to_float(cell) -> float:
    try:
        return float(str(cell).strip())
    except ValueError:
        return float("nan")


def read_sample(path: PathLike) -> MultivariateSample:
    """
    Parse a `t,x1,...,xd` CSV (lines starting with '#' ignored) into a MultivariateSample.

    Row numbers in errors count data rows from 1, header excluded.
    """
    try:
        df = pd.read_csv(path, comment="#", dtype=str, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise SeriesParseError(0, "file has no header")
    except pd.errors.ParserError as e:
        raise SeriesParseError(0, f"malformed CSV: {e}")

    columns = [c.strip() for c in df.columns]
    if len(columns) < 2 or columns[0] != "t":
        raise SeriesParseError(0, f"expected header t,x1,...; got {','.join(columns)}")

    # python float() is correctly rounded, so %.17g text comes back bit-identical
    values = np.array(
        [[_to_float(cell) for cell in row] for row in df.itertuples(index=False)],
        dtype=np.float64,
    ).reshape(len(df), len(columns))
    bad = ~np.isfinite(values).all(axis=1)
    if bad.any():
        row = int(np.argmax(bad)) + 1
        raise SeriesParseError(row, "non-numeric or non-finite value")

    t = values[:, 0]
    steps = np.diff(t) > 0
    if not steps.all():
        row = int(np.argmin(steps)) + 2
        raise SeriesParseError(row, f"timestamp {t[row - 1]!r} does not increase")

    return MultivariateSample(t, tuple(values[:, j] for j in range(1, values.shape[1])))
