import numpy as np
import pytest

from analytics.detector import MultivariateSample
from common.errors import SeriesParseError
from simulation.sampler import SamplePlan, sample
from simulation.sde import initial_state, simulate, vdp3_model
from simulation.writer import (
    read_sample,
    sample_frame,
    trajectory_frame,
    write_sample,
    write_trajectory,
)

# =====================
# tests/test_writer.py
# Unit tests for trajectory / sampled-series CSV export and import
# =====================


@pytest.fixture
def trajectory():
    model = vdp3_model(1.0, 0.1, ramped=True, t_end=100.0, bifurcation_time=50.0)
    return simulate(model, initial_state(model), 0.0, 100.0, 0.05, seed=21)


def test_trajectory_frame_columns(trajectory):
    df = trajectory_frame(trajectory)
    assert list(df.columns) == ["t", "x1", "x2", "x3"]
    assert len(df) == trajectory.n_points


def test_written_file_starts_with_meta_line(tmp_path, trajectory):
    meta = {"config_hash": "abc", "master_seed": 1}
    path = write_trajectory(trajectory, tmp_path / "traj.csv", meta)
    lines = path.read_text().splitlines()
    assert lines[0] == "# config_hash=abc master_seed=1"
    assert lines[1] == "t,x1,x2,x3"
    assert len(lines) == trajectory.n_points + 2


def test_sample_round_trip_is_bitwise(tmp_path, trajectory):
    s = sample(trajectory, SamplePlan(5.0, 10.0, 0.0, 100.0, seed=4))
    path = write_sample(s, tmp_path / "sample.csv", {"config_hash": "abc"})
    back = read_sample(path)
    assert np.array_equal(back.timestamps, s.timestamps)
    for a, b in zip(back.channels, s.channels):
        assert np.array_equal(a, b)


def test_sample_frame_matches_sample():
    s = MultivariateSample([0.0, 1.5], ([1.0, 2.0], [3.0, 4.0]))
    df = sample_frame(s)
    assert df.to_dict("list") == {"t": [0.0, 1.5], "x1": [1.0, 2.0], "x2": [3.0, 4.0]}


def test_read_rejects_non_increasing_timestamps(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x1\n0,1.0\n1,2.0\n3,3.0\n2,4.0\n")
    with pytest.raises(SeriesParseError) as exc:
        read_sample(path)
    assert exc.value.row == 4


def test_read_rejects_non_numeric_value(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x1\n0,1.0\n1,abc\n")
    with pytest.raises(SeriesParseError) as exc:
        read_sample(path)
    assert exc.value.row == 2


def test_read_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,x1\n0,1.0\n")
    with pytest.raises(SeriesParseError) as exc:
        read_sample(path)
    assert exc.value.row == 0


def test_read_ignores_comment_lines(tmp_path):
    path = tmp_path / "ok.csv"
    path.write_text("# produced elsewhere\nt,x1,x2\n0,1,2\n2.5,3,4\n")
    s = read_sample(path)
    assert s.timestamps.tolist() == [0.0, 2.5]
    assert s.n_channels == 2
