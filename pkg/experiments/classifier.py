# =====================
# experiments/classifier.py
# High-frequency aggregation classifier: per-trajectory detection scores, ROC and AUC
# =====================

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from analytics.detector import MultivariateSample, TandemRule, first_joint_detection
from analytics.rod_stats import WindowSpec
from common.config import (
    A_EXCITABLE,
    A_NORMAL,
    HARD_AUC_TOLERANCE,
    HARD_TARGET_CELL,
    SOFT_AUC_TOLERANCE,
    TABLE2_AUC,
    TABLE2_CELLS,
    TABLE2_SIGMA,
)
from common.errors import ConfigError, OneClassInput
from experiments.sweep import (
    Arm,
    SweepConfig,
    arm_samples,
    guarded,
    iter_arms,
    run_arms,
    simulate_arm,
)

Cell = tuple[float, float, float]
# (sigma, alpha, beta, window)
ScoreKey = tuple[float, float, float, float]


# ── ROC ──────────────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class RocCurve:
    """
    Threshold sweep over the distinct scores, highest first. Row j holds the rates for the rule
    "positive iff score >= thresholds[j]"; row 0 is the empty rule (threshold +inf) at (0, 0).
    """

    thresholds: np.ndarray
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float
    n_pos: int
    n_neg: int

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _binary_labels(labels) -> np.ndarray:
    y = np.asarray(labels)
    if y.dtype == bool:
        return y
    return y.astype(np.int64) != 0


def roc(scores: Sequence[float], labels: Sequence) -> RocCurve:
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _binary_labels(labels).reshape(-1)
    if s.shape != y.shape:
        raise ValueError(f"{s.size} scores but {y.size} labels")
    n_pos = int(y.sum())
    n_neg = int(y.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise OneClassInput(f"roc needs both classes, got {n_pos} positive and {n_neg} negative")

    order = np.argsort(-s, kind="mergesort")
    s, y = s[order], y[order]
    # last index of each run of equal scores; ties move the counts together
    ends = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    tp = np.cumsum(y)[ends]
    fp = (ends + 1) - tp

    tpr = np.r_[0.0, tp / n_pos]
    fpr = np.r_[0.0, fp / n_neg]
    thresholds = np.r_[np.inf, s[ends]]
    auc = float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))
    return RocCurve(thresholds, fpr, tpr, auc, n_pos, n_neg)


def mann_whitney_auc(scores: Sequence[float], labels: Sequence) -> float:
    """P(random positive outscores random negative) + half the tie probability."""
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    y = _binary_labels(labels).reshape(-1)
    pos, neg = s[y], s[~y]
    if pos.size == 0 or neg.size == 0:
        raise OneClassInput("mann_whitney_auc needs both classes")
    diff = pos[:, None] - neg[None, :]
    return float(((diff > 0).sum() + 0.5 * (diff == 0).sum()) / (pos.size * neg.size))


# ── Per-trajectory scores ────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class HighFreqResult:
    """Scores of the trajectories of one noise level under one (alpha, beta, window) cell."""

    a: float
    sigma: float
    alpha: float
    beta: float
    window: float
    scores: np.ndarray
    labels: np.ndarray

    @property
    def cell(self) -> Cell:
        return (self.alpha, self.beta, self.window)

    @property
    def key(self) -> ScoreKey:
        return (self.sigma, *self.cell)

    def roc(self) -> RocCurve:
        return roc(self.scores, self.labels)

    def __iter__(self):
        return iter((self.scores, self.labels))


def sample_flags(
    s: MultivariateSample, anchor: float, window: float, tandem: TandemRule
) -> bool:
    """Any joint detection among the observations in (anchor - window, anchor]."""
    sub = s.restrict(anchor - window, anchor)
    if len(sub) == 0:
        return False
    return first_joint_detection(sub, WindowSpec.growing_prefix(), tandem) is not None


def _classify_arm(config: SweepConfig, arm: Arm, cells: tuple) -> dict:
    trajectory = simulate_arm(config, arm)
    anchor = config.bifurcation_time
    scores = {}
    by_gap: dict[tuple[float, float], list] = {}
    for alpha, beta, window in cells:
        if (alpha, beta) not in by_gap:
            by_gap[(alpha, beta)] = arm_samples(config, arm, trajectory, alpha, beta)
        samples = by_gap[(alpha, beta)]
        flagged = sum(sample_flags(s, anchor, window, config.classifier_tandem) for s in samples)
        scores[(alpha, beta, window)] = flagged / len(samples) if samples else 0.0
    return scores


classify_arm = guarded(_classify_arm)


def default_cells(config: SweepConfig) -> tuple:
    return tuple((a, b, w) for a, b in config.sampling_configs for w in config.windows)


def run_highfreq_experiment(
    config: SweepConfig, cells: Optional[Iterable[Cell]] = None
) -> dict[ScoreKey, HighFreqResult]:
    """
    Score every trajectory by the fraction of its sampled series that flag a joint RoD
    detection in the window ending at the bifurcation time. Ramped runs are the positive class.

    Results are keyed by (sigma, alpha, beta, window): each noise level gets its own set of
    ramped and control trajectories and therefore its own ROC.

    Sample seeds match run_short_series_sweep, so both experiments read the same samples.
    """
    cells = default_cells(config) if cells is None else tuple(
        (float(a), float(b), float(w)) for a, b, w in cells
    )
    for alpha, beta, window in cells:
        if not 0 < alpha < beta or not window > 0:
            raise ConfigError("cells", f"invalid cell ({alpha}, {beta}, {window})")

    arms = iter_arms(config)
    results = run_arms(config, classify_arm, arms, f"classify a={config.a:g}", cells)

    out = {}
    for sigma in config.noise_levels:
        rows = [(arm, res) for arm, res in zip(arms, results) if arm.sigma == sigma]
        labels = np.array([arm.ramped for arm, _ in rows], dtype=bool)
        for cell in cells:
            scores = np.array([res[cell] for _, res in rows], dtype=np.float64)
            result = HighFreqResult(config.a, sigma, *cell, scores, labels)
            out[result.key] = result
    logging.info(
        f"✅ Scored {len(arms)} trajectories over {len(config.noise_levels)} noise levels "
        f"x {len(cells)} cells (a={config.a:g})"
    )
    return out


# ── Classifier table ─────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Table2Row:
    a: float
    sigma: float
    alpha: float
    beta: float
    window: float
    auc: float
    target: Optional[float]
    hard: bool

    @property
    def diff(self) -> Optional[float]:
        return None if self.target is None else self.auc - self.target

    @property
    def within_tolerance(self) -> Optional[bool]:
        if self.target is None:
            return None
        tol = HARD_AUC_TOLERANCE if self.hard else SOFT_AUC_TOLERANCE
        return abs(self.diff) <= tol


def target_auc(a: float, cell: Cell, sigma: float = TABLE2_SIGMA) -> Optional[float]:
    """Reference AUC; only the TABLE2_SIGMA noise level carries one."""
    targets = TABLE2_AUC.get(float(a))
    if targets is None or cell not in TABLE2_CELLS or not math.isclose(sigma, TABLE2_SIGMA):
        return None
    return targets[TABLE2_CELLS.index(cell)]


def table2_rows(results: dict[ScoreKey, HighFreqResult]) -> list[Table2Row]:
    rows = []
    for result in results.values():
        cell = result.cell
        auc = result.roc().auc
        target = target_auc(result.a, cell, result.sigma)
        hard = target is not None and cell == HARD_TARGET_CELL
        row = Table2Row(result.a, result.sigma, *cell, auc, target, hard)
        rows.append(row)
        if row.within_tolerance is False:
            level = logging.ERROR if row.hard else logging.WARNING
            logging.log(
                level,
                f"⚠️ a={result.a:g} sigma={result.sigma:g} cell={cell}: "
                f"AUC {auc:.3f} vs {row.target:.3f}",
            )
    return rows


def run_table2(
    a_values: Iterable[float] = (A_EXCITABLE, A_NORMAL),
    cells: Iterable[Cell] = TABLE2_CELLS,
    base: Optional[SweepConfig] = None,
) -> list[Table2Row]:
    """
    AUC for each (a, cell) at the TABLE2_SIGMA noise level next to its reference value;
    HARD_TARGET_CELL rows are hard.
    """
    base = (base or SweepConfig.full()).replace(noise_levels=(TABLE2_SIGMA,))
    cells = tuple((float(a), float(b), float(w)) for a, b, w in cells)
    rows = []
    for a in a_values:
        rows.extend(table2_rows(run_highfreq_experiment(base.replace(a=float(a)), cells)))
    return rows
