# =====================
# simulation/sampler.py
# Sparse observations of a dense trajectory at uniform random gaps
# =====================

import math
from dataclasses import dataclass, replace

import numpy as np

from analytics.detector import MultivariateSample
from common.config import SIM_T_END
from common.errors import InvalidPlan
from common.utils import child_seed, rng_for
from simulation.sde import Trajectory


@dataclass(frozen=True)
class SamplePlan:
    """
    Observation times t_0 = t_start, t_{i+1} = t_i + U_i, U_i ~ uniform(alpha, beta),
    stopping before the first time beyond t_end.
    """

    alpha: float
    beta: float
    t_start: float = 0.0
    t_end: float = SIM_T_END
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < self.beta:
            raise InvalidPlan(f"need 0 < alpha < beta, got alpha={self.alpha}, beta={self.beta}")
        if not self.t_end > self.t_start:
            raise InvalidPlan(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")

    @property
    def expected_gap(self) -> float:
        return (self.alpha + self.beta) / 2.0

    def with_seed(self, seed: int) -> "SamplePlan":
        return replace(self, seed=int(seed))


def observation_times(plan: SamplePlan) -> np.ndarray:
    """
    Gaps are drawn in one batch large enough for the worst case (every gap = alpha),
    so the stream consumed depends only on the plan.
    """
    max_gaps = int(math.ceil((plan.t_end - plan.t_start) / plan.alpha)) + 1
    gaps = rng_for(plan.seed).uniform(plan.alpha, plan.beta, size=max_gaps)
    times = plan.t_start + np.concatenate(([0.0], np.cumsum(gaps)))
    return times[times <= plan.t_end]


def sample(trajectory: Trajectory, plan: SamplePlan) -> MultivariateSample:
    """Every state component read at the grid point nearest to each observation time."""
    if plan.t_start < trajectory.t0:
        raise InvalidPlan(f"plan starts at {plan.t_start} before trajectory start {trajectory.t0}")
    if plan.alpha < trajectory.dt:
        raise InvalidPlan(f"alpha={plan.alpha} is below the trajectory step dt={trajectory.dt}")
    if plan.t_end > trajectory.t_end + trajectory.dt / 2:
        raise InvalidPlan(f"plan ends at {plan.t_end} after trajectory end {trajectory.t_end}")

    times = observation_times(plan)
    rows = trajectory.states[trajectory.nearest_index(times)]
    return MultivariateSample(times, tuple(rows[:, j] for j in range(trajectory.dim)))


def sample_plans(base: SamplePlan, master_seed: int, n: int, *key: int) -> list[SamplePlan]:
    """n plans sharing (alpha, beta, span), each seeded by child_seed(master, *key, i)."""
    return [base.with_seed(child_seed(master_seed, *key, i)) for i in range(n)]


def mean_window_count(
    plan: SamplePlan, window: float, anchor: float, n_draws: int, master_seed: int = 0
) -> float:
    """Average number of observations falling in (anchor - window, anchor]."""
    counts = []
    for p in sample_plans(plan, master_seed, n_draws):
        t = observation_times(p)
        counts.append(int(np.count_nonzero((t > anchor - window) & (t <= anchor))))
    return float(np.mean(counts))
