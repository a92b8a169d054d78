# =====================
# experiments/prop1.py
# Check RoD^2 ~ 2(1 - rho(1)) on stationary AR(1) series
# =====================

import logging
import math
from typing import Iterable

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from analytics.rod_stats import IrregularSeries, lag1_autocorr, rod
from common.config import DEFAULT_MASTER_SEED, PROP1_N, PROP1_PHIS, PROP1_SEEDS, PROP1_TOLERANCE
from common.errors import InvalidParameter
from common.utils import child_seed, rng_for, seed_key

PROP1_COLUMNS = ["phi", "seed", "rod_sq", "two_one_minus_rho", "abs_diff"]


def ar1_series(phi: float, n: int, seed: int) -> np.ndarray:
    """
    x_t = phi * x_{t-1} + e_t with standard normal e_t, started from the stationary
    distribution so the whole series is weakly stationary.
    """
    if not -1.0 < phi < 1.0:
        raise InvalidParameter(f"AR(1) needs |phi| < 1, got {phi}")
    if n < 3:
        raise InvalidParameter(f"AR(1) series needs n >= 3, got {n}")
    e = rng_for(seed).standard_normal(n)
    e[0] /= math.sqrt(1.0 - phi * phi)
    return lfilter([1.0], [1.0, -phi], e)


def prop1_seed(master_seed: int, phi: float, replicate: int) -> int:
    return child_seed(master_seed, seed_key(abs(phi)), int(phi < 0), replicate)


def validate_prop1(
    phis: Iterable[float] = PROP1_PHIS,
    n: int = PROP1_N,
    seeds: int = PROP1_SEEDS,
    master_seed: int = DEFAULT_MASTER_SEED,
) -> pd.DataFrame:
    records = []
    for phi in phis:
        for replicate in range(seeds):
            seed = prop1_seed(master_seed, phi, replicate)
            series = IrregularSeries.from_values(ar1_series(float(phi), n, seed))
            rod_sq = rod(series).value ** 2
            rhs = 2.0 * (1.0 - lag1_autocorr(series).value)
            records.append(
                {
                    "phi": float(phi),
                    "seed": seed,
                    "rod_sq": rod_sq,
                    "two_one_minus_rho": rhs,
                    "abs_diff": abs(rod_sq - rhs),
                }
            )
    df = pd.DataFrame(records, columns=PROP1_COLUMNS)
    if not df.empty:
        worst = df["abs_diff"].max()
        icon = "✅" if worst < PROP1_TOLERANCE else "⚠️"
        logging.info(f"{icon} RoD^2 vs 2(1 - rho): {len(df)} series, max |diff| = {worst:.2e}")
    return df
