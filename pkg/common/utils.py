# =====================
# common/utils.py
# Common utility functions: logging setup, child seeds and config hashing
# =====================
import hashlib
import json
import logging
from typing import Any, Optional

import numpy as np

from common.config import ROD_LOG_LEVEL


def setup_logging(level: Optional[str] = None):
    # Console handler on stderr so stdout stays machine-readable
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level or ROD_LOG_LEVEL)
    console_handler.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))

    # Root logger
    logging.basicConfig(level=level or ROD_LOG_LEVEL, handlers=[console_handler], force=True)


def child_seed(master_seed: int, *key: int) -> int:
    """
    Derive an independent 32-bit seed for one unit of work.

    The seed depends only on (master_seed, *key), never on the order in which units run,
    so trajectories and sampled series are reproducible under any parallel schedule.
    """
    entropy = [int(master_seed)] + [int(k) for k in key]
    return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 generator used everywhere a seeded stream is needed."""
    return np.random.Generator(np.random.PCG64(seed))


def seed_key(value: float) -> int:
    """Stable integer key for a real-valued parameter (noise level, gap bound, ...)."""
    return int(round(value * 1_000_000))


def config_hash(payload: dict[str, Any]) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
