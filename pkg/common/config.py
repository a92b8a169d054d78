# =====================
# common/config.py
# Centralized configuration: environment variables and experiment protocol defaults
# =====================

import os
from pathlib import Path

from dotenv import load_dotenv

PROJECT_ROOT = Path(__file__).resolve().parents[1]

# Local .env is optional; real environment variables always win
load_dotenv(dotenv_path=PROJECT_ROOT / ".env", override=False)

# Environment variables
ROD_OUTPUT_DIR = os.getenv("ROD_OUTPUT_DIR", "output")
ROD_LOG_LEVEL = os.getenv("ROD_LOG_LEVEL", "INFO").upper()

# ── Statistics ──────────────────────────────────────────────────────────────
MIN_ROD_OBSERVATIONS = 3
MIN_DEVIATION_OBSERVATIONS = 2

# ── Hopf normal-form demonstration ──────────────────────────────────────────
HOPF_ETA = 0.25
HOPF_T_END = 100.0
HOPF_LAMBDA_START = -1.0
HOPF_LAMBDA_END = 1.0
HOPF_GAP_ALPHA = 4.0
HOPF_GAP_BETA = 8.0

# ── Three-dimensional Van der Pol protocol ──────────────────────────────────
VDP_LAMBDA0 = 1.2
VDP_LAMBDA_CRITICAL = 1.0
BIFURCATION_TIME = 1000.0
SIM_T_END = 2000.0
SIM_DT = 0.05
A_NORMAL = 10.0
A_EXCITABLE = 1.0
NOISE_LEVELS = (0.0, 0.01, 0.05, 0.1, 0.25)
SAMPLING_CONFIGS = ((20.0, 40.0), (25.0, 50.0), (25.0, 75.0), (50.0, 100.0))
WINDOWS = (250.0, 500.0, 750.0, 1000.0)
RUNS_PER_ARM = 100
SAMPLES_PER_TRAJECTORY = 100
DESK_RUNS_PER_ARM = 20
DESK_SAMPLES_PER_TRAJECTORY = 25
DEFAULT_MASTER_SEED = 20190501

# ── Classifier targets (alpha, beta, window) -> AUC per parametrization ─────
TABLE2_CELLS = (
    (25.0, 50.0, 500.0),
    (25.0, 75.0, 500.0),
    (50.0, 100.0, 750.0),
    (50.0, 100.0, 1000.0),
)
TABLE2_AUC = {
    A_EXCITABLE: (0.867, 0.980, 0.876, 0.840),
    A_NORMAL: (0.830, 0.937, 0.911, 0.800),
}
# noise level whose ROC is compared against the reference AUCs
TABLE2_SIGMA = 0.1
HARD_TARGET_CELL = (25.0, 75.0, 500.0)
HARD_AUC_TOLERANCE = 0.03
SOFT_AUC_TOLERANCE = 0.06

# ── AR(1) check of RoD^2 against 2(1 - rho) ─────────────────────────────────
PROP1_PHIS = (-0.8, -0.5, 0.0, 0.5, 0.8, 0.95)
PROP1_N = 1_000_000
PROP1_SEEDS = 10
PROP1_TOLERANCE = 0.01
