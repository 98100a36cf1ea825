"""
Configuration module for Overshoot Lab.
Manages all environment variables and numerical settings.
"""

import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# =============================================================================
# RANDOM NUMBER GENERATION
# =============================================================================
# Every stream is keyed by (seed, stream_id); replicas derive their stream id
# from their index, never from the worker that runs them.
DEFAULT_SEED = int(os.getenv("OVERSHOOT_SEED", "20240101"))

# =============================================================================
# PARALLELISM
# =============================================================================
MAX_THREADS = int(os.getenv("OVERSHOOT_THREADS", str(os.cpu_count() or 1)))
REPLICAS = int(os.getenv("OVERSHOOT_REPLICAS", "16"))

# =============================================================================
# STEP BUDGETS
# =============================================================================
MAX_STEPS = int(os.getenv("OVERSHOOT_MAX_STEPS", str(10**9)))
CYCLE_MAX_STEPS = int(os.getenv("OVERSHOOT_CYCLE_MAX_STEPS", str(10**6)))
CHUNK_SIZE = int(os.getenv("OVERSHOOT_CHUNK_SIZE", str(2**20)))
# Upper bound on walkers x steps held in memory by one vectorized block
BLOCK_ELEMENTS = int(os.getenv("OVERSHOOT_BLOCK_ELEMENTS", str(2**20)))

# =============================================================================
# NUMERICAL TOLERANCES
# =============================================================================
ROW_SUM_TOL = float(os.getenv("ROW_SUM_TOL", "1e-12"))
DERIVED_ROW_SUM_TOL = float(os.getenv("DERIVED_ROW_SUM_TOL", "1e-10"))
STATIONARY_TOL = float(os.getenv("STATIONARY_TOL", "1e-12"))
RESIDUAL_TOL = float(os.getenv("RESIDUAL_TOL", "1e-10"))
KAC_TOL = float(os.getenv("KAC_TOL", "1e-11"))
SUPPORT_THRESHOLD = float(os.getenv("SUPPORT_THRESHOLD", "1e-14"))
MAX_CHAIN_STATES = int(os.getenv("MAX_CHAIN_STATES", "2000"))
PRODUCT_STATE_CAP = int(os.getenv("PRODUCT_STATE_CAP", str(10**4)))
PMF_SUM_TOL = 1e-12
MEAN_ZERO_TOL = 1e-12

# Quadrature and inverse-CDF sampling
QUAD_ABS_TOL = float(os.getenv("QUAD_ABS_TOL", "1e-10"))
QUAD_REL_TOL = float(os.getenv("QUAD_REL_TOL", "1e-12"))
MOMENT_REL_TOL = float(os.getenv("MOMENT_REL_TOL", "1e-8"))
BISECTION_TOL = float(os.getenv("BISECTION_TOL", "1e-12"))

# =============================================================================
# STATISTICAL THRESHOLDS
# =============================================================================
# KS thresholds are KS_CRITICAL / sqrt(N) for exact-null tests
KS_CRITICAL = float(os.getenv("KS_CRITICAL", "1.95"))
CLT_KS_THRESHOLD = float(os.getenv("CLT_KS_THRESHOLD", "0.05"))
PERKINS_KS_THRESHOLD = float(os.getenv("PERKINS_KS_THRESHOLD", "0.06"))
LLN_REL_TOL = float(os.getenv("LLN_REL_TOL", "0.05"))
OCCUPATION_REL_TOL = float(os.getenv("OCCUPATION_REL_TOL", "0.02"))
UPCROSSING_REL_TOL = float(os.getenv("UPCROSSING_REL_TOL", "0.02"))
HOPF_REL_TOL = float(os.getenv("HOPF_REL_TOL", "0.1"))
MULTINOMIAL_SIGMAS = float(os.getenv("MULTINOMIAL_SIGMAS", "3.0"))

# =============================================================================
# OUTPUT
# =============================================================================
OUTPUT_DIR = os.getenv("OVERSHOOT_OUTPUT_DIR", "reports")
DUMP_LIMIT = int(os.getenv("OVERSHOOT_DUMP_LIMIT", str(10**5)))
CSV_FLOAT_FORMAT = "%.17g"
LOG_LEVEL = os.getenv("OVERSHOOT_LOG_LEVEL", "WARNING")
