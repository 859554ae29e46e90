"""Configuration and constants for the graph-sequence toolkit"""
import os
from dotenv import load_dotenv

load_dotenv()

# Logging
LOG_LEVEL = os.getenv("GSM_LOG_LEVEL", "INFO").upper()
LOG_JSON = os.getenv("GSM_LOG_JSON", "false").lower() == "true"

# CLI defaults
DEFAULT_SEED = int(os.getenv("GSM_SEED", 0))
DEFAULT_OUT_DIR = os.getenv("GSM_OUT_DIR", "out")

# Graphs
UNREACHABLE = -1  # Distance sentinel for integer outputs (shortest paths, PE)
REGULAR_RETRY_FACTOR = 100  # Pairing-model attempts = factor * n
COLOR_WALK_STEP_FACTOR = 100  # Random-walk coloring gives up after factor * n^3 steps
RED = 1
BLUE = 0

# Local encoding
DEGREE_ONE_HOT_CAP = 16  # Fallback features: one-hot of min(degree, cap)
MAX_PATTERN_NODES = 5

# Sequence models
FINITE_DIFF_STEP = 1e-5
JACOBIAN_REL_TOL = 1e-4
MONOTONE_TOL = 1e-9
SENSITIVITY_RATIO_BAND = 100.0
WITNESS_OUTPUT_TOL = 1e-12

# Mixture of Tokenization - only per-node tokenizers can be routed
MOT_CANDIDATES = ("node", "khop", "hac-dfs")

# Verification suites (acceptance sizes; GSM_VERIFY_SCALE shrinks them for quick runs)
VERIFY_SCALE = float(os.getenv("GSM_VERIFY_SCALE", 1.0))


def suite_size(full_size: int) -> int:
    """Scale an acceptance-size instance count, never below 1"""
    return max(1, int(round(full_size * VERIFY_SCALE)))


VERIFY_STREAM_EXHAUSTIVE_MAX_EDGES = int(os.getenv("GSM_STREAM_MAX_EDGES", 7))
VERIFY_STREAM_EXHAUSTIVE_NODES = 5
VERIFY_STREAM_RANDOM_INSTANCES = 1000
VERIFY_STREAM_MAX_NODES = 200
VERIFY_CONNECTIVITY_ORACLE_INSTANCES = 1000
VERIFY_HYBRID_INSTANCES = 100
VERIFY_MOTIF_INSTANCES = 200
VERIFY_HAC_DEPTH_INSTANCES = 500
VERIFY_HAC_MST_INSTANCES = 100
VERIFY_HAC_PE_INSTANCES = 50
VERIFY_LOCALITY_TRIALS = 100
VERIFY_LOCALITY_MIN_WINS = 95
VERIFY_COLOR_COUNT_INSTANCES = 1000
VERIFY_ATTENTION_INSTANCES = 100
SENSITIVITY_LENGTHS = (8, 16, 32)
SENSITIVITY_STATE_WIDTH = 4
