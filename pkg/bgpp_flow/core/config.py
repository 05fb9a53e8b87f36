from pathlib import Path
import os

# Base paths
BASE_DIR = Path(__file__).resolve().parents[2]
OUTPUTS_DIR = Path(os.environ.get("BGPP_OUTPUTS_DIR", BASE_DIR / "outputs"))
LOGS_DIR = Path(os.environ.get("BGPP_LOGS_DIR", BASE_DIR / "logs"))

# Logging
LOG_FILE = LOGS_DIR / "bgpp.log"
LOG_LEVEL = os.environ.get("BGPP_LOG_LEVEL", "INFO").upper()

# Integrator defaults
REL_TOL = float(os.environ.get("BGPP_REL_TOL", 1e-10))
ABS_TOL = float(os.environ.get("BGPP_ABS_TOL", 1e-12))
MAX_STEPS = int(os.environ.get("BGPP_MAX_STEPS", 200000))
SAMPLE_STRIDE = float(os.environ.get("BGPP_SAMPLE_STRIDE", 0.1))
# Smallest step relative to max(1, |lambda|) before StepFailure
MIN_STEP = float(os.environ.get("BGPP_MIN_STEP", 1e-14))

# Classification tolerances
DEGENERACY_TOL = float(os.environ.get("BGPP_DEGENERACY_TOL", 1e-12))
CASE_TOL = float(os.environ.get("BGPP_CASE_TOL", 1e-9))
SINGULAR_SIN_TOL = float(os.environ.get("BGPP_SINGULAR_SIN_TOL", 1e-10))
ILL_CONDITIONED_K2 = 1.0 - 1e-9

# Quadrature
QUAD_TOL = float(os.environ.get("BGPP_QUAD_TOL", 1e-12))
QUAD_LIMIT = int(os.environ.get("BGPP_QUAD_LIMIT", 500))

# Finite differences
FD_STEP = float(os.environ.get("BGPP_FD_STEP", 1e-6))
MULTICENTRE_STEP = float(os.environ.get("BGPP_MULTICENTRE_STEP", 1e-5))

# Verification sampler
DEFAULT_SEED = int(os.environ.get("BGPP_SEED", 20240229))
DEFAULT_SAMPLES = int(os.environ.get("BGPP_SAMPLES", 100))

# Pass/fail thresholds used by the verify command
VERIFY_TOLERANCES = {
    "bracket": 1e-9,
    "jacobi": 1e-9,
    "rank_sigma": 1e-8,
    "analytic": 1e-6,
    "multicentre": 1e-6,
    "multicentre_order": 1.8,
    "eh_tau": 1e-9,
    "eh_limit": 1e-10,
    "special": 1e-11,
    "special_quad": 1e-10,
    "drift_factor": 100.0,
    "reversibility": 1e-8,
}

# Output
CSV_FLOAT_FORMAT = "%.17g"
OUTPUT_FORMATS = ("csv", "json")


# Ensure directories exist at runtime
def ensure_dirs():
    for p in (OUTPUTS_DIR, LOGS_DIR):
        p.mkdir(parents=True, exist_ok=True)
