# config.py
import os
from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("RIF_LOG_LEVEL", "INFO")
DEFAULT_OUT_DIR = os.getenv("RIF_OUT_DIR", "output")
DEFAULT_JOBS = int(os.getenv("RIF_JOBS", "1"))

# Units: c = 1 with lengths in micrometres, so time is measured in um/c (~3.336 fs)
# and frequencies in rad per um/c.
LIGHT_SPEED = 1.0

# Three-term fused-silica Sellmeier fit (Malitson). 4*pi*kappa_i = B_i and
# Omega_i = 2*pi*c / lambda_i.
MEDIUM_PRESETS = {
    "fused_silica": {
        "B": (0.6961663, 0.4079426, 0.8974794),
        "wavelengths_um": (0.0684043, 0.1162414, 9.896161),
    },
}

# Sweep defaults
DEFAULT_DELTA_N = 2e-6
DEFAULT_U_OVER_C = 2.0 / 3.0
DEFAULT_OMEGA_MIN = 0.05
DEFAULT_OMEGA_MAX = 0.8
DEFAULT_POINTS = 2000
DEFAULT_DENSIFICATION = 10.0
DEFAULT_FAILURE_BUDGET = 0.01

# Numerical tolerances
TOL_IMAG = 1e-8              # |Im k| below this is a propagating mode (rad/um)
POLE_GUARD = 1e-6            # refuse n(Omega) this close to a resonance
EDGE_TOLERANCE = 1e-10       # relative distance treated as "on" a critical frequency
EDGE_NUDGE = 1e-8            # relative displacement applied by the grid generator
CRITICAL_EXCLUSION = 1e-6    # |omega - omega_c| < this * omega_c is not evaluated
ROOT_RESIDUAL_TOL = 1e-9
NEWTON_MAX_ITER = 60
GROUP_VELOCITY_TOL = 1e-10
CONDITION_LIMIT = 1e12
UNITARITY_FAIL = 1e-6
EXTENDED_NEWTON_STEPS = 3      # long-double polish of each wavenumber before matching
REFINEMENT_SWEEPS = 4          # mixed-precision refinement of the matching solve
J_OVERSHOOT = 1e-9
UNCERTAINTY_SLACK = 1e-9

# Degree-of-entanglement calibration: photon numbers N = 2*pi*phi in the denominator and the LN
# expressed in log base sqrt(e), i.e. twice the natural-log value.
FLUX_CONVENTION = "photon_number"
LN_CALIBRATION_SCALE = 2.0

# Tag order used for bases, CSV columns and heatmap axes
TAG_ORDER = ("no", "uo", "mo", "lo", "c", "ul", "nl", "ll", "nul")
# IR-band modes that only appear for slow fronts, listed after the canonical tags
SLOW_FRONT_TAGS = ("hl", "ml")
