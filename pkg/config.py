"""
config.py — Single Source of Truth
Central constants, tolerances, solver defaults, chart styling, and safe utilities.
"""

import os

VERSION = "0.4.0"

#  Numerical Tolerances
# All relative: homogeneous coordinates carry no scale.
RANK_TOL = 1e-9
INDETERMINACY_TOL = 1e-8
CANONICAL_SIGN_TOL = 1e-9
ESTIMATION_TOL = 1e-9
PGL_TOL = 1e-6
HYPERSURFACE_TOL = 1e-8
CREMONA_TOL = 1e-8
CONTRACTION_TOL = 1e-6
INCIDENCE_TOL = 1e-9

#  Sampling Caps
GENERATION_CAP = 1000
RESAMPLE_CAP = 1000

#  Levenberg–Marquardt Defaults
LM_DAMPING = 1e-3
LM_DAMPING_UP = 10.0
LM_DAMPING_DOWN = 0.5
LM_MAX_ITER = 200
LM_STEP_TOL = 1e-12
LM_RESIDUAL_TOL = 1e-10
LM_FD_STEP = 1e-7

#  Reconstruction
ACCEPT_RESIDUAL = 1e-6
DEFAULT_RESTARTS = 50
POINT_FACTOR_ITERS = 5000
POINT_FACTOR_TOL = 1e-10
POINT_STALL_WINDOW = 200       # alternations between progress checks
POINT_STALL_GAIN = 0.01        # relative improvement required per window
ROUND_TRIP_RATE = 0.9          # seed-battery pass rate for reconstruction
BATTERY_SEEDS = 20

#  Jacobian Rank Check
JACOBIAN_STEP = 1e-5
JACOBIAN_RANK_TOL = 1e-6

#  Correspondences
POINT_EXPANSION = 3
NOISE_SWEEP = [0.0, 1e-8, 1e-6, 1e-4]
NOISE_BOUND_FACTOR = 100.0
NOISE_FLOOR = 1e-8

#  Exit Codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

#  Environment
THREADS_ENV = "GTENSOR_THREADS"
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

#  Acceptance Shapes
# (n, m, alpha) triples exercised by `verify` and the test suite.
ACCEPTANCE_SHAPES = [
    (3, (2, 2), (2, 2)),
    (3, (2, 2, 2), (2, 1, 1)),
    (3, (1, 1, 1, 1), (1, 1, 1, 1)),
    (4, (2, 2, 3), (2, 1, 2)),
]

DEFAULT_SHAPE = (3, (2, 2, 2), (2, 1, 1))

#  Chart Configuration
CHART_TEMPLATE = "plotly_white"
CHART_HEIGHT = 350

CHART_COLORS = [
    "#636EFA",  # Blue
    "#EF553B",  # Red
    "#00CC96",  # Green
    "#AB63FA",  # Purple
    "#FFA15A",  # Orange
    "#19D3F3",  # Cyan
]


def worker_count():
    """Worker cap from GTENSOR_THREADS; anything unusable means one worker."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return value if value >= 1 else 1


#  Safe Math Utilities

def safe_divide(numerator, denominator, default=0.0):
    """Safe division that returns default when denominator is zero or None."""
    try:
        if denominator is None or denominator == 0:
            return default
        return numerator / denominator
    except (TypeError, ZeroDivisionError):
        return default


def relative_to(value, scale, default=float("inf")):
    """|value| / scale, or default when the scale vanishes."""
    return safe_divide(abs(value), scale, default=default)
