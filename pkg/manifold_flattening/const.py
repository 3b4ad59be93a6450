"""Constants for the manifold flattening simulator."""

# Manifold kinds
KIND_HALF_CIRCLE = "half_circle"
KIND_SPIRAL = "spiral"
KIND_S_CURVE = "s_curve"
KIND_CSV = "csv"
MANIFOLD_KINDS = (KIND_HALF_CIRCLE, KIND_SPIRAL, KIND_S_CURVE, KIND_CSV)

# Config keys (manifest.json "config" block)
CONF_MANIFOLD = "manifold"
CONF_RADIUS = "r"
CONF_RADIUS_PERCENTILE = "radius_percentile"
CONF_RADIUS_MULTIPLIER = "radius_multiplier"
CONF_K1 = "k1"
CONF_K2 = "k2"
CONF_EPSILON_DIST = "epsilon_dist"
CONF_DT = "dt"
CONF_MAX_STEPS = "max_steps"
CONF_CONVERGE_VEL = "converge_vel"
CONF_CONVERGE_WINDOW = "converge_window"
CONF_MAX_DISP_FRAC = "max_disp_frac"
CONF_SNAPSHOT_EVERY = "snapshot_every"
CONF_OUTPUT_DIR = "output_dir"
CONF_EPSILON_ADHESION = "epsilon_adhesion"
CONF_DIMENSION_THRESHOLD = "dimension_threshold"
CONF_PLOT = "plot"

# Reference experiment parameters
DEFAULT_K1 = 0.1
DEFAULT_K2 = 0.0002
HALF_CIRCLE_RADIUS = 69.0
HALF_CIRCLE_COUNT = 129
HALF_CIRCLE_NEIGHBOR_RADIUS = 3.36
SPIRAL_COUNT = 600
SPIRAL_T_START = -1.0
SPIRAL_T_END = 5.0
SPIRAL_OFFSET = 10.0
SPIRAL_NEIGHBOR_RADIUS = 1.2
S_CURVE_GRID_U = 24
S_CURVE_GRID_V = 15
S_CURVE_SCALE = 10.0

# Reference experiment integration. Explicit Euler stays stable while dt times the
# largest elastic eigenvalue, at most 2 * K1 * (neighbors per point), is below 2.
# The half circle has 2 neighbors per point, the spiral up to 8.
HALF_CIRCLE_DT = 1.0
HALF_CIRCLE_MAX_STEPS = 60_000
SPIRAL_DT = 0.75
SPIRAL_MAX_STEPS = 80_000
EXPERIMENT_SNAPSHOT_EVERY = 1000

# Field and integrator defaults
DEFAULT_EPSILON_DIST = 1e-9
DEFAULT_DT = 0.1
DEFAULT_MAX_STEPS = 50_000
DEFAULT_CONVERGE_VEL = 1e-3
DEFAULT_CONVERGE_WINDOW = 10
DEFAULT_MAX_DISP_FRAC = 0.25
DEFAULT_SNAPSHOT_EVERY = 200

# Neighborhood radius heuristic for inputs without a reference radius
DEFAULT_RADIUS_PERCENTILE = 1.0
DEFAULT_RADIUS_MULTIPLIER = 2.0

# Metrics
DEFAULT_EPSILON_ADHESION = 1e-6
DEFAULT_DIMENSION_THRESHOLD = 0.99

# Plotting
DEFAULT_CANVAS_WIDTH = 800
DEFAULT_CANVAS_HEIGHT = 600
DEFAULT_TOP_AXIS = 2  # top view drops z
DEFAULT_AZIMUTH_DEGREES = -60.0
DEFAULT_ELEVATION_DEGREES = 30.0
ARROW_CANVAS_FRACTION = 0.06

# Persistence
MANIFEST_FILE = "manifest.json"
METRICS_FILE = "metrics.json"
ACCEPTANCE_FILE = "acceptance.json"
SNAPSHOT_TEMPLATE = "snapshot_{step:06d}.csv"
SNAPSHOT_GLOB = "snapshot_*.csv"
PLOTS_DIR = "plots"
CSV_SIGNIFICANT_DIGITS = 17

# Termination reasons
TERMINATION_CONVERGED = "converged"
TERMINATION_BUDGET = "step_budget_exhausted"
TERMINATION_INSTABILITY = "instability"

# Exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INSTABILITY = 3

# Acceptance calibration
ACCEPT_HALF_CIRCLE_FLATNESS = 0.05
ACCEPT_HALF_CIRCLE_RMS = 0.10
ACCEPT_HALF_CIRCLE_MIN_DISTANCE_FRACTION = 0.5
ACCEPT_SPIRAL_FLATNESS = 0.10
ACCEPT_SPIRAL_EXTENT_DIP = 0.01
ACCEPT_S_CURVE_FLATNESS = 0.10
ACCEPT_S_CURVE_RMS = 0.15

# Run directory used when none is given
DEFAULT_OUTPUT_DIR = "flattening-run"

VERSION = "1.0.0"
