"""Constants for the adaptive conditional density estimators."""

import math

# Configuration keys
CONF_EXAMPLE = "example"
CONF_ESTIMATOR = "estimator"
CONF_X = "x"
CONF_N = "n"
CONF_ETA = "eta"
CONF_FX_KNOWN = "fx_known"
CONF_REPLICATIONS = "replications"
CONF_BASE_SEED = "base_seed"
CONF_QUADRATURE_POINTS = "quadrature_points"
CONF_HEAVY_TAILED = "heavy_tailed"
CONF_STRICT_GRID = "strict_grid"
CONF_CLAMP_NONNEG = "clamp_nonneg"
CONF_PER_AXIS = "per_axis"
CONF_PROJECTION_A = "projection_A"
CONF_DEGREE_X = "degree_x"
CONF_DEGREE_Y = "degree_y"
CONF_SIMPLIFIED_PENALTY = "simplified_penalty"
CONF_MARGINAL_GRID_SIZE = "marginal_grid_size"
CONF_MARGINAL_TUNING = "marginal_tuning_constant"
CONF_NEIGHBORHOOD_A = "neighborhood_halfwidth_A"
CONF_NEIGHBORHOOD_POINTS = "neighborhood_grid_points"

# Estimator names
ESTIMATOR_KERNEL = "kernel"
ESTIMATOR_PROJECTION = "projection"
ESTIMATORS = (ESTIMATOR_KERNEL, ESTIMATOR_PROJECTION)

# Gaussian kernel norms (1-d and 2-d product kernel)
GAUSSIAN_L1_NORM = 1.0
GAUSSIAN_SQUARED_L2_NORM_1D = 1.0 / (2.0 * math.sqrt(math.pi))
GAUSSIAN_L2_NORM_1D = math.sqrt(GAUSSIAN_SQUARED_L2_NORM_1D)
GAUSSIAN_L2_NORM_2D = GAUSSIAN_SQUARED_L2_NORM_1D

# Rule of thumb (Silverman)
ROT_FACTOR = 1.06
ROT_IQR_SCALE = 1.34
ROT_EXPONENT = -0.2

# Marginal Goldenshluger-Lepski defaults
DEFAULT_MARGINAL_GRID_SIZE = 10
DEFAULT_MARGINAL_TUNING = 0.5
DEFAULT_NEIGHBORHOOD_A = 1.0
DEFAULT_NEIGHBORHOOD_POINTS = 21
MARGINAL_GRID_SPREAD = 8.0  # grid covers [h_rot / 8, 8 * h_rot]

# Kernel bandwidth grids
DEFAULT_PER_AXIS = 10
MIN_GRID_SAMPLE_SIZE = 8
RELAXED_BANDWIDTH_EXPONENT = 0.9  # smallest bandwidth 1 / n^0.9
RELAXED_BANDWIDTH_MAX = 0.5

# Projection models
DEFAULT_PROJECTION_A = 0.5
DEFAULT_DEGREE_X = 0
DEFAULT_DEGREE_Y = 0
Y_RANGE_PADDING = 0.1  # B = data range widened by 10% on each side
RELAXED_MIN_DIM_X = 1
RELAXED_MIN_DIM_Y = 2
RELAXED_MAX_DIM_X_FRACTION = 0.25  # D_m1 <= n / 4

# Tuning
DEFAULT_ETA = 1.0
MIN_ETA = -1.0

# Monte Carlo risk evaluation
DEFAULT_REPLICATIONS = 100
DEFAULT_BASE_SEED = 0
DEFAULT_QUADRATURE_POINTS = 2048
MIN_QUADRATURE_POINTS = 64
GAUSSIAN_WINDOW_SDS = 8.0
CAUCHY_WINDOW_SCALES = 100.0
CURVE_RESOLUTION_FRACTION = 0.25  # quadrature step <= scale / 4
EVALUATE_CHUNK_SIZE = 1024

# Simulation examples
EX1_VARIANCE_OFFSET = 1.3
EX3_VARIANCE_OFFSET = 1.3
MIXTURE_NORMAL_WEIGHT = 0.75
MIXTURE_EXP_SHIFT = 2.0
MIXTURE_EXP_RATE = 2.0
DESIGN_MIXTURE = ((0.5, 0.0, 1.0 / 9.0), (0.5, 1.0, 1.0 / 4.0))  # (weight, mean, sd)

# CLI
DEFAULT_CURVE_GRID_POINTS = 512
DEFAULT_SWEEP_ETAS = (-0.2, 0.5, 1.0, 2.0, 3.0)
CSV_FLOAT_FORMAT = "{:.6g}"
MANIFEST_FILENAME = "manifest.txt"
CURVE_FILENAME = "curve.tsv"
TRACE_FILENAME = "trace.json"
TABLE_FILENAME = "table.csv"
SWEEP_FILENAME = "sweep.csv"
TABLE_HEADER = (
    "example",
    "estimator",
    "x",
    "n",
    "eta",
    "fx_known",
    "mse_mean",
    "mse_stderr",
    "N",
    "base_seed",
)
