"""Constants for the mh-metrics package."""

SCHEMA_VERSION = 1

# Numerical tolerances
PROB_TOLERANCE = 1e-12          # |Σ p_ij − 1| for a valid ProbTable
PROB_INPUT_TOLERANCE = 1e-2     # printed probability tables are renormalized within this
TWO_POINT_TOLERANCE = 1e-9      # gc1 + gc2 = 1 for sub-measure inputs
CLAMP_TOLERANCE = 1e-12         # rounding overshoot allowed before clamping to [0, 1]
LAMBDA_LIMIT_TOLERANCE = 1e-8   # |λ| or |λ + ½| below this uses the closed limit form
DEGENERACY_TOLERANCE = 1e-14    # C_i below this: derivative kink at exact MH

# Bayes smoothing (Dirichlet prior, all parameters equal; approximates Haldane)
DEFAULT_ALPHA = 0.0001

# Inference
DEFAULT_CI_LEVEL = 0.95
DEFAULT_FD_STEP = 1e-6
MIN_FD_STEP = 1e-12

ESTIMATOR_AUTO = "auto"
ESTIMATOR_SAMPLE = "sample"
ESTIMATOR_BAYES = "bayes"
ESTIMATORS = [ESTIMATOR_AUTO, ESTIMATOR_SAMPLE, ESTIMATOR_BAYES]

# ProbTable source tags
SOURCE_SAMPLE = "SampleProportion"
SOURCE_BAYES = "BayesSmoothed"
SOURCE_GIVEN = "GivenProbabilities"

# Direction of a level (ties count as improving)
DIRECTION_IMPROVING = "Improving"
DIRECTION_DETERIORATING = "Deteriorating"

# Baseline power-divergence parameters reported by default
DEFAULT_LAMBDAS = [0.0]

# Simulation design
DEFAULT_RHO = 0.2
DEFAULT_CUTOFFS = [-1.2, -0.6, 0.0, 0.6, 1.2]
DEFAULT_TRIALS = 10_000
FULL_TRIALS = 100_000
DEFAULT_SEED = 20240917
DEFAULT_WORKERS = 1
FULL_GRID_D = [round(0.25 * k, 2) for k in range(17)]  # 0.00 … 4.00
FULL_GRID_N = [36, 180, 360, 3600]
SIM_BLOCK_SIZE = 500            # trials per work unit; fixed so results do not depend on workers

# Simulation scenario keys
CONF_D = "d"
CONF_RHO = "rho"
CONF_CUTOFFS = "cutoffs"
CONF_N = "n"
CONF_TRIALS = "trials"
CONF_SEED = "seed"
CONF_CI_LEVEL = "ci_level"

# Bivariate normal quadrature
QUADRATURE_NODES = 96           # Gauss–Legendre nodes per row band
QUADRATURE_TAIL = 10.0          # infinite band ends truncated at ±10 sd

# Environment
ENV_SEED = "MH_METRICS_SEED"

# SVG style keys (style file / CLI config)
CONF_WIDTH = "width"
CONF_HEIGHT = "height"
CONF_MAX_RADIUS = "max_radius"
CONF_FONT_SIZE = "font_size"
CONF_RED = "red"
CONF_BLUE = "blue"
CONF_DASH = "dash"

DEFAULT_WIDTH = 640             # px
DEFAULT_HEIGHT = 640            # px
DEFAULT_MAX_RADIUS = 18.0       # px, radius of the heaviest level
DEFAULT_FONT_SIZE = 11.0        # px
DEFAULT_RED = "#d62728"
DEFAULT_BLUE = "#1f77b4"
DEFAULT_DASH = "4,3"

SVG_MARGIN = 48                 # px around the integrated grid
SVG_DECIMALS = 4                # fixed precision for coordinates
LABEL_DECIMALS = 3

# CLI exit codes
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_INPUT_ERROR = 2
EXIT_MEASURE_UNDEFINED = 3
EXIT_IO_ERROR = 4
