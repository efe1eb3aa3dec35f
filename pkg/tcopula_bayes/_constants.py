NU_MIN = 1.0
NU_MAX = 100.0

QUAD_REL_TOL = 1e-9
QUAD_ABS_TOL = 0.0
QUAD_MAX_PANELS = 2000
QUAD_GRID_POINTS = 21
QUAD_INITIAL_PANELS = 4

DENSITY_CHUNK_SIZE = 2048

NELDER_MEAD_XATOL = 1e-5
NELDER_MEAD_FATOL = 1e-8
NELDER_MEAD_MAXITER = 2000

TARGET_ACCEPTANCE = 0.234
ACCEPTANCE_BAND = (0.15, 0.35)
TUNE_WINDOW = 100
TUNE_SWEEPS = 10000
TUNE_CHECK_SWEEPS = 1000
BURN_SWEEPS = 20000
SAMPLE_SWEEPS = 100000

BATCH_COUNT = 50
AUTOCORR_CUTOFF = 0.01
AUTOCORR_MAX_LAG = 1000

IMPORTANCE_T_DOF = 5.0
IMPORTANCE_MASS_DRAWS = 100000

CVAR_MIN_SIMS = 10000
CVAR_MIN_EXCEEDANCES = 100
CVAR_BATCH_SIZE = 65536

GARCH_MIN_LENGTH = 100
RESIDUAL_VARIANCE_BAND = (0.5, 2.0)
CORR_CLAMP = 1.0 - 1e-10
PD_EIGEN_FLOOR = 1e-8

MISSING_TOKENS = ("", "ND", "NA", "N/A")

# run file section holding "section.key" overrides given on the command line
CLI_SECTION = "cli"
FLOAT_FORMAT = "%.17g"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_CONVERGENCE = 4
EXIT_PARTIAL = 5
