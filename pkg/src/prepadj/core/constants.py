"""Default numerical settings and constants."""

import math

# Probability clipping before any logit transform
PROB_CLIP = 1e-6

# Categorical level used for missing and unseen values
MISSING_LEVEL = "__missing__"

# Reporting
DEFAULT_REFERENCE_GROUP = "White"
Z_95 = 1.96
LOW_COUNT_THRESHOLD = 10

# Holdout / cross-validation
DEFAULT_TRAIN_FRACTION = 0.9
DEFAULT_FOLDS = 5

# Boosted trees
MAX_BINS = 256
DEFAULT_ROUNDS = 300
DEFAULT_PATIENCE = 30
DEFAULT_REG_LAMBDA = 1.0
DEFAULT_GRID: dict[str, list[float]] = {
    "max_depth": [2, 4, 6],
    "eta": [0.05, 0.1, 0.3],
    "min_child_weight": [1.0, 10.0],
    "gamma": [0.0, 1.0],
    "max_delta_step": [0.0, 1.0],
}
MODEL_FORMAT = "prepadj.boosted-trees"
MODEL_FORMAT_VERSION = 1

# IRLS
IRLS_MAX_ITER = 100
IRLS_DEVIANCE_TOL = 1e-10
IRLS_GRADIENT_TOL = 1e-8
IRLS_STEP_TOL = 1e-6
SEPARATION_BOUND = 30.0
RIDGE_FALLBACK = 1e-6
RANK_TOL = 1e-9

# Bootstrap
DEFAULT_REPLICATES = 100
MAX_REDRAWS = 5

# Sensitivity analysis
DEFAULT_THETA = math.log(3)
DEFAULT_Q_STEP = 0.1
THETA_CAP_TOL = 1e-12
DISCRIMINANT_EPS = 1e-12
BISECTION_BRACKET = 40.0
THETA_FLOOR_ODDS = 2
THETA_SLACK = 0.1

# Canonical column names inside a CohortTable
UNIT_ID = "unit_id"
GROUP = "group"
STRATUM = "stratum"
DECISION = "decision"
ASSESSED = "assessed"
PASSED = "passed"
COHORT = "cohort"
ROLE_COLUMNS = (UNIT_ID, GROUP, STRATUM, DECISION, ASSESSED, PASSED, COHORT)

# Derived columns added for regressions
MU = "mu"
WEIGHT = "weight"
U = "u"
FRACTIONAL_OUTCOME = "fractional_outcome"
MU_TILDE = "mu_tilde"

# Output artifact names
MODEL_FILE = "model.json"
MU_FILE = "mu.csv"
FITS_FILE = "fits.json"
FIT_TABLE_FILE = "fit_table.csv"
BOOTSTRAP_FILE = "bootstrap.json"
INFORMATION_FILE = "information.csv"
CALIBRATION_GROUP_FILE = "calibration_group.csv"
CALIBRATION_STRATUM_FILE = "calibration_stratum.csv"
PROPENSITY_CALIBRATION_FILE = "propensity_calibration.csv"
GRID_FILE = "sensitivity_grid.csv"
BAND_FILE = "sensitivity_band.json"
COHORT_FILE = "cohort.csv"
TRUTH_FILE = "truth.json"
SCHEMA_FILE = "schema.json"
