"""
Project Configuration

This file centralizes all configurations for the project: directory paths,
numeric defaults for the homology and correlator engines, and the frozen
sign/normalization conventions that every correlator report fingerprints.

Every default that has a command-line flag can be overridden through an
environment variable named ``HODGECOR_<NAME>``.
"""
import hashlib
import json
import math
import os
from pathlib import Path

ENV_PREFIX = "HODGECOR_"

TOOL_VERSION = "0.1.0"
REPORT_SCHEMA_VERSION = "1.0"


def env_override(name: str, default, cast=str):
    """Returns the ``HODGECOR_<name>`` environment value cast with ``cast``, or ``default``."""
    raw = os.environ.get(f"{ENV_PREFIX}{name}")
    if raw is None or raw == "":
        return default
    return cast(raw)


# Project root directory
# Assuming this file is in src/
ROOT_DIR = Path(__file__).parent.parent

# Data, docs and reports directories
DATA_DIR = ROOT_DIR / "data"
REGRESSION_DIR = DATA_DIR / "regression"
DOCS_DIR = ROOT_DIR / "docs"
SCHEMA_DIR = DOCS_DIR / "schemas"
REPORTS_DIR = Path(env_override("REPORTS_DIR", str(ROOT_DIR / "reports")))
LOG_FILE = env_override("LOG_FILE", "hodgecor.log")

# --- Homology Configuration ---

# Number of bicomplex columns assembled when --max-column is not given.
MAX_COLUMN = env_override("MAX_COLUMN", 4, int)

# Total degrees reported when no window is given.
DEGREE_WINDOW = (0, 2)

# --- Green Kernel Certification ---

# Random Gaussian test functions and quadrature points per patch axis of `green check`.
GREEN_FORMS = env_override("GREEN_FORMS", 20, int)
GREEN_RESOLUTION = env_override("GREEN_RESOLUTION", 256, int)
GREEN_WEAK_FORM_THRESHOLD = 1e-3
GREEN_CONTROL_THRESHOLD = 1e-1

# --- Correlator Configuration ---

# Points per axis of each quadrature patch (radial x angular).
RESOLUTION = env_override("RESOLUTION", 64, int)

# Doubling steps allowed before the adaptive quadrature gives up.
MAX_REFINEMENTS = env_override("MAX_REFINEMENTS", 2, int)

# Largest number of tensor-product nodes evaluated for one tree.
QUADRATURE_POINT_BUDGET = env_override("QUADRATURE_POINT_BUDGET", 20_000_000, int)

# Nodes evaluated per shard; shard boundaries never depend on the worker count.
CHUNK_SIZE = 65_536

# Monte-Carlo evaluations per vegas iteration and iteration counts.
SAMPLES = env_override("SAMPLES", 20_000, int)
MC_WARMUP_ITERATIONS = 5
MC_ITERATIONS = 10

SEED = env_override("SEED", 12345, int)
WORKERS = env_override("WORKERS", 1, int)
TOLERANCE = env_override("TOLERANCE", 1e-3, float)

# Default integration method: "quad" or "mc".
METHOD = env_override("METHOD", "quad")

# Tolerance of the complex scalar regime.
COMPLEX_TOLERANCE = 1e-10

# --- Frozen conventions (never change silently: they enter the fingerprint) ---

# D^C = DC_CONSTANT * (D' - D''); with this value (2 pi i)^{-1} D''D' = d d^C.
DC_CONSTANT = 1 / (4j * math.pi)

# G_a(x, y) = GREEN_SCALE * log(d(x,y)^2 / (d(x,a)^2 d(y,a)^2)), d = chordal distance.
GREEN_SCALE = 1.0

# xi averages over permutations: 1/(k+1)!.
XI_NORMALIZATION = "average"

# Coefficient of the fundamental-class generator inserted for the H-factor.
HCAL_COEFFICIENT = 1.0

# Order in which factors are Koszul-sorted for the per-tree sign.
SIGN_RULE = "dfs-preorder-from-side-0"

# Hochschild total degree = shifted cochain degree + HH_DEGREE_OFFSET.
HH_DEGREE_OFFSET = 1


def conventions() -> dict:
    """Returns the convention constants that define correlator values."""
    return {
        "dc_constant": [DC_CONSTANT.real, DC_CONSTANT.imag],
        "green_scale": GREEN_SCALE,
        "green_form": "chordal-log-ratio",
        "xi_normalization": XI_NORMALIZATION,
        "hcal_coefficient": HCAL_COEFFICIENT,
        "sign_rule": SIGN_RULE,
        "bar_signs": "shifted-koszul",
    }


def convention_fingerprint() -> str:
    """Hashes the convention constants; embedded in every correlator report."""
    payload = json.dumps(conventions(), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()
