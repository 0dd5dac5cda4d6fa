#!/usr/bin/env python3
"""
DKPP Configuration Module
Centralized configuration and environment variable loading.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Get project root directory
PROJECT_ROOT = Path(__file__).parent
ENV_FILE = PROJECT_ROOT / "dkpp.env"

# Load environment variables
load_dotenv(ENV_FILE)

# Runtime settings
DKPP_THREADS = int(os.getenv('DKPP_THREADS', '1'))
LOG_LEVEL = os.getenv('DKPP_LOG_LEVEL', 'INFO').upper()
OUTPUT_DIR = Path(os.getenv('DKPP_OUTPUT_DIR', str(PROJECT_ROOT / 'runs')))

# Run config schema
CONFIG_SCHEMA = "dkpp-run/1"
SNAPSHOT_MAGIC = b"DKPP"
SNAPSHOT_VERSION = 1

# Solver settings
DEFAULT_TOLERANCE = 1e-10
DEFAULT_MAX_ITER = 200
CONTRACTION_SLACK = 0.05  # Discretization slack on the contraction constant
HORIZON_SAFETY = 0.9
HORIZON_TOLERANCE = 1e-9

# Spectral settings
MIN_POINTS = 8
BOUNDARY_WARN_RATIO = 1e-8
SUPPORT_THRESHOLD = 1e-12
QUADRATURE_RTOL = 1e-8

# Growth and Lipschitz verification sweep
VERIFY_U_RANGE = (-10.0, 10.0)
VERIFY_SAMPLES = 10_000
MIN_VERIFY_SAMPLES = 1_000


def validate_config():
    """Validate that the environment-driven settings are usable."""
    errors = []

    if DKPP_THREADS < 1:
        errors.append(f"DKPP_THREADS must be a positive integer, got {DKPP_THREADS}")

    if LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
        errors.append(f"DKPP_LOG_LEVEL is not a logging level: {LOG_LEVEL}")

    if OUTPUT_DIR.exists() and not OUTPUT_DIR.is_dir():
        errors.append(f"DKPP_OUTPUT_DIR is not a directory: {OUTPUT_DIR}")

    if errors:
        raise ValueError("Configuration errors:\n" + "\n".join(f"  - {e}" for e in errors))

    return True
