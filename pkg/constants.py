"""
Configuration constants for the rcvf kernel.
This module contains all configurable parameters for the symbolic algorithms,
the quantifier elimination guards and the numeric cross-check oracle.
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

# Service metadata
SERVICE_NAME = os.getenv("SERVICE_NAME", "rcvf-kernel")
SERVICE_VERSION = os.getenv("SERVICE_VERSION", "0.3.0")

# Logging configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING")
LOG_FORMAT = os.getenv("LOG_FORMAT", "text")  # "json" or "text"

# Randomized harness sampling
RCVF_SEED = int(os.getenv("RCVF_SEED", "20240601"))

# Quantifier elimination guards
MAX_BRANCHES = int(os.getenv("MAX_BRANCHES", "100000"))
DNF_SIZE_LIMIT = int(os.getenv("DNF_SIZE_LIMIT", "200000"))
STRICT_Z_COEFFICIENTS = os.getenv("STRICT_Z_COEFFICIENTS", "false").lower() == "true"

# M-complete enumeration guard: m * (2M + 1)^m forms at most
M_COMPLETE_LIMIT = int(os.getenv("M_COMPLETE_LIMIT", "10000"))

# Numeric oracle settings
ORACLE_T0_EXPONENTS = [
    int(e) for e in os.getenv("ORACLE_T0_EXPONENTS", "16,32").split(",") if e.strip()
]
ORACLE_MAX_T0_EXPONENT = int(os.getenv("ORACLE_MAX_T0_EXPONENT", "64"))
ORACLE_TOLERANCE = float(os.getenv("ORACLE_TOLERANCE", "0.1"))
# Roots, gaps and values are refined to relative accuracy 2 ** -ORACLE_PRECISION_EXPONENT
ORACLE_PRECISION_EXPONENT = int(os.getenv("ORACLE_PRECISION_EXPONENT", "12"))

# Output settings
DEFAULT_OUTPUT_FORMAT = os.getenv("DEFAULT_OUTPUT_FORMAT", "text")
SUPPORTED_OUTPUT_FORMATS = ["text", "json"]
