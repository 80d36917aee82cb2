"""
Runtime configuration for ArmHold.

Values come from the environment, optionally seeded by a .env file at the
repository root. See .env.example for the full list of keys.
"""

import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

env_path = Path(__file__).parent.parent.parent / ".env"
load_dotenv(dotenv_path=env_path)


def _float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")


# Output
OUTPUT_DIR = os.getenv("ARMHOLD_OUTPUT_DIR", os.path.join("data", "runs"))

# Parallel comparison runs (1 = sequential)
WORKERS = max(1, int(_float("ARMHOLD_WORKERS", 2)))

# Numerical thresholds
SINGULAR_CONDITION = _float("ARMHOLD_SINGULAR_COND", 1e8)
DAMPING = _float("ARMHOLD_DAMPING", 1e-6)
RANK_TOL = _float("ARMHOLD_RANK_TOL", 1e-8)
DIVERGENCE_LIMIT = _float("ARMHOLD_DIVERGENCE_LIMIT", 1e3)

# Simulation defaults
DEFAULT_DT = 1e-3
DEFAULT_GRAVITY = (0.0, 0.0, -9.81)

# Logging
LOG_LEVEL = os.getenv("ARMHOLD_LOG_LEVEL", "INFO").upper()
DEBUG = os.getenv("DEBUG", "False").lower() == "true"


def setup_logging(level: Optional[str] = None) -> None:
    """Configure the root logger once. Library modules only call getLogger."""
    if DEBUG:
        level = "DEBUG"
    level = (level or LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(message)s",
    )
