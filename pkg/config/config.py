import logging
import os
from pathlib import Path

from decouple import config

from schemas.schema import SolverConfig

# ---------------- Setup ----------------
BASE_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = BASE_DIR / "data"
DATASETS_PATH = DATA_DIR / "datasets.json"
REFERENCE_PATH = DATA_DIR / "reference_values.json"

ROOT_TOL = config("FNLSE_ROOT_TOL", default=1e-10, cast=float)
MAX_ITER = config("FNLSE_MAX_ITER", default=200, cast=int)
N_LOWER_OFFSET = config("FNLSE_N_LOWER_OFFSET", default=1e-6, cast=float)
N_UPPER = config("FNLSE_N_UPPER", default=1e7, cast=float)
FALLBACK = config("FNLSE_FALLBACK", default=True, cast=bool)
WORKERS = config("FNLSE_WORKERS", default=1, cast=int)
LOG_LEVEL = config("FNLSE_LOG_LEVEL", default="WARNING")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def default_solver_config(**overrides) -> SolverConfig:
    """Solver settings from the environment / .env, with explicit overrides on top."""
    settings = {
        "root_tol": ROOT_TOL,
        "max_iter": MAX_ITER,
        "n_lower_offset": N_LOWER_OFFSET,
        "n_upper": N_UPPER,
        "fallback": FALLBACK,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    return SolverConfig(**settings)


def default_workers() -> int:
    return max(1, min(WORKERS, os.cpu_count() or 1))


def setup_logging(level: str | int | None = None) -> None:
    level = level or LOG_LEVEL
    if isinstance(level, str):
        level = level.upper()
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)
