import os
import logging
from pathlib import Path
from typing import Dict, Any
from dotenv import load_dotenv

# Load environment variables from .env file (optional overrides)
load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parents[1]

logger = logging.getLogger(__name__)


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    return int(raw)


class Config:
    """
    Cayley Tape Configuration
    Search budgets, fuel limits and output locations shared by the CLI and the test suites
    """

    def __init__(self):
        # ==================== Logging Configuration ====================
        self.LOG_LEVEL = os.getenv('CAYLEY_LOG_LEVEL', 'INFO').upper()
        self.LOG_DIR = Path(os.getenv('CAYLEY_LOG_DIR', str(PROJECT_ROOT / 'logs')))

        # ==================== Fixture Locations ====================
        self.FIXTURES_DIR = Path(os.getenv('CAYLEY_FIXTURES_DIR', str(PROJECT_ROOT / 'fixtures')))

        # ==================== Machine Execution ====================
        self.DEFAULT_FUEL = _env_int('CAYLEY_DEFAULT_FUEL', 10000)        # Steps before OutOfFuel
        self.REWRITE_BUDGET = _env_int('CAYLEY_REWRITE_BUDGET', 5000)     # FinitelyPresented search steps

        # ==================== Escape Construction ====================
        self.M_MAX = _env_int('CAYLEY_M_MAX', 64)                         # Largest a^M searched for delta relations
        self.ORDER_PROBE = _env_int('CAYLEY_ORDER_PROBE', 100)            # Powers checked by order_probe
        self.VERIFY_N = _env_int('CAYLEY_VERIFY_N', 2000)                 # Prefix products checked by verify_escape

        # ==================== Free Algebra ====================
        self.IDEAL_DIMENSION_CAP = _env_int('CAYLEY_IDEAL_DIMENSION_CAP', 1 << 20)  # Monomials per degree

        # ==================== Randomized Suites ====================
        self.SEED = _env_int('CAYLEY_SEED', 0)

    def as_dict(self) -> Dict[str, Any]:
        """Snapshot of the active settings (logged at CLI start-up)"""
        return {key: (str(value) if isinstance(value, Path) else value)
                for key, value in vars(self).items()}

    def validate_config(self) -> bool:
        """
        Validate configuration parameter sanity
        """
        try:
            if self.LOG_LEVEL not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
                raise ValueError(f"CAYLEY_LOG_LEVEL must be a logging level name, got {self.LOG_LEVEL}")

            if self.DEFAULT_FUEL < 0:
                raise ValueError("CAYLEY_DEFAULT_FUEL must be non-negative")

            if self.REWRITE_BUDGET <= 0:
                raise ValueError("CAYLEY_REWRITE_BUDGET must be positive")

            if self.M_MAX < 0 or self.ORDER_PROBE < 0 or self.VERIFY_N < 0:
                raise ValueError("CAYLEY_M_MAX, CAYLEY_ORDER_PROBE and CAYLEY_VERIFY_N must be non-negative")

            if self.IDEAL_DIMENSION_CAP <= 0:
                raise ValueError("CAYLEY_IDEAL_DIMENSION_CAP must be positive")

            return True

        except ValueError as e:
            logger.error(f"Configuration validation failed: {e}")
            return False
