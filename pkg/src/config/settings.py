# src/config/settings.py
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class Settings:
    """Runtime knobs read from the environment (or a .env file)"""

    brute_force_cap: int = 16
    setcover_cap: int = 20
    rank_tolerance: float = 1e-9
    rank_trials: int = 3
    log_level: str = "INFO"
    log_file: Optional[str] = None

    def __post_init__(self):
        if self.brute_force_cap < 1:
            raise ValueError("Brute-force cap must be at least 1")
        if self.setcover_cap < 1:
            raise ValueError("Set-cover cap must be at least 1")
        if self.rank_tolerance < 0:
            raise ValueError("Rank tolerance cannot be negative")
        if self.rank_trials < 1:
            raise ValueError("Rank trials must be at least 1")


def get_settings() -> Settings:
    """Build settings from GSIO_* environment variables

    Returns:
        Settings instance with defaults for every unset variable

    Raises:
        ValueError: If a variable is set to an unusable value
    """
    return Settings(
        brute_force_cap=int(os.getenv("GSIO_BRUTE_FORCE_CAP", "16")),
        setcover_cap=int(os.getenv("GSIO_SETCOVER_CAP", "20")),
        rank_tolerance=float(os.getenv("GSIO_RANK_TOLERANCE", "1e-9")),
        rank_trials=int(os.getenv("GSIO_RANK_TRIALS", "3")),
        log_level=os.getenv("GSIO_LOG_LEVEL", "INFO"),
        log_file=os.getenv("GSIO_LOG_FILE") or None,
    )
