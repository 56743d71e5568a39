"""
Environment-driven settings for asympl.

Values come from the process environment, optionally seeded from a `.env`
file, and can be overridden per invocation by CLI flags.
"""

import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator


load_dotenv()


class Settings(BaseModel):
    """
    Tunables shared by the zero-test, sampling and logging layers.

    EXAMPLE USAGE:
    >>> settings = Settings.from_env()
    >>> settings.zero_samples
    64
    """

    seed: int = 20240601
    zero_samples: int = Field(default=64, ge=1)
    tolerance: float = Field(default=1e-9, gt=0)
    level_points: int = Field(default=3, ge=1)
    log_level: str = "WARNING"
    log_dir: str = "logs"
    log_format: str = "text"
    log_to_file: bool = False

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level '{value}'")
        return value

    @classmethod
    def from_env(cls, seed: Optional[int] = None) -> "Settings":
        """
        Build settings from environment variables.

        Args:
            seed: Explicit seed overriding ASYMPL_SEED (the --seed flag)

        Returns:
            Validated Settings
        """
        values = {
            "seed": seed if seed is not None else os.getenv("ASYMPL_SEED", 20240601),
            "zero_samples": os.getenv("ASYMPL_ZERO_SAMPLES", 64),
            "tolerance": os.getenv("ASYMPL_TOLERANCE", 1e-9),
            "level_points": os.getenv("ASYMPL_LEVEL_POINTS", 3),
            "log_level": os.getenv("LOG_LEVEL", "WARNING"),
            "log_dir": os.getenv("LOG_DIR", "logs"),
            "log_format": os.getenv("LOG_FORMAT", "text").lower(),
            "log_to_file": os.getenv("LOG_TO_FILE", "false").lower() == "true",
        }
        return cls(**values)


DEFAULT_SETTINGS = Settings()
