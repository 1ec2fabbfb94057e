"""
Configuration settings for the triphoton toolkit.
Every numerical default used by the engines and the CLI lives here and can be
overridden through TRIPHOTON_* environment variables or a .env file.
"""

from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field, field_validator


class Settings(BaseSettings):
    """Toolkit settings with validation"""

    model_config = SettingsConfigDict(
        env_prefix="TRIPHOTON_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Reproducibility
    SEED: Optional[int] = Field(
        default=None,
        description="Seed fallback when a command is given no --seed",
        ge=0,
        le=2**64 - 1
    )

    # Wavepacket model
    SIGMA_PS: float = Field(
        default=1.5,
        description="Default wavepacket coherence width in picoseconds",
        gt=0.0
    )
    GRAM_ZERO: float = Field(
        default=1e-12,
        description="Wavepacket overlaps below this value are treated as exactly zero",
        ge=0.0,
        le=1e-6
    )
    INTEGRATION_TIME_S: float = Field(
        default=60.0,
        description="Integration time per delay-scan sample in seconds",
        gt=0.0
    )

    # Resampling
    RESAMPLES: int = Field(
        default=200,
        description="Default number of Monte Carlo / bootstrap resamples",
        ge=2,
        le=100000
    )
    MAX_FAILURE_FRACTION: float = Field(
        default=0.1,
        description="Largest tolerated fraction of failed resamples",
        ge=0.0,
        le=1.0
    )
    MAX_WORKERS: int = Field(
        default=1,
        description="Thread pool width for curve synthesis and resampling",
        ge=1,
        le=256
    )

    # Fitting
    FIT_MAX_ITER: int = Field(
        default=200,
        description="Iteration cap of the damped Gauss-Newton fit",
        ge=1,
        le=100000
    )
    FIT_TOL: float = Field(
        default=1e-10,
        description="Relative step size below which a fit counts as converged",
        gt=0.0,
        le=1e-3
    )

    # Synthetic count levels
    PAIR_COUNT_LEVEL: float = Field(
        default=1000.0,
        description="Two-photon C(inf) count scale per integration window",
        gt=0.0
    )
    SINGLES_COUNT_LEVEL: float = Field(
        default=10000.0,
        description="Single-photon counts recorded per input mode",
        gt=0.0
    )

    # Permanent size guards
    NAIVE_PERMANENT_LIMIT: int = Field(
        default=8,
        description="Largest matrix order accepted by the permutation-sum permanent",
        ge=1,
        le=10
    )
    RYSER_PERMANENT_LIMIT: int = Field(
        default=30,
        description="Largest matrix order accepted by the Ryser permanent",
        ge=1,
        le=30
    )

    # Logging Settings
    LOG_LEVEL: str = Field(
        default="INFO",
        description="Logging level"
    )
    LOG_FORMAT: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log message format"
    )
    LOG_FILE: Optional[str] = Field(
        default=None,
        description="Log file path"
    )

    @field_validator('LOG_LEVEL')
    @classmethod
    def validate_log_level(cls, v):
        """Validate logging level name"""
        level = str(v).upper()
        if level not in {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG", "NOTSET"}:
            raise ValueError(f"Unknown log level: {v}")
        return level


# Create settings instance
settings = Settings()
