"""
Configuration module for blurreg.

Settings come from the environment (prefix ``BLURREG_``) or a ``.env`` file,
with the defaults below.
"""
from pathlib import Path

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

_LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    """Application settings and numerical defaults."""

    model_config = SettingsConfigDict(
        env_prefix="BLURREG_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    LOG_LEVEL: str = "INFO"

    # Report directory, created on first write
    OUT_DIR: Path = Path("blurreg-out")

    # Quantization
    QUANT_DENOMINATOR: int = 256
    AMPLITUDE_BOUND: int = 256

    # Numerical tolerances
    PPF_TOLERANCE: float = 1e-10
    SIGMA_TOLERANCE: float = 1e-6
    SIGMA_SEARCH_MAX: float = 1e3

    # Threshold scan for the alignment DP
    V_SCAN_DENOMINATOR: int = 512

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Reject log levels loguru does not know."""
        level = v.upper()
        if level not in _LOG_LEVELS:
            raise ValueError(f"Invalid log level '{v}', expected one of {_LOG_LEVELS}")
        return level

    @field_validator("QUANT_DENOMINATOR")
    @classmethod
    def validate_denominator(cls, v: int) -> int:
        """The quantization grid is fixed at 1/256."""
        if v != 256:
            raise ValueError(f"QUANT_DENOMINATOR must be 256, got {v}")
        return v

    @field_validator("AMPLITUDE_BOUND", "V_SCAN_DENOMINATOR")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v <= 0:
            raise ValueError(f"value must be positive, got {v}")
        return v


# Global settings instance
settings = Settings()


def get_settings() -> Settings:
    """Get the current settings instance."""
    return settings
