"""
copsens Configuration Management

Uses Pydantic Settings for type-safe configuration from environment variables.
Every variable is read with the ``COPSENS_`` prefix, e.g. ``COPSENS_THREADS=4``.
"""

from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application configuration loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="COPSENS_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )

    # =========================================================================
    # APPLICATION
    # =========================================================================
    APP_NAME: str = "copsens"
    APP_ENV: str = "development"
    LOG_LEVEL: str = "info"
    VERSION: str = "0.1.0"

    # =========================================================================
    # EXECUTION
    # =========================================================================
    THREADS: int = 1
    DEFAULT_SEED: int = 20240601

    # =========================================================================
    # RISK MODEL FITTING
    # =========================================================================
    MAX_NEWTON_ITER: int = 100
    MAX_STEP_HALVINGS: int = 10
    SCORE_TOL: float = 1e-8
    LOGLIK_TOL: float = 1e-9
    SEPARATION_BOUND: float = 30.0

    # =========================================================================
    # DIAGNOSTICS
    # =========================================================================
    POSITIVITY_MIN_COVERAGE: float = 0.80
    SCENT_MAX_RELATIVE_GAP: float = 0.10

    # =========================================================================
    # BOOTSTRAP
    # =========================================================================
    BOOTSTRAP_REPLICATES: int = 1000
    BOOTSTRAP_WARN_FAILURE_FRACTION: float = 0.05
    BOOTSTRAP_MAX_FAILURE_FRACTION: float = 0.50


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()


# Singleton instance for easy import
settings = get_settings()
