"""Process settings for compacta.

Typed, 12-factor settings via Pydantic v2. Values come from the environment
(prefix ``COMPACTA_``) or a local ``.env`` file. These are process-wide knobs
(logging, thread pool size, documented defaults); per-run parameters live in
`app.application.pipeline.dto.PipelineConfig`. No I/O or side effects at import.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    # --- Pydantic model config  ---
    model_config = SettingsConfigDict(
        env_prefix="COMPACTA_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # --- Logging ---
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO", description="Python logging verbosity level."
    )

    @property
    def log_level_int(self) -> int:
        """Return stdlib logging level as int (e.g., logging.INFO)."""
        return getattr(logging, self.log_level, logging.INFO)

    # --- Execution ---
    workers: int = Field(
        default=1,
        ge=1,
        description="Threads used to slice independent records concurrently.",
    )

    # --- Documented run defaults (filled in by validate_config) ---
    default_eta: float = Field(
        default=0.5,
        ge=0.0,
        le=1.0,
        description="Probability the mode must reach before it replaces the mean.",
    )
    default_epsilon: float = Field(
        default=1e-9,
        gt=0.0,
        description="Zero-division guard added to MAER reference values.",
    )
    default_k_sigma: float = Field(
        default=3.0,
        gt=0.0,
        description="Width of the upper control limit in population standard deviations.",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Process-wide singleton Settings."""
    return Settings()
