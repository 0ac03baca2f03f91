"""
Конфигурация приложения.
Загрузка переменных окружения.
"""

import os
from typing import Literal, Optional

from pydantic_settings import BaseSettings
from pydantic import Field


class Settings(BaseSettings):
    """Настройки приложения."""

    # Database
    database_url: Optional[str] = Field(
        default=None,
        description="Database URL (SQLite file under backend/data when empty)",
        validation_alias="DATABASE_URL",
    )

    # Batch runner
    threads: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        ge=1,
        description="Worker threads for batch cells",
        validation_alias="CQ_THREADS",
    )
    output_dir: str = Field(default="results", description="Default batch output directory")
    record_runtime: bool = Field(default=True, description="Write wall-clock ms into result rows")

    # k-means
    default_seed: int = Field(default=20240101, ge=0, description="Default RNG seed", validation_alias="CQ_SEED")
    max_iterations: int = Field(default=200, ge=1, description="Hartigan-Wong iteration cap")
    restarts: Optional[int] = Field(
        default=None, ge=1, description="Restart override (10 for k<=64, 3 above when empty)"
    )
    scaling: Literal["fixed", "minmax"] = Field(default="fixed", description="Component scaling to [0,1]")

    # Metrics / statistics
    vif_mode: Literal["luminance", "channels"] = Field(default="luminance", description="VIF plane selection")
    exclude_achromatic: bool = Field(default=False, description="Drop C=0 pixels from hue statistics")
    stats_subsample: bool = Field(default=False, description="Subsample very large images for statistics")
    stats_subsample_threshold: int = Field(default=40_000_000, ge=1)
    stats_subsample_size: int = Field(default=10_000_000, ge=1)

    # App settings
    debug: bool = Field(default=False, description="Debug mode")
    log_level: str = Field(default="INFO", description="Logging level")

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"
        case_sensitive = False
        populate_by_name = True
        extra = "ignore"


# Singleton instance
settings = Settings()
