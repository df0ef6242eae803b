"""Configuration management for the Ishango toolkit."""

from importlib.resources import files
from pathlib import Path
from typing import Literal, Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="ISHANGO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
    )

    # Data
    data_dir: Optional[Path] = Field(
        default=None,
        description="Directory overriding the bundled artifact and numeral data",
    )

    # Geometry defaults
    pitch_mm: float = Field(
        default=2.5,
        gt=0,
        description="Notch pitch used when a group has no measured spacing",
    )
    length_gap_mm: float = Field(
        default=2.0,
        gt=0,
        description="Minimum length gap separating two length classes",
    )
    vertical_gap_mm: float = Field(
        default=3.0,
        gt=0,
        description="Minimum vertical gap marking a subgroup boundary",
    )

    # Null model
    null_workers: int = Field(
        default=1,
        ge=1,
        le=64,
        description="Worker threads used for Monte-Carlo sampling",
    )
    null_chunk_size: int = Field(
        default=4096,
        ge=1,
        le=1_000_000,
        description="Samples drawn per independent random stream",
    )

    # Logging
    log_level: Literal["debug", "info", "warning", "error"] = Field(
        default="info",
        description="Logging level",
    )

    @property
    def resolved_data_dir(self) -> Path:
        """Get the data directory, falling back to the bundled package data."""
        if self.data_dir is not None:
            return Path(self.data_dir)
        return Path(str(files("ishango") / "data"))

    @property
    def artifact_path(self) -> Path:
        """Get the path of the bundled Ishango artifact document."""
        return self.resolved_data_dir / "ishango.json"

    @property
    def numerals_dir(self) -> Path:
        """Get the directory holding numeral system definitions."""
        return self.resolved_data_dir / "numerals"


def get_settings() -> Settings:
    """Get application settings."""
    return Settings()
