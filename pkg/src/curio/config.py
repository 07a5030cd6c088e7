"""Configuration management helpers for the curio simulator."""

from functools import lru_cache
from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


def resolve_path(path_value: Path) -> Path:
    """Expand user/home references and resolve relative paths."""

    expanded = path_value.expanduser()
    if expanded.is_absolute():
        return expanded.resolve()
    return (Path.cwd() / expanded).resolve()


class Settings(BaseSettings):
    """Runtime configuration loaded from `CURIO_*` environment variables or `.env`."""

    model_config = SettingsConfigDict(
        env_prefix="CURIO_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    seed: int | None = Field(
        default=None, ge=0, lt=2**64, description="Default seed when --seed is not given"
    )
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = Field(
        default="INFO", description="Root log level"
    )
    log_json: bool = Field(default=True, description="Emit structured JSON log lines")
    default_check_every: int = Field(
        default=5, ge=1, description="Loyalty-check cadence for scenarios that omit it"
    )
    default_grant_probability: float = Field(
        default=0.5, ge=0.0, le=1.0, description="Trust grant probability for players that omit it"
    )
    verify_workers: int = Field(
        default=1, ge=1, description="Process pool size for exhaustive verification"
    )
    ba_sample_count: int = Field(
        default=100_000, ge=1, description="Randomized traitor strategies sampled per agreement check"
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return cached application settings."""

    return Settings()
