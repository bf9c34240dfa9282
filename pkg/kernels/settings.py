"""
Run configuration.

Values come from the environment (prefix ``KERNELS_``) or a local ``.env``
file; CLI flags override them per run.  Identical configuration yields
bit-identical outputs.

    KERNELS_SEED=7 KERNELS_PRIME=2305843009213693951 matroid-kernels solve-dpc ...
"""
from __future__ import annotations

import logging
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from kernels.errors import ConfigurationError

logger = logging.getLogger(__name__)

MERSENNE_61 = (1 << 61) - 1


class RunConfig(BaseSettings):
    """Seed, field and oracle caps shared by the CLI and the self-test."""

    seed: int = Field(default=0, ge=0, lt=1 << 64, description="64-bit unsigned seed")
    prime: int = Field(default=MERSENNE_61, description="Field characteristic")
    epsilon: float = Field(
        default=2.0 ** -20, gt=0.0, lt=1.0,
        description="Failure target for compress-dpc",
    )
    oracle_max_vertices: int = Field(default=10, ge=1)
    oracle_max_k: int = Field(default=3, ge=0)
    oracle_max_candidates: int = Field(default=1 << 20, ge=1)
    output: Optional[str] = Field(default=None, description="Output path prefix")

    model_config = SettingsConfigDict(
        env_prefix="KERNELS_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


_settings: Optional[RunConfig] = None


def get_settings() -> RunConfig:
    """Returns the singleton settings instance."""
    global _settings
    if _settings is None:
        try:
            _settings = RunConfig()
        except Exception as exc:
            raise ConfigurationError(f"invalid KERNELS_* environment: {exc}") from exc
        logger.debug("settings loaded: seed=%d prime=%d", _settings.seed, _settings.prime)
    return _settings


def reset_settings() -> None:
    """Forget the cached instance so the environment is read again."""
    global _settings
    _settings = None
