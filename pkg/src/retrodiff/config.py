from __future__ import annotations

import os
from enum import StrEnum
from functools import lru_cache
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from retrodiff.errors import ConfigError

OUTPUT_DIR_ENV = "RETRODIFF_OUTPUT_DIR"

DEFAULT_ENSEMBLE_PAD_LIMITS = (20, 30, 40, 50, 60, 70, 80, 90)


class RunMode(StrEnum):
    VARIANT_PAD = "variant-pad"
    BASELINE_LENGTH = "baseline-length"
    ORACLE_LENGTH = "oracle-length"


class LengthDecoding(StrEnum):
    ARGMAX = "argmax"
    SAMPLE = "sample"


class MSEReading(StrEnum):
    SQUARED_ERROR = "squared-error"
    SQUARED_TERMS = "squared-terms"


class TimestepSampling(StrEnum):
    UNIFORM = "uniform"
    LOSS_SECOND_MOMENT = "loss-second-moment"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="RETRODIFF_",
        extra="forbid",
    )

    train_path: str = ""
    valid_path: str = ""
    test_path: str = ""
    output_dir: str = "runs"

    layers: int = 2
    heads: int = 2
    d_model: int = 64
    d_ff: int = 128
    max_len: int = 160
    length_bound: int = 64
    steps: int = 50
    pad_limit: int = 20
    dropout: float = 0.1

    lambda_mse: float = 1.0
    lambda_len: float = 1.0
    mse_reading: MSEReading = MSEReading.SQUARED_ERROR
    timestep_sampling: TimestepSampling = TimestepSampling.LOSS_SECOND_MOMENT

    seed: int = 0
    epochs: int = 10
    batch_size: int = 16
    learning_rate: float = 1e-4
    mode: RunMode = RunMode.VARIANT_PAD
    augment_factor: int = 1
    ensemble_pad_limits: list[int] = Field(default_factory=list)

    n_aug: int = 20
    samples_per_aug: int = 1
    length_decoding: LengthDecoding = LengthDecoding.ARGMAX

    log_level: str = "INFO"
    progress: bool = False
    otel_exporter_otlp_endpoint: str = ""
    otel_service_name: str = "retrodiff"

    @field_validator("ensemble_pad_limits", mode="before")
    @classmethod
    def _split_pad_limits(cls, value: Any) -> Any:
        if isinstance(value, str):
            if value.strip().lower() == "default":
                return list(DEFAULT_ENSEMBLE_PAD_LIMITS)
            return [int(part) for part in value.replace(" ", "").split(",") if part]
        return value

    @property
    def effective_pad_limit(self) -> int:
        # Baseline-length runs train on the true delta with no random pads.
        if self.mode == RunMode.BASELINE_LENGTH:
            return 0
        return self.pad_limit


def load_settings(path: str | Path) -> Settings:
    """Build settings from a flat ``key=value`` config file.

    Keys are field names of :class:`Settings`. The ``RETRODIFF_OUTPUT_DIR``
    environment variable always wins over the file's ``output_dir``.
    """
    if not Path(path).is_file():
        raise ConfigError(f"config file {path} does not exist")
    raw = dotenv_values(path)
    values = {key.strip().lower(): value for key, value in raw.items() if value is not None}
    valid = sorted(Settings.model_fields)
    unknown = sorted(set(values) - set(valid))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; valid keys are {valid}")
    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        values["output_dir"] = override
    try:
        return Settings(**values)
    except ValidationError as exc:
        raise ConfigError(f"invalid config file {path}: {exc}") from exc


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
