from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel, ConfigDict, Field, model_validator

from retrodiff.config import LengthDecoding, RunMode

if TYPE_CHECKING:
    from retrodiff.config import Settings


class ModelConfig(BaseModel):
    """Shape of one encoder-decoder denoiser plus its diffusion settings."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    layers: int = Field(default=2, ge=1)
    heads: int = Field(default=2, ge=1)
    d_model: int = Field(default=64, ge=2)
    d_ff: int = Field(default=128, ge=1)
    num_classes: int = Field(ge=5)
    max_len: int = Field(default=160, ge=2)
    length_bound: int = Field(default=64, ge=1)
    steps: int = Field(default=50, ge=1)
    pad_limit: int = Field(default=20, ge=0)
    dropout: float = Field(default=0.1, ge=0.0, lt=1.0)
    mode: RunMode = RunMode.VARIANT_PAD
    length_decoding: LengthDecoding = LengthDecoding.ARGMAX

    @model_validator(mode="after")
    def check_dims(self) -> ModelConfig:
        if self.d_model % self.heads:
            raise ValueError(f"d_model {self.d_model} is not divisible by heads {self.heads}")
        if self.d_model % 2:
            raise ValueError(f"d_model {self.d_model} must be even for sinusoidal encodings")
        if self.length_bound < self.pad_limit:
            raise ValueError(f"length_bound {self.length_bound} must be >= pad_limit {self.pad_limit}")
        return self

    @property
    def d_head(self) -> int:
        return self.d_model // self.heads

    @property
    def length_classes(self) -> int:
        return 2 * self.length_bound + 1

    @classmethod
    def from_settings(cls, settings: Settings, num_classes: int, pad_limit: int | None = None) -> ModelConfig:
        """Baseline-length runs always get N = 0; the length head is widened to cover N when needed."""
        if pad_limit is None or settings.mode == RunMode.BASELINE_LENGTH:
            pad_limit = settings.effective_pad_limit
        return cls(
            layers=settings.layers,
            heads=settings.heads,
            d_model=settings.d_model,
            d_ff=settings.d_ff,
            num_classes=num_classes,
            max_len=settings.max_len,
            length_bound=max(settings.length_bound, pad_limit),
            steps=settings.steps,
            pad_limit=pad_limit,
            dropout=settings.dropout,
            mode=settings.mode,
            length_decoding=settings.length_decoding,
        )
