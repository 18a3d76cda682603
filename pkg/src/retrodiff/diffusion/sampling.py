from __future__ import annotations

from typing import TYPE_CHECKING, Any, Protocol

from retrodiff.diffusion.categorical import CategoricalSeq, posterior, sample_categorical
from retrodiff.errors import ContractError

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

    from retrodiff.diffusion.schedule import NoiseSchedule


class Denoiser(Protocol):
    """Anything that predicts clean targets from noisy ones given encoded source tokens."""

    @property
    def num_classes(self) -> int: ...

    def memory(self, x0_ids: Sequence[int]) -> Any: ...

    def predict_start(self, y_t: CategoricalSeq, t: int, memory: Any) -> CategoricalSeq: ...


def reverse_step(
    y_t: CategoricalSeq,
    memory: Any,
    t: int,
    sched: NoiseSchedule,
    denoiser: Denoiser,
    rng: np.random.Generator,
) -> tuple[CategoricalSeq, CategoricalSeq]:
    y0_hat = denoiser.predict_start(y_t, t, memory)
    if y0_hat.probs.shape != y_t.probs.shape:
        raise ContractError(f"denoiser returned {y0_hat.probs.shape}, expected {y_t.probs.shape}")
    return sample_categorical(posterior(y_t, y0_hat, t, sched), rng), y0_hat


def strip_trailing(ids: Sequence[int], pad_id: int) -> list[int]:
    """Drop the maximal trailing run of ``pad_id``; interior pads stay."""
    end = len(ids)
    while end and ids[end - 1] == pad_id:
        end -= 1
    return list(ids[:end])


def generate(
    x0_ids: Sequence[int],
    target_len: int,
    denoiser: Denoiser,
    sched: NoiseSchedule,
    rng: np.random.Generator,
    max_len: int,
    pad_id: int = 0,
) -> list[int]:
    """Run the full reverse chain from uniform noise of ``target_len`` columns."""
    if target_len < 1:
        raise ContractError(f"target length must be >= 1, got {target_len}")
    if target_len > max_len:
        raise ContractError(f"target length {target_len} exceeds max_len {max_len}")
    memory = denoiser.memory(x0_ids)
    y = sample_categorical(CategoricalSeq.uniform(denoiser.num_classes, target_len), rng)
    for t in range(sched.T, 0, -1):
        y, _ = reverse_step(y, memory, t, sched, denoiser, rng)
    return strip_trailing(y.ids().tolist(), pad_id)
