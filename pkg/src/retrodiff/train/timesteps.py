from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.config import TimestepSampling
from retrodiff.errors import ContractError

if TYPE_CHECKING:
    from collections.abc import Iterable

HISTORY_PER_STEP = 10
UNIFORM_MIX = 0.001


class ScheduleSampler(ABC):
    """Distribution over timesteps 1..T with importance weights ``1 / (T p_t)``."""

    def __init__(self, T: int) -> None:
        if T < 1:
            raise ContractError(f"sampler needs T >= 1, got {T}")
        self.T = T

    @abstractmethod
    def weights(self) -> np.ndarray:
        """Unnormalized positive weights, entry i for timestep i + 1."""

    def probabilities(self) -> np.ndarray:
        weights = self.weights()
        return weights / weights.sum()

    def sample(self, rng: np.random.Generator) -> tuple[int, float]:
        probs = self.probabilities()
        index = int(rng.choice(self.T, p=probs))
        return index + 1, float(1.0 / (self.T * probs[index]))

    def update(self, steps: Iterable[int], losses: Iterable[float]) -> None:
        _ = steps, losses


class UniformSampler(ScheduleSampler):
    def weights(self) -> np.ndarray:
        return np.ones(self.T)


class LossSecondMomentSampler(ScheduleSampler):
    """Samples t proportionally to the RMS of its last ``history`` losses once every t has a full history."""

    def __init__(self, T: int, history: int = HISTORY_PER_STEP, uniform_mix: float = UNIFORM_MIX) -> None:
        super().__init__(T)
        self.history = history
        self.uniform_mix = uniform_mix
        self._losses = np.zeros((T, history))
        self._counts = np.zeros(T, dtype=np.int64)

    @property
    def warmed_up(self) -> bool:
        return bool((self._counts == self.history).all())

    def weights(self) -> np.ndarray:
        if not self.warmed_up:
            return np.ones(self.T)
        rms = np.sqrt(np.mean(self._losses**2, axis=-1))
        total = rms.sum()
        if not np.isfinite(total) or total <= 0.0:
            return np.ones(self.T)
        # Mixing in a little uniform mass keeps every p_t strictly positive.
        return (1.0 - self.uniform_mix) * rms / total + self.uniform_mix / self.T

    def update(self, steps: Iterable[int], losses: Iterable[float]) -> None:
        for t, loss in zip(steps, losses, strict=True):
            row = t - 1
            if self._counts[row] == self.history:
                self._losses[row, :-1] = self._losses[row, 1:]
                self._losses[row, -1] = loss
            else:
                self._losses[row, self._counts[row]] = loss
                self._counts[row] += 1


def get_sampler(kind: TimestepSampling, T: int) -> ScheduleSampler:
    if kind == TimestepSampling.UNIFORM:
        return UniformSampler(T)
    return LossSecondMomentSampler(T)
