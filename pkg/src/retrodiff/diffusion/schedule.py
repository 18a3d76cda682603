from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from retrodiff.errors import ContractError

MAX_BETA = 0.999
COSINE_OFFSET = 0.008


@dataclass(frozen=True)
class NoiseSchedule:
    """Noise levels for t = 1..T.

    Arrays are indexed by t directly: entry 0 holds the t = 0 convention
    (beta 0, alpha 1, alpha_bar 1) so ``alpha_bar[t - 1]`` is defined at t = 1.
    """

    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    @classmethod
    def from_betas(cls, betas: np.ndarray | list[float]) -> NoiseSchedule:
        values = np.asarray(betas, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ContractError("a schedule needs at least one beta")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ContractError("betas must lie in [0, 1]")
        beta = np.concatenate([[0.0], values])
        alpha = 1.0 - beta
        return cls(T=values.size, beta=beta, alpha=alpha, alpha_bar=np.cumprod(alpha))

    def check_step(self, t: int) -> None:
        if not 1 <= t <= self.T:
            raise ContractError(f"timestep {t} outside 1..{self.T}")


def cosine_schedule(T: int, s: float = COSINE_OFFSET, max_beta: float = MAX_BETA) -> NoiseSchedule:
    if T < 1:
        raise ContractError(f"schedule needs T >= 1, got {T}")

    def f(step: float) -> float:
        return math.cos((step / T + s) / (1.0 + s) * math.pi / 2.0) ** 2

    f0 = f(0.0)
    target = [f(step) / f0 for step in range(T + 1)]
    betas = [min(1.0 - target[step] / target[step - 1], max_beta) for step in range(1, T + 1)]
    return NoiseSchedule.from_betas(betas)
