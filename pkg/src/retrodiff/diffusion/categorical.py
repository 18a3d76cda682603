"""Multinomial diffusion over K x l column-stochastic matrices.

Column j of a :class:`CategoricalSeq` is the categorical distribution (or
one-hot sample) of sequence position j over the K vocabulary entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.errors import ContractError, NumericError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.diffusion.schedule import NoiseSchedule

STOCHASTIC_TOLERANCE = 1e-9


class SeqKind(StrEnum):
    ONE_HOT = "one-hot"
    DISTRIBUTION = "distribution"


@dataclass(frozen=True)
class CategoricalSeq:
    probs: np.ndarray
    kind: SeqKind = SeqKind.DISTRIBUTION

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ContractError(f"categorical sequence must be K x l, got shape {probs.shape}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def one_hot(cls, ids: Sequence[int] | np.ndarray, num_classes: int) -> CategoricalSeq:
        index = np.asarray(ids, dtype=np.int64)
        if index.size and (index.min() < 0 or index.max() >= num_classes):
            raise ContractError(f"token ids must lie in 0..{num_classes - 1}")
        probs = np.zeros((num_classes, index.size))
        probs[index, np.arange(index.size)] = 1.0
        return cls(probs, SeqKind.ONE_HOT)

    @classmethod
    def uniform(cls, num_classes: int, length: int) -> CategoricalSeq:
        return cls(np.full((num_classes, length), 1.0 / num_classes))

    @property
    def num_classes(self) -> int:
        return self.probs.shape[0]

    @property
    def length(self) -> int:
        return self.probs.shape[1]

    def ids(self) -> np.ndarray:
        return self.probs.argmax(axis=0)

    def is_stochastic(self, tolerance: float = STOCHASTIC_TOLERANCE) -> bool:
        probs = self.probs
        return bool(
            np.all(probs >= -tolerance)
            and np.all(probs <= 1.0 + tolerance)
            and np.allclose(probs.sum(axis=0), 1.0, rtol=0.0, atol=tolerance)
        )


def q_step(y_prev: CategoricalSeq, t: int, sched: NoiseSchedule) -> CategoricalSeq:
    """One forward noising step: ``(1 - beta_t) y + beta_t / K``."""
    sched.check_step(t)
    beta = sched.beta[t]
    return CategoricalSeq((1.0 - beta) * y_prev.probs + beta / y_prev.num_classes)


def q_from_start(y0: CategoricalSeq, t: int, sched: NoiseSchedule) -> CategoricalSeq:
    sched.check_step(t)
    alpha_bar = sched.alpha_bar[t]
    return CategoricalSeq(alpha_bar * y0.probs + (1.0 - alpha_bar) / y0.num_classes)


def sample_categorical(dist: CategoricalSeq, rng: np.random.Generator) -> CategoricalSeq:
    """Gumbel-max sampling, one category per column."""
    probs = dist.probs
    if np.any(probs < 0.0) or np.any(probs.sum(axis=0) <= 0.0):
        raise ContractError("cannot sample from a column with a negative entry or zero mass")
    with np.errstate(divide="ignore"):
        logits = np.log(probs)
    gumbel = rng.gumbel(size=probs.shape)
    choice = np.argmax(logits + gumbel, axis=0)
    return CategoricalSeq.one_hot(choice, dist.num_classes)


def posterior_unnormalized(
    y_t: CategoricalSeq, y0_hat: CategoricalSeq, t: int, sched: NoiseSchedule
) -> np.ndarray:
    sched.check_step(t)
    if y_t.probs.shape != y0_hat.probs.shape:
        raise ContractError(f"posterior: y_t {y_t.probs.shape} and y0_hat {y0_hat.probs.shape} differ")
    K = y_t.num_classes
    alpha = sched.alpha[t]
    alpha_bar_prev = sched.alpha_bar[t - 1]
    return (alpha * y_t.probs + (1.0 - alpha) / K) * (alpha_bar_prev * y0_hat.probs + (1.0 - alpha_bar_prev) / K)


def posterior(y_t: CategoricalSeq, y0_hat: CategoricalSeq, t: int, sched: NoiseSchedule) -> CategoricalSeq:
    """``q(y_{t-1} | y_t, y0_hat)`` per position, normalized over the K classes."""
    theta = posterior_unnormalized(y_t, y0_hat, t, sched)
    total = theta.sum(axis=0, keepdims=True)
    if np.any(total <= 0.0):
        raise NumericError(f"posterior at t={t}: a column has zero mass")
    return CategoricalSeq(theta / total)
