"""Training objectives.

All losses take the predicted clean target as a K x l probability Tensor
(``softmax`` of decoder logits over the class axis) and return scalar
Tensors recorded on the active tape.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from retrodiff.config import MSEReading
from retrodiff.diffusion.categorical import CategoricalSeq, posterior
from retrodiff.errors import ContractError, DimensionError
from retrodiff.tensor import ops
from retrodiff.tensor.autograd import Tensor

if TYPE_CHECKING:
    from retrodiff.diffusion.schedule import NoiseSchedule

PROB_FLOOR = 1e-12


def _as_tensor(value: Tensor | CategoricalSeq | np.ndarray) -> Tensor:
    if isinstance(value, Tensor):
        return value
    if isinstance(value, CategoricalSeq):
        return Tensor(value.probs)
    return Tensor(value)


def _as_array(value: CategoricalSeq | np.ndarray) -> np.ndarray:
    return value.probs if isinstance(value, CategoricalSeq) else np.asarray(value, dtype=np.float64)


def mse_loss(
    y0: Tensor | CategoricalSeq | np.ndarray,
    y0_hat: Tensor | CategoricalSeq | np.ndarray,
    reading: MSEReading = MSEReading.SQUARED_ERROR,
) -> Tensor:
    """Mean over all K*l entries of ``(y0 - y0_hat)^2``.

    ``SQUARED_TERMS`` squares each argument first: ``(y0^2 - y0_hat^2)^2``.
    """
    target, predicted = _as_tensor(y0), _as_tensor(y0_hat)
    if target.shape != predicted.shape:
        raise DimensionError("mse_loss", target.shape, predicted.shape)
    if reading is MSEReading.SQUARED_TERMS:
        target = ops.mul(target, target)
        predicted = ops.mul(predicted, predicted)
    diff = ops.sub(target, predicted)
    return ops.mean(ops.mul(diff, diff))


def vlb_loss(
    y0: CategoricalSeq,
    y_t: CategoricalSeq,
    y0_hat: Tensor | CategoricalSeq | np.ndarray,
    t: int,
    sched: NoiseSchedule,
) -> Tensor:
    """Per-sample bound term, averaged over positions.

    At t = 1 this is the negative log-likelihood of ``y0`` under ``y0_hat``;
    for t >= 2 it is ``KL(q(y_{t-1} | y_t, y0) || q(y_{t-1} | y_t, y0_hat))``.
    """
    sched.check_step(t)
    predicted = _as_tensor(y0_hat)
    target = _as_array(y0)
    if predicted.shape != target.shape or y_t.probs.shape != target.shape:
        raise DimensionError("vlb_loss", target.shape, y_t.probs.shape, predicted.shape)
    K, length = target.shape
    if t == 1:
        log_probs = ops.log(predicted, floor=PROB_FLOOR)
        return ops.scale(ops.total(ops.mul(Tensor(target), log_probs)), -1.0 / length)

    true_post = posterior(y_t, CategoricalSeq(target), t, sched).probs
    alpha = sched.alpha[t]
    alpha_bar_prev = sched.alpha_bar[t - 1]
    from_noisy = Tensor(alpha * y_t.probs + (1.0 - alpha) / K)
    from_start = ops.add(ops.scale(predicted, alpha_bar_prev), Tensor(np.full((1, 1), (1.0 - alpha_bar_prev) / K)))
    theta = ops.mul(from_noisy, from_start)
    predicted_post = ops.div(theta, ops.total(theta, axis=0, keepdims=True))
    with np.errstate(divide="ignore", invalid="ignore"):
        entropy_term = np.where(true_post > 0.0, true_post * np.log(true_post), 0.0).sum()
    cross = ops.total(ops.mul(Tensor(true_post), ops.log(predicted_post, floor=PROB_FLOOR)))
    return ops.scale(ops.sub(Tensor(entropy_term), cross), 1.0 / length)


def length_loss(length_logits: Tensor, true_delta: int, length_bound: int) -> Tensor:
    """Cross-entropy of the length classifier against class ``true_delta + length_bound``."""
    if abs(true_delta) > length_bound:
        raise ContractError(f"length delta {true_delta} outside +-{length_bound}; clamp it first")
    logits = length_logits
    if logits.data.ndim == 1:
        if logits.requires_grad:
            raise DimensionError("length_loss", logits.shape)
        logits = Tensor(logits.data.reshape(1, -1))
    return ops.cross_entropy(logits, [true_delta + length_bound])


def predicted_start(decoder_logits: Tensor) -> Tensor:
    """Column-wise softmax of K x l decoder logits."""
    return ops.softmax(decoder_logits, axis=0)
