from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.errors import ContractError, DimensionError, NumericError

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.tensor.autograd import Tensor


@dataclass
class AdamState:
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)


def adam_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> AdamState:
    """Apply one bias-corrected Adam update in place and return the advanced state.

    A learning rate of exactly zero advances the moments but leaves every
    parameter array bitwise untouched.
    """
    if lr < 0.0:
        raise ContractError(f"learning rate must be non-negative, got {lr}")
    if len(params) != len(grads):
        raise ContractError(f"{len(params)} params but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(param.data) for param in params]
        state.v = [np.zeros_like(param.data) for param in params]
    if len(state.m) != len(params):
        raise ContractError(f"optimizer state tracks {len(state.m)} params, got {len(params)}")

    for index, (param, grad) in enumerate(zip(params, grads, strict=True)):
        if grad.shape != param.shape:
            raise DimensionError("adam_step", param.shape, grad.shape)
        if not np.isfinite(grad).all():
            label = param.name or f"param[{index}]"
            raise NumericError(f"adam_step: non-finite gradient for {label}")

    state.step += 1
    correction1 = 1.0 - beta1**state.step
    correction2 = 1.0 - beta2**state.step
    for index, (param, grad) in enumerate(zip(params, grads, strict=True)):
        state.m[index] = beta1 * state.m[index] + (1.0 - beta1) * grad
        state.v[index] = beta2 * state.v[index] + (1.0 - beta2) * grad * grad
        if lr == 0.0:
            continue
        m_hat = state.m[index] / correction1
        v_hat = state.v[index] / correction2
        param.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return state


class Adam:
    def __init__(
        self,
        params: Sequence[Tensor],
        lr: float = 1e-4,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ) -> None:
        if not math.isfinite(lr):
            raise ContractError(f"learning rate must be finite, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.state = AdamState()

    def zero_grad(self) -> None:
        for param in self.params:
            param.zero_grad()

    def step(self, grads: Sequence[np.ndarray] | None = None) -> None:
        if grads is None:
            grads = [param.grad if param.grad is not None else np.zeros_like(param.data) for param in self.params]
        adam_step(self.params, grads, self.state, self.lr, self.betas[0], self.betas[1], self.eps)
