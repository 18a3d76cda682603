"""Transformer blocks composed only from the tensor kernels.

Activations are ``positions x d_model`` matrices. Blocks are post-norm:
``norm(x + dropout(sublayer(x)))``. Attention is never masked.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.tensor import ops
from retrodiff.tensor.autograd import Tensor

if TYPE_CHECKING:
    from collections.abc import Mapping


class ParamFactory:
    """Creates named parameters with scaled normal initialization."""

    def __init__(self, rng: np.random.Generator) -> None:
        self.rng = rng
        self.params: dict[str, Tensor] = {}

    def weight(self, name: str, rows: int, cols: int) -> Tensor:
        data = self.rng.normal(0.0, 1.0 / math.sqrt(rows), size=(rows, cols))
        return self._register(name, data)

    def bias(self, name: str, size: int) -> Tensor:
        return self._register(name, np.zeros(size))

    def ones(self, name: str, size: int) -> Tensor:
        return self._register(name, np.ones(size))

    def _register(self, name: str, data: np.ndarray) -> Tensor:
        tensor = Tensor(data, requires_grad=True, name=name)
        self.params[name] = tensor
        return tensor


def init_attention(factory: ParamFactory, prefix: str, d_model: int, heads: int) -> None:
    d_head = d_model // heads
    for head in range(heads):
        for role in ("q", "k", "v"):
            factory.weight(f"{prefix}.w{role}{head}", d_model, d_head)
    factory.weight(f"{prefix}.wo", d_model, d_model)
    factory.bias(f"{prefix}.bo", d_model)


def init_norm(factory: ParamFactory, prefix: str, d_model: int) -> None:
    factory.ones(f"{prefix}.gamma", d_model)
    factory.bias(f"{prefix}.beta", d_model)


def init_feed_forward(factory: ParamFactory, prefix: str, d_model: int, d_ff: int) -> None:
    factory.weight(f"{prefix}.w1", d_model, d_ff)
    factory.bias(f"{prefix}.b1", d_ff)
    factory.weight(f"{prefix}.w2", d_ff, d_model)
    factory.bias(f"{prefix}.b2", d_model)


def linear(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    return ops.add(ops.matmul(x, weight), bias)


def attention(query: Tensor, source: Tensor, params: Mapping[str, Tensor], prefix: str, heads: int) -> Tensor:
    d_head = params[f"{prefix}.wq0"].shape[1]
    scale = 1.0 / math.sqrt(d_head)
    outputs = []
    for head in range(heads):
        q = ops.matmul(query, params[f"{prefix}.wq{head}"])
        k = ops.matmul(source, params[f"{prefix}.wk{head}"])
        v = ops.matmul(source, params[f"{prefix}.wv{head}"])
        weights = ops.softmax(ops.scale(ops.matmul(q, ops.transpose(k)), scale), axis=-1)
        outputs.append(ops.matmul(weights, v))
    joined = outputs[0] if heads == 1 else ops.concat(outputs, axis=1)
    return linear(joined, params[f"{prefix}.wo"], params[f"{prefix}.bo"])


def feed_forward(x: Tensor, params: Mapping[str, Tensor], prefix: str) -> Tensor:
    hidden = ops.gelu(linear(x, params[f"{prefix}.w1"], params[f"{prefix}.b1"]))
    return linear(hidden, params[f"{prefix}.w2"], params[f"{prefix}.b2"])


def norm(x: Tensor, params: Mapping[str, Tensor], prefix: str) -> Tensor:
    return ops.layer_norm(x, params[f"{prefix}.gamma"], params[f"{prefix}.beta"])


class Dropout:
    def __init__(self, rate: float, rng: np.random.Generator) -> None:
        self.rate = rate
        self.rng = rng
        self.training = False

    def __call__(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self.rate, self.rng, self.training)


def encoder_layer(x: Tensor, params: Mapping[str, Tensor], prefix: str, heads: int, dropout: Dropout) -> Tensor:
    x = norm(ops.add(x, dropout(attention(x, x, params, f"{prefix}.self", heads))), params, f"{prefix}.norm1")
    return norm(ops.add(x, dropout(feed_forward(x, params, f"{prefix}.ff"))), params, f"{prefix}.norm2")


def decoder_layer(
    x: Tensor,
    memory: Tensor,
    params: Mapping[str, Tensor],
    prefix: str,
    heads: int,
    dropout: Dropout,
) -> Tensor:
    x = norm(ops.add(x, dropout(attention(x, x, params, f"{prefix}.self", heads))), params, f"{prefix}.norm1")
    x = norm(ops.add(x, dropout(attention(x, memory, params, f"{prefix}.cross", heads))), params, f"{prefix}.norm2")
    return norm(ops.add(x, dropout(feed_forward(x, params, f"{prefix}.ff"))), params, f"{prefix}.norm3")
