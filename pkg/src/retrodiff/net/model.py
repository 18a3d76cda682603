from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from retrodiff.config import LengthDecoding
from retrodiff.diffusion.categorical import CategoricalSeq
from retrodiff.diffusion.embedding import sinusoidal, timestep_embedding
from retrodiff.errors import ContractError
from retrodiff.net.layers import (
    Dropout,
    ParamFactory,
    decoder_layer,
    encoder_layer,
    init_attention,
    init_feed_forward,
    init_norm,
    linear,
)
from retrodiff.smiles.vocab import LENGTH, SPECIAL_TOKENS
from retrodiff.tensor import ops
from retrodiff.tensor.autograd import Tensor

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.net.config import ModelConfig


LENGTH_TOKEN_ID = SPECIAL_TOKENS.index(LENGTH)


def init_params(config: ModelConfig, rng: np.random.Generator) -> dict[str, Tensor]:
    factory = ParamFactory(rng)
    d_model = config.d_model
    factory.weight("embedding", config.num_classes, d_model)
    for layer in range(config.layers):
        prefix = f"encoder.{layer}"
        init_attention(factory, f"{prefix}.self", d_model, config.heads)
        init_norm(factory, f"{prefix}.norm1", d_model)
        init_feed_forward(factory, f"{prefix}.ff", d_model, config.d_ff)
        init_norm(factory, f"{prefix}.norm2", d_model)
    for layer in range(config.layers):
        prefix = f"decoder.{layer}"
        init_attention(factory, f"{prefix}.self", d_model, config.heads)
        init_norm(factory, f"{prefix}.norm1", d_model)
        init_attention(factory, f"{prefix}.cross", d_model, config.heads)
        init_norm(factory, f"{prefix}.norm2", d_model)
        init_feed_forward(factory, f"{prefix}.ff", d_model, config.d_ff)
        init_norm(factory, f"{prefix}.norm3", d_model)
    factory.weight("length.w1", d_model, d_model)
    factory.bias("length.b1", d_model)
    factory.weight("length.w2", d_model, config.length_classes)
    factory.bias("length.b2", config.length_classes)
    factory.weight("output.w", d_model, config.num_classes)
    factory.bias("output.b", config.num_classes)
    return factory.params


class DiffusionTransformer:
    """Encoder over LENGTH-prefixed source tokens, bidirectional denoising decoder.

    Implements the ``Denoiser`` protocol used by the sampling loop. Dropout
    is active only after :meth:`train`; a fresh model starts in eval mode.
    """

    def __init__(
        self,
        config: ModelConfig,
        params: dict[str, Tensor] | None = None,
        seed: int | None = 0,
    ) -> None:
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.params = params if params is not None else init_params(config, self.rng)
        self.dropout = Dropout(config.dropout, self.rng)
        self._positions = sinusoidal(np.arange(config.max_len), config.d_model)

    @property
    def num_classes(self) -> int:
        return self.config.num_classes

    @property
    def training(self) -> bool:
        return self.dropout.training

    def train(self) -> DiffusionTransformer:
        self.dropout.training = True
        return self

    def eval(self) -> DiffusionTransformer:
        self.dropout.training = False
        return self

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def zero_grad(self) -> None:
        for param in self.params.values():
            param.zero_grad()

    def encode(self, x0_ids: Sequence[int]) -> tuple[Tensor, Tensor]:
        """Return ``(memory, length_logits)``; memory row 0 is the LENGTH position."""
        ids = [LENGTH_TOKEN_ID, *x0_ids]
        if len(ids) > self.config.max_len:
            raise ContractError(f"source of {len(x0_ids)} tokens plus LENGTH exceeds max_len {self.config.max_len}")
        x = ops.add(ops.embedding(self.params["embedding"], ids), Tensor(self._positions[: len(ids)]))
        x = self.dropout(x)
        for layer in range(self.config.layers):
            x = encoder_layer(x, self.params, f"encoder.{layer}", self.config.heads, self.dropout)
        return x, self.length_logits(x)

    def length_logits(self, memory: Tensor) -> Tensor:
        """Length-delta logits read from memory row 0 only; index i means delta ``i - length_bound``."""
        row = ops.embedding(memory, [0])
        hidden = ops.gelu(linear(row, self.params["length.w1"], self.params["length.b1"]))
        return linear(hidden, self.params["length.w2"], self.params["length.b2"])

    def decode(
        self,
        y_t: CategoricalSeq,
        t: int,
        memory: Tensor,
        positions: Sequence[int] | np.ndarray | None = None,
    ) -> Tensor:
        """Return K x l logits for the clean target given noisy ``y_t``."""
        if y_t.num_classes != self.config.num_classes:
            raise ContractError(f"y_t has {y_t.num_classes} classes, model expects {self.config.num_classes}")
        length = y_t.length
        if not 1 <= length <= self.config.max_len:
            raise ContractError(f"target length {length} outside 1..{self.config.max_len}")
        if memory.data.ndim != 2 or memory.shape[1] != self.config.d_model:
            raise ContractError(f"memory must be n x {self.config.d_model}, got {memory.shape}")
        index = np.arange(length) if positions is None else np.asarray(positions)
        encodings = self._positions[index] + timestep_embedding(t, self.config.d_model)
        x = ops.add(ops.matmul(Tensor(y_t.probs.T), self.params["embedding"]), Tensor(encodings))
        x = self.dropout(x)
        for layer in range(self.config.layers):
            x = decoder_layer(x, memory, self.params, f"decoder.{layer}", self.config.heads, self.dropout)
        logits = linear(x, self.params["output.w"], self.params["output.b"])
        return ops.transpose(logits)

    def memory(self, x0_ids: Sequence[int]) -> Tensor:
        return self.encode(x0_ids)[0]

    def predict_start(self, y_t: CategoricalSeq, t: int, memory: Tensor) -> CategoricalSeq:
        logits = self.decode(y_t, t, memory).data
        shifted = np.exp(logits - logits.max(axis=0, keepdims=True))
        return CategoricalSeq(shifted / shifted.sum(axis=0, keepdims=True))

    def predict_length(
        self,
        x0_ids: Sequence[int],
        decoding: LengthDecoding | None = None,
        rng: np.random.Generator | None = None,
    ) -> int:
        logits = self.encode(x0_ids)[1].data.reshape(-1)
        return delta_to_length(logits, len(x0_ids), self.config, decoding or self.config.length_decoding, rng)


def delta_to_length(
    logits: np.ndarray,
    source_length: int,
    config: ModelConfig,
    decoding: LengthDecoding = LengthDecoding.ARGMAX,
    rng: np.random.Generator | None = None,
) -> int:
    if decoding is LengthDecoding.SAMPLE:
        if rng is None:
            raise ContractError("sampled length decoding needs a generator")
        probs = np.exp(logits - logits.max())
        index = int(rng.choice(logits.size, p=probs / probs.sum()))
    else:
        index = int(np.argmax(logits))
    predicted = source_length + index - config.length_bound
    return int(min(max(predicted, 1), config.max_len))
