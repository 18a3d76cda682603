"""The closed kernel set of the network.

Every primitive validates shapes (raising :class:`DimensionError` naming the op
and the offending shapes), rejects non-finite inputs with
:class:`NumericError`, and records a backward closure on the active tape when
any input requires gradients. Operands are at most rank 2; broadcasting is
limited to numpy's rules over those ranks (row vectors, column vectors,
scalars).
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import erf

from retrodiff.errors import DimensionError, NumericError
from retrodiff.tensor.autograd import Tensor, current_tape

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _check_finite(op: str, *tensors: Tensor) -> None:
    for tensor in tensors:
        if not np.isfinite(tensor.data).all():
            label = tensor.name or "input"
            raise NumericError(f"{op}: non-finite values in {label}")


def _emit(
    op: str,
    inputs: tuple[Tensor, ...],
    data: np.ndarray,
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]],
) -> Tensor:
    out = Tensor(data)
    tape = current_tape()
    if tape is not None and any(tensor.requires_grad for tensor in inputs):
        tape.record(op, inputs, out, backward)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> tuple[int, ...]:
    if a.data.ndim > 2 or b.data.ndim > 2:
        raise DimensionError(op, a.shape, b.shape)
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape) from None


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul", a.shape, b.shape)
    _check_finite("matmul", a, b)
    x, y = a.data, b.data

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return grad @ y.T, x.T @ grad

    return _emit("matmul", (a, b), x @ y, backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("add", a, b)
    _check_finite("add", a, b)
    sa, sb = a.shape, b.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, sa), _unbroadcast(grad, sb)

    return _emit("add", (a, b), a.data + b.data, backward)


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("sub", a, b)
    _check_finite("sub", a, b)
    sa, sb = a.shape, b.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad, sa), _unbroadcast(-grad, sb)

    return _emit("sub", (a, b), a.data - b.data, backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("mul", a, b)
    _check_finite("mul", a, b)
    x, y = a.data, b.data

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad * y, x.shape), _unbroadcast(grad * x, y.shape)

    return _emit("mul", (a, b), x * y, backward)


def div(a: Tensor, b: Tensor) -> Tensor:
    _broadcast_shape("div", a, b)
    _check_finite("div", a, b)
    x, y = a.data, b.data
    if np.any(y == 0.0):
        raise NumericError("div: division by zero")
    out = x / y

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return _unbroadcast(grad / y, x.shape), _unbroadcast(-grad * out / y, y.shape)

    return _emit("div", (a, b), out, backward)


def scale(a: Tensor, factor: float) -> Tensor:
    _check_finite("scale", a)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * factor,)

    return _emit("scale", (a,), a.data * factor, backward)


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise DimensionError("transpose", a.shape)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad.T,)

    return _emit("transpose", (a,), a.data.T.copy(), backward)


def total(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    _check_finite("sum", a)
    shape = a.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, shape).copy(),)

    return _emit("sum", (a,), np.sum(a.data, axis=axis, keepdims=keepdims), backward)


def mean(a: Tensor) -> Tensor:
    return scale(total(a), 1.0 / max(a.size, 1))


def log(a: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log of ``max(a, floor)``; entries at or below the floor get zero gradient."""
    _check_finite("log", a)
    x = a.data
    clipped = np.maximum(x, floor) if floor > 0.0 else x
    if np.any(clipped <= 0.0):
        raise NumericError("log: non-positive input")
    active = x > floor if floor > 0.0 else np.ones_like(x, dtype=bool)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (np.where(active, grad / clipped, 0.0),)

    return _emit("log", (a,), np.log(clipped), backward)


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    _check_finite("softmax", a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    exp = np.exp(shifted)
    out = exp / exp.sum(axis=axis, keepdims=True)

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (out * (grad - (grad * out).sum(axis=axis, keepdims=True)),)

    return _emit("softmax", (a,), out, backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    width = x.shape[-1]
    if gamma.shape != (width,) or beta.shape != (width,):
        raise DimensionError("layer_norm", x.shape, gamma.shape, beta.shape)
    _check_finite("layer_norm", x, gamma, beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=-1, keepdims=True) + eps)
    normed = centered * inv_std
    g = gamma.data

    def backward(grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        grad_normed = grad * g
        grad_x = inv_std * (
            grad_normed
            - grad_normed.mean(axis=-1, keepdims=True)
            - normed * (grad_normed * normed).mean(axis=-1, keepdims=True)
        )
        rows = grad.reshape(-1, width)
        return grad_x, (rows * normed.reshape(-1, width)).sum(axis=0), rows.sum(axis=0)

    return _emit("layer_norm", (x, gamma, beta), normed * g + beta.data, backward)


def gelu(a: Tensor) -> Tensor:
    """Exact GELU, ``x * Phi(x)`` with the erf form of the normal CDF."""
    _check_finite("gelu", a)
    x = a.data
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        pdf = _INV_SQRT2PI * np.exp(-0.5 * x * x)
        return (grad * (cdf + x * pdf),)

    return _emit("gelu", (a,), x * cdf, backward)


def embedding(table: Tensor, ids: Sequence[int] | np.ndarray) -> Tensor:
    index = np.asarray(ids, dtype=np.int64)
    if table.data.ndim != 2 or index.ndim != 1:
        raise DimensionError("embedding", table.shape, index.shape)
    if index.size and (index.min() < 0 or index.max() >= table.shape[0]):
        raise DimensionError("embedding", table.shape, (int(index.max()),))
    _check_finite("embedding", table)
    rows = table.shape

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        out = np.zeros(rows)
        np.add.at(out, index, grad)
        return (out,)

    return _emit("embedding", (table,), table.data[index], backward)


def dropout(a: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout; a pure identity outside training."""
    if not training or rate <= 0.0:
        return a
    _check_finite("dropout", a)
    keep = 1.0 - rate
    mask = (rng.random(a.shape) < keep) / keep

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * mask,)

    return _emit("dropout", (a,), a.data * mask, backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise DimensionError("concat", ())
    ref = tensors[0].shape
    for tensor in tensors[1:]:
        other = tensor.shape
        if len(other) != len(ref) or any(
            size != ref_size
            for dim, (size, ref_size) in enumerate(zip(other, ref, strict=True))
            if dim != axis % len(ref)
        ):
            raise DimensionError("concat", ref, other)
    _check_finite("concat", *tensors)
    bounds = np.cumsum([tensor.shape[axis] for tensor in tensors])[:-1]

    def backward(grad: np.ndarray) -> list[np.ndarray]:
        return np.split(grad, bounds, axis=axis)

    return _emit("concat", tuple(tensors), np.concatenate([tensor.data for tensor in tensors], axis=axis), backward)


def cross_entropy(logits: Tensor, targets: Sequence[int] | np.ndarray) -> Tensor:
    """Mean over rows of ``-log softmax(logits)[row, target]``."""
    labels = np.asarray(targets, dtype=np.int64)
    if logits.data.ndim != 2 or labels.shape != (logits.shape[0],):
        raise DimensionError("cross_entropy", logits.shape, labels.shape)
    if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
        raise DimensionError("cross_entropy", logits.shape, (int(labels.max()),))
    _check_finite("cross_entropy", logits)
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    rows = np.arange(labels.size)
    count = max(labels.size, 1)
    value = -log_probs[rows, labels].sum() / count

    def backward(grad: np.ndarray) -> tuple[np.ndarray]:
        local = np.exp(log_probs)
        local[rows, labels] -= 1.0
        return (local * (grad.reshape(()) / count),)

    return _emit("cross_entropy", (logits,), np.asarray(value), backward)
