"""Dense float64 tensors with tape-based reverse-mode differentiation.

A :class:`Tape` is activated as a context manager. Every primitive applied
while a tape is active, and with at least one input that requires gradients,
appends a :class:`TapeRecord`. Records are appended in execution order, so the
tape is topologically sorted by construction and :meth:`Tape.backward` is a
single reverse sweep.
"""

from __future__ import annotations

from contextvars import ContextVar
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from retrodiff.errors import ContractError

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence


_active_tape: ContextVar[Tape | None] = ContextVar("retrodiff_active_tape", default=None)


class Tensor:
    __slots__ = ("_tape", "data", "grad", "name", "requires_grad")

    def __init__(self, data: Any, requires_grad: bool = False, name: str | None = None) -> None:
        self.data: np.ndarray = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.name = name
        self._tape: Tape | None = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def backward(self) -> None:
        if self._tape is None:
            raise ContractError("backward() needs a loss produced by recorded primitives")
        self._tape.backward(self)

    def __add__(self, other: Tensor | float) -> Tensor:
        from retrodiff.tensor import ops

        return ops.add(self, _ensure(other))

    def __radd__(self, other: float) -> Tensor:
        from retrodiff.tensor import ops

        return ops.add(_ensure(other), self)

    def __sub__(self, other: Tensor | float) -> Tensor:
        from retrodiff.tensor import ops

        return ops.sub(self, _ensure(other))

    def __rsub__(self, other: float) -> Tensor:
        from retrodiff.tensor import ops

        return ops.sub(_ensure(other), self)

    def __mul__(self, other: Tensor | float) -> Tensor:
        from retrodiff.tensor import ops

        if isinstance(other, Tensor):
            return ops.mul(self, other)
        return ops.scale(self, float(other))

    def __rmul__(self, other: float) -> Tensor:
        from retrodiff.tensor import ops

        return ops.scale(self, float(other))

    def __truediv__(self, other: Tensor | float) -> Tensor:
        from retrodiff.tensor import ops

        if isinstance(other, Tensor):
            return ops.div(self, other)
        return ops.scale(self, 1.0 / float(other))

    def __matmul__(self, other: Tensor) -> Tensor:
        from retrodiff.tensor import ops

        return ops.matmul(self, other)

    def __neg__(self) -> Tensor:
        from retrodiff.tensor import ops

        return ops.scale(self, -1.0)

    @property
    def T(self) -> Tensor:  # noqa: N802
        from retrodiff.tensor import ops

        return ops.transpose(self)


def _ensure(value: Tensor | float) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


@dataclass(slots=True)
class TapeRecord:
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tape:
    def __init__(self) -> None:
        self.records: list[TapeRecord] = []
        self._token: Any = None

    def __enter__(self) -> Tape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc: object) -> None:
        _active_tape.reset(self._token)
        self._token = None

    def __len__(self) -> int:
        return len(self.records)

    def record(
        self,
        op: str,
        inputs: tuple[Tensor, ...],
        output: Tensor,
        backward: Callable[[np.ndarray], Sequence[np.ndarray | None]],
    ) -> None:
        output.requires_grad = True
        output._tape = self
        self.records.append(TapeRecord(op, inputs, output, backward))

    def backward(self, loss: Tensor) -> None:
        """Accumulate ``d loss / d leaf`` into ``leaf.grad`` for every leaf on the tape."""
        if loss.size != 1:
            raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
        produced = {id(record.output): index for index, record in enumerate(self.records)}
        if id(loss) not in produced:
            raise ContractError("loss was not produced on this tape")

        pending: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        last = produced[id(loss)]
        for index in range(last, -1, -1):
            record = self.records[index]
            upstream = pending.pop(id(record.output), None)
            if upstream is None:
                continue
            input_grads = record.backward(upstream)
            for tensor, grad in zip(record.inputs, input_grads, strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                key = id(tensor)
                source = produced.get(key)
                if source is not None:
                    if source >= index:
                        raise ContractError(f"tape is not topologically ordered at record {index} ({record.op})")
                    if key in pending:
                        pending[key] = pending[key] + grad
                    else:
                        pending[key] = grad
                elif tensor.grad is None:
                    tensor.grad = np.array(grad, dtype=np.float64)
                else:
                    tensor.grad += grad


def current_tape() -> Tape | None:
    return _active_tape.get()


def backward(loss: Tensor) -> None:
    loss.backward()


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-4) -> float:
    if analytic.size == 0:
        return 0.0
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / scale))


def gradcheck(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    eps: float = 1e-5,
    entries_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Compare tape gradients of ``fn()`` with central finite differences.

    ``fn`` must be deterministic and build its graph from ``params``. Returns the
    worst relative error seen over the checked entries.
    """
    for param in params:
        param.requires_grad = True
        param.zero_grad()
    with Tape():
        loss = fn()
    loss.backward()
    analytic = [np.array(param.grad) for param in params]

    rng = rng or np.random.default_rng(0)
    worst = 0.0
    for param, grad in zip(params, analytic, strict=True):
        flat = param.data.reshape(-1)
        if entries_per_param is None or entries_per_param >= flat.size:
            positions = np.arange(flat.size)
        else:
            positions = rng.choice(flat.size, size=entries_per_param, replace=False)
        numeric = np.empty(len(positions))
        for slot, position in enumerate(positions):
            original = flat[position]
            flat[position] = original + eps
            upper = fn().item()
            flat[position] = original - eps
            lower = fn().item()
            flat[position] = original
            numeric[slot] = (upper - lower) / (2.0 * eps)
        worst = max(worst, max_relative_error(grad.reshape(-1)[positions], numeric))
    return worst
