from __future__ import annotations

import numpy as np
import pytest

from retrodiff.errors import ContractError, DimensionError, NumericError
from retrodiff.tensor import ops
from retrodiff.tensor.autograd import Tape, Tensor, gradcheck

TOLERANCE = 1e-4


def _param(rng: np.random.Generator, *shape: int, name: str | None = None) -> Tensor:
    return Tensor(rng.normal(size=shape), requires_grad=True, name=name)


@pytest.mark.unit
@pytest.mark.parametrize(
    ("name", "build"),
    [
        ("matmul", lambda a, b: ops.total(ops.matmul(a, b))),
        ("add_broadcast", lambda a, b: ops.total(ops.mul(ops.add(a, ops.total(b, axis=1)), a))),
        ("sub", lambda a, b: ops.mean(ops.mul(ops.sub(a, ops.transpose(b)), a))),
        ("div", lambda a, b: ops.total(ops.div(a, ops.add(ops.mul(ops.transpose(b), ops.transpose(b)), Tensor(1.0))))),
        ("softmax", lambda a, b: ops.total(ops.mul(ops.softmax(a, axis=0), ops.transpose(b)))),
        ("gelu", lambda a, b: ops.total(ops.gelu(ops.matmul(a, b)))),
        ("log", lambda a, b: ops.total(ops.log(ops.softmax(ops.matmul(a, b), axis=1)))),
    ],
)
def test_primitive_gradients_match_finite_differences(name: str, build) -> None:
    rng = np.random.default_rng(0)
    a = _param(rng, 3, 4, name="a")
    b = _param(rng, 4, 3, name="b")

    error = gradcheck(lambda: build(a, b), [a, b])

    assert error < TOLERANCE, name


@pytest.mark.unit
def test_layer_norm_gradients() -> None:
    rng = np.random.default_rng(1)
    x = _param(rng, 3, 6)
    gamma = _param(rng, 6)
    beta = _param(rng, 6)
    weights = Tensor(rng.normal(size=(3, 6)))

    error = gradcheck(lambda: ops.total(ops.mul(ops.layer_norm(x, gamma, beta), weights)), [x, gamma, beta])

    assert error < TOLERANCE


@pytest.mark.unit
def test_embedding_concat_and_cross_entropy_gradients() -> None:
    rng = np.random.default_rng(2)
    table = _param(rng, 5, 4)
    extra = _param(rng, 2, 4)

    def loss() -> Tensor:
        rows = ops.concat([ops.embedding(table, [0, 3, 3]), extra], axis=0)
        return ops.cross_entropy(rows, [1, 0, 3, 2, 2])

    assert gradcheck(loss, [table, extra]) < TOLERANCE


@pytest.mark.unit
def test_cross_entropy_of_uniform_logits_is_log_class_count() -> None:
    logits = Tensor(np.zeros((1, 129)))

    value = ops.cross_entropy(logits, [17]).item()

    assert value == pytest.approx(np.log(129), abs=1e-12)


@pytest.mark.unit
def test_shared_input_accumulates_gradient() -> None:
    x = Tensor([[2.0, -1.0]], requires_grad=True)
    x.zero_grad()

    with Tape():
        loss = ops.total(ops.add(ops.mul(x, x), x))
    loss.backward()

    np.testing.assert_allclose(x.grad, [[5.0, -1.0]])


@pytest.mark.unit
def test_operator_overloads_record_on_tape() -> None:
    x = Tensor([[1.0, 2.0]], requires_grad=True)
    w = Tensor([[3.0], [4.0]], requires_grad=True)

    with Tape() as tape:
        loss = ops.total((x @ w) * 2.0 - 1.0)
    loss.backward()

    assert len(tape) > 0
    np.testing.assert_allclose(x.grad, [[6.0, 8.0]])
    np.testing.assert_allclose(w.grad, [[2.0], [4.0]])


@pytest.mark.unit
def test_no_tape_means_no_recording() -> None:
    x = Tensor([[1.0]], requires_grad=True)

    out = ops.scale(x, 3.0)

    with pytest.raises(ContractError):
        out.backward()


@pytest.mark.unit
def test_backward_needs_scalar_loss() -> None:
    x = Tensor([[1.0, 2.0]], requires_grad=True)
    with Tape():
        out = ops.scale(x, 2.0)
    with pytest.raises(ContractError):
        out.backward()


@pytest.mark.unit
def test_matmul_shape_mismatch_names_op_and_shapes() -> None:
    with pytest.raises(DimensionError) as info:
        ops.matmul(Tensor(np.ones((2, 3))), Tensor(np.ones((2, 3))))

    assert info.value.op == "matmul"
    assert info.value.shapes == ((2, 3), (2, 3))


@pytest.mark.unit
def test_non_finite_input_is_rejected() -> None:
    with pytest.raises(NumericError):
        ops.softmax(Tensor([[np.nan, 1.0]]))


@pytest.mark.unit
def test_dropout_is_identity_outside_training(rng: np.random.Generator) -> None:
    x = Tensor(rng.normal(size=(3, 3)))

    assert ops.dropout(x, 0.5, rng, training=False) is x
    dropped = ops.dropout(x, 0.5, rng, training=True)
    kept = dropped.data != 0.0
    np.testing.assert_allclose(dropped.data[kept], 2.0 * x.data[kept])


@pytest.mark.unit
@pytest.mark.parametrize("shift", [-700.0, -3.5, 0.25, 40.0, 900.0])
def test_softmax_is_shift_invariant(shift: float, rng: np.random.Generator) -> None:
    logits = rng.normal(size=(4, 6))

    base = ops.softmax(Tensor(logits), axis=0).data
    moved = ops.softmax(Tensor(logits + shift), axis=0).data

    np.testing.assert_allclose(moved, base, rtol=0.0, atol=1e-12)


@pytest.mark.unit
def test_backward_over_disjoint_graphs_equals_separate_backwards(rng: np.random.Generator) -> None:
    a = _param(rng, 3, 4, name="a")
    b = _param(rng, 4, 2, name="b")
    w = Tensor(rng.normal(size=(4, 2)))

    def first() -> Tensor:
        return ops.total(ops.gelu(ops.matmul(a, w)))

    def second() -> Tensor:
        return ops.mean(ops.mul(ops.softmax(b, axis=0), b))

    separate = []
    for build, param in ((first, a), (second, b)):
        a.zero_grad()
        b.zero_grad()
        with Tape():
            loss = build()
        loss.backward()
        separate.append(param.grad.copy())

    a.zero_grad()
    b.zero_grad()
    with Tape():
        loss = ops.add(first(), second())
    loss.backward()

    np.testing.assert_allclose(a.grad, separate[0], rtol=1e-15, atol=0.0)
    np.testing.assert_allclose(b.grad, separate[1], rtol=1e-15, atol=0.0)
