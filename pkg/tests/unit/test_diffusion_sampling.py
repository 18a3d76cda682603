from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import pytest

from retrodiff.diffusion.categorical import CategoricalSeq, posterior
from retrodiff.diffusion.sampling import generate, reverse_step, strip_trailing
from retrodiff.diffusion.schedule import cosine_schedule
from retrodiff.errors import ContractError


class FakeOracleDenoiser:
    """Always predicts a fixed clean target, truncated or PAD-extended to the requested length."""

    def __init__(self, target: Sequence[int], num_classes: int) -> None:
        self._target = list(target)
        self._num_classes = num_classes
        self.memory_calls = 0

    @property
    def num_classes(self) -> int:
        return self._num_classes

    def memory(self, x0_ids: Sequence[int]) -> list[int]:
        self.memory_calls += 1
        return list(x0_ids)

    def predict_start(self, y_t: CategoricalSeq, t: int, memory: list[int]) -> CategoricalSeq:
        ids = (self._target + [0] * y_t.length)[: y_t.length]
        return CategoricalSeq.one_hot(ids, self._num_classes)


class FakeUniformDenoiser(FakeOracleDenoiser):
    def predict_start(self, y_t: CategoricalSeq, t: int, memory: list[int]) -> CategoricalSeq:
        return CategoricalSeq.uniform(self._num_classes, y_t.length)


class FakeFixedDenoiser(FakeOracleDenoiser):
    def __init__(self, prediction: CategoricalSeq) -> None:
        super().__init__([], prediction.num_classes)
        self._prediction = prediction

    def predict_start(self, y_t: CategoricalSeq, t: int, memory: list[int]) -> CategoricalSeq:
        return self._prediction


@pytest.mark.unit
def test_oracle_denoiser_recovers_target(rng: np.random.Generator) -> None:
    target = [5, 6, 7, 5, 8]
    denoiser = FakeOracleDenoiser(target, num_classes=9)

    out = generate([4, 5], len(target), denoiser, cosine_schedule(10), rng, max_len=16)

    assert out == target
    assert denoiser.memory_calls == 1


@pytest.mark.unit
def test_trailing_pads_are_stripped(rng: np.random.Generator) -> None:
    denoiser = FakeOracleDenoiser([5, 0, 6], num_classes=9)

    out = generate([4], 6, denoiser, cosine_schedule(10), rng, max_len=16)

    assert out == [5, 0, 6]


@pytest.mark.unit
def test_strip_trailing_keeps_interior_pads() -> None:
    assert strip_trailing([5, 0, 6, 0, 0], 0) == [5, 0, 6]
    assert strip_trailing([0, 0], 0) == []


@pytest.mark.unit
def test_reverse_step_returns_one_hot(rng: np.random.Generator) -> None:
    sched = cosine_schedule(5)
    denoiser = FakeUniformDenoiser([1], num_classes=6)
    y_t = CategoricalSeq.one_hot([1, 2, 3], 6)

    y_prev, y0_hat = reverse_step(y_t, None, 3, sched, denoiser, rng)

    assert y_prev.probs.shape == (6, 3)
    np.testing.assert_array_equal(y_prev.probs.sum(axis=0), 1.0)
    assert set(np.unique(y_prev.probs)) <= {0.0, 1.0}
    np.testing.assert_allclose(y0_hat.probs, 1.0 / 6)


@pytest.mark.unit
def test_generation_is_deterministic_per_seed() -> None:
    denoiser = FakeUniformDenoiser([1], num_classes=7)
    sched = cosine_schedule(6)

    first = generate([1, 2], 5, denoiser, sched, np.random.default_rng(9), max_len=8)
    second = generate([1, 2], 5, denoiser, sched, np.random.default_rng(9), max_len=8)

    assert first == second


@pytest.mark.unit
@pytest.mark.parametrize("length", [0, 9])
def test_target_length_bounds(rng: np.random.Generator, length: int) -> None:
    denoiser = FakeOracleDenoiser([1], num_classes=4)

    with pytest.raises(ContractError):
        generate([1], length, denoiser, cosine_schedule(3), rng, max_len=8)


@pytest.mark.unit
def test_reverse_step_frequencies_follow_the_posterior() -> None:
    sched = cosine_schedule(10)
    y0_hat = CategoricalSeq(np.array([[0.6, 0.1], [0.3, 0.2], [0.1, 0.7]]))
    y_t = CategoricalSeq.one_hot([0, 2], 3)
    denoiser = FakeFixedDenoiser(y0_hat)
    expected = posterior(y_t, y0_hat, 4, sched).probs
    rng = np.random.default_rng(99)
    draws = 50_000

    counts = np.zeros_like(expected)
    for _ in range(draws):
        y_prev, _ = reverse_step(y_t, None, 4, sched, denoiser, rng)
        counts += y_prev.probs

    np.testing.assert_allclose(counts / draws, expected, atol=0.01)
