"""Optimisation loop for the diffusion denoiser.

One :func:`train_step` consumes a batch of tokenized (product, reactants)
pairs, accumulates per-record gradients on a fresh tape each and applies a
single Adam update. :class:`Trainer` wraps it in epochs, writing the metrics
CSV and a checkpoint after every epoch.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np
from tqdm import tqdm

from retrodiff.diffusion.categorical import CategoricalSeq, q_from_start, sample_categorical
from retrodiff.diffusion.schedule import NoiseSchedule, cosine_schedule
from retrodiff.errors import ContractError, NumericError
from retrodiff.net.checkpoint import save_checkpoint
from retrodiff.net.config import ModelConfig
from retrodiff.net.model import DiffusionTransformer
from retrodiff.observability import get_tracer
from retrodiff.smiles.vocab import Vocabulary
from retrodiff.tensor.autograd import Tape
from retrodiff.tensor.optim import Adam
from retrodiff.train.augment import clamp_delta, pad_augment
from retrodiff.train.data import corpus_strings, training_pairs
from retrodiff.train.losses import length_loss, mse_loss, predicted_start, vlb_loss
from retrodiff.train.timesteps import ScheduleSampler, get_sampler

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.config import Settings
    from retrodiff.train.data import ReactionRecord, TrainingPair

logger = logging.getLogger(__name__)

METRICS_FIELDS = ("epoch", "L_MSE", "L_VLB", "L_len", "total")
METRICS_FILE = "metrics.csv"


@dataclass(frozen=True, slots=True)
class LossBreakdown:
    """Batch means of each loss component; ``total`` includes the importance weight and lambdas."""

    mse: float = 0.0
    vlb: float = 0.0
    length: float = 0.0
    total: float = 0.0
    records: int = 0

    def row(self, epoch: int) -> dict[str, str]:
        values = (epoch, self.mse, self.vlb, self.length, self.total)
        return {name: repr(value) for name, value in zip(METRICS_FIELDS, values, strict=True)}

    @classmethod
    def combine(cls, parts: Sequence[LossBreakdown]) -> LossBreakdown:
        records = sum(part.records for part in parts)
        if not records:
            return cls()

        def mean(attr: str) -> float:
            return sum(getattr(part, attr) * part.records for part in parts) / records

        return cls(mean("mse"), mean("vlb"), mean("length"), mean("total"), records)


def train_step(
    model: DiffusionTransformer,
    batch: Sequence[TrainingPair],
    sched: NoiseSchedule,
    sampler: ScheduleSampler,
    optimizer: Adam,
    settings: Settings,
    rng: np.random.Generator,
    pad_id: int = 0,
) -> LossBreakdown:
    if not batch:
        raise ContractError("train_step needs a non-empty batch")
    config = model.config
    model.train()
    optimizer.zero_grad()

    sums = {"mse": 0.0, "vlb": 0.0, "length": 0.0, "total": 0.0}
    steps: list[int] = []
    vlbs: list[float] = []
    for index, pair in enumerate(batch):
        if len(pair.source_ids) + 1 > config.max_len:
            logger.warning(
                "source of %d tokens exceeds max_len %d, record skipped", len(pair.source_ids), config.max_len
            )
            continue
        padded = pad_augment(pair.target_ids, config.pad_limit, rng, len(pair.source_ids), config.max_len, pad_id)
        if padded is None:
            continue
        delta = clamp_delta(padded.delta, config.length_bound)
        t, weight = sampler.sample(rng)
        y0 = CategoricalSeq.one_hot(padded.ids, model.num_classes)
        y_t = sample_categorical(q_from_start(y0, t, sched), rng)
        try:
            with Tape():
                memory, length_logits = model.encode(pair.source_ids)
                y0_hat = predicted_start(model.decode(y_t, t, memory))
                vlb = vlb_loss(y0, y_t, y0_hat, t, sched)
                mse = mse_loss(y0, y0_hat, settings.mse_reading)
                length = length_loss(length_logits, delta, config.length_bound)
                total = vlb * weight + mse * settings.lambda_mse + length * settings.lambda_len
        except NumericError as exc:
            raise NumericError(f"record {index} of the batch: {exc}") from exc
        if not math.isfinite(total.item()):
            raise NumericError(f"non-finite loss {total.item()} at record {index} of the batch")
        total.backward()
        sums["mse"] += mse.item()
        sums["vlb"] += vlb.item()
        sums["length"] += length.item()
        sums["total"] += total.item()
        steps.append(t)
        vlbs.append(vlb.item())

    used = len(steps)
    if not used:
        logger.warning("every record of the batch was skipped, no update applied")
        return LossBreakdown()
    for param in optimizer.params:
        if param.grad is not None:
            param.grad /= used
    optimizer.step()
    sampler.update(steps, vlbs)
    return LossBreakdown(
        mse=sums["mse"] / used,
        vlb=sums["vlb"] / used,
        length=sums["length"] / used,
        total=sums["total"] / used,
        records=used,
    )


def write_metrics(rows: Sequence[dict[str, str]], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=METRICS_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return target


@dataclass
class TrainResult:
    output_dir: Path
    checkpoints: list[Path] = field(default_factory=list)
    metrics: list[dict[str, str]] = field(default_factory=list)

    @property
    def final_checkpoint(self) -> Path:
        if not self.checkpoints:
            raise ContractError("training produced no checkpoint")
        return self.checkpoints[-1]

    @property
    def final_loss(self) -> float:
        return float(self.metrics[-1]["total"]) if self.metrics else math.nan


class Trainer:
    """Owns one model, its optimizer and timestep sampler for a whole run."""

    def __init__(
        self,
        model: DiffusionTransformer,
        vocab: Vocabulary,
        settings: Settings,
        seed: int | None = None,
    ) -> None:
        if len(vocab) != model.num_classes:
            raise ContractError(f"vocabulary has {len(vocab)} tokens, model expects {model.num_classes}")
        self.model = model
        self.vocab = vocab
        self.settings = settings
        self.sched = cosine_schedule(model.config.steps)
        self.sampler = get_sampler(settings.timestep_sampling, model.config.steps)
        self.optimizer = Adam(model.parameters(), lr=settings.learning_rate)
        self.rng = np.random.default_rng([settings.seed if seed is None else seed, 1])

    def step(self, batch: Sequence[TrainingPair]) -> LossBreakdown:
        return train_step(
            self.model, batch, self.sched, self.sampler, self.optimizer, self.settings, self.rng, self.vocab.pad_id
        )

    def train_epoch(self, pairs: Sequence[TrainingPair], epoch: int = 0) -> LossBreakdown:
        order = self.rng.permutation(len(pairs))
        size = max(1, self.settings.batch_size)
        batches = [[pairs[i] for i in order[start : start + size]] for start in range(0, len(order), size)]
        parts = []
        progress = tqdm(batches, desc=f"epoch {epoch}", unit="batch", disable=not self.settings.progress)
        for batch in progress:
            breakdown = self.step(batch)
            parts.append(breakdown)
            progress.set_postfix(loss=f"{breakdown.total:.4f}")
        return LossBreakdown.combine(parts)

    def fit(self, records: Sequence[ReactionRecord], output_dir: str | Path) -> TrainResult:
        if not records:
            raise ContractError("no training records")
        result = TrainResult(Path(output_dir))
        tracer = get_tracer()
        for epoch in range(1, self.settings.epochs + 1):
            with tracer.start_as_current_span("train.epoch") as span:
                pairs = training_pairs(records, self.vocab, self.rng, self.settings.augment_factor)
                breakdown = self.train_epoch(pairs, epoch)
                span.set_attribute("retrodiff.epoch", epoch)
                span.set_attribute("retrodiff.loss.total", breakdown.total)
            result.metrics.append(breakdown.row(epoch))
            write_metrics(result.metrics, result.output_dir / METRICS_FILE)
            checkpoint = save_checkpoint(
                result.output_dir / f"epoch_{epoch:03d}.npz",
                self.model,
                self.vocab,
                {"epoch": epoch, "pad_limit": self.model.config.pad_limit, "mode": str(self.model.config.mode)},
            )
            result.checkpoints.append(checkpoint)
            logger.info(
                "epoch %d: total %.4f (vlb %.4f, mse %.4f, len %.4f) over %d records",
                epoch,
                breakdown.total,
                breakdown.vlb,
                breakdown.mse,
                breakdown.length,
                breakdown.records,
            )
        self.model.eval()
        return result


def build_vocabulary(records: Sequence[ReactionRecord]) -> Vocabulary:
    return Vocabulary.build(corpus_strings(records))


def train_model(
    records: Sequence[ReactionRecord],
    settings: Settings,
    output_dir: str | Path,
    vocab: Vocabulary | None = None,
    pad_limit: int | None = None,
    seed: int | None = None,
) -> TrainResult:
    """Train one model from scratch; ``pad_limit`` overrides the settings' N."""
    vocab = vocab or build_vocabulary(records)
    run_seed = settings.seed if seed is None else seed
    config = ModelConfig.from_settings(settings, len(vocab), pad_limit=pad_limit)
    model = DiffusionTransformer(config, seed=run_seed)
    return Trainer(model, vocab, settings, seed=run_seed).fit(records, output_dir)


def train_ensemble(
    records: Sequence[ReactionRecord],
    settings: Settings,
    output_dir: str | Path,
) -> dict[int, TrainResult]:
    """One model per pad limit into ``model_N{N}``; all members share a vocabulary."""
    limits = settings.ensemble_pad_limits
    if not limits:
        raise ContractError("ensemble training needs at least one pad limit")
    vocab = build_vocabulary(records)
    results: dict[int, TrainResult] = {}
    for offset, limit in enumerate(limits):
        logger.info("training ensemble member N=%d (%d of %d)", limit, offset + 1, len(limits))
        results[limit] = train_model(
            records,
            settings,
            Path(output_dir) / f"model_N{limit}",
            vocab=vocab,
            pad_limit=limit,
            seed=settings.seed + offset,
        )
    return results
