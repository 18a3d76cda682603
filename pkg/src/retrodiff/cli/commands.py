"""Implementations behind the ``retrodiff`` subcommands.

Each command returns what it produced so tests can call it without a shell;
:mod:`retrodiff.cli.main` handles argument parsing and exit codes.
"""

from __future__ import annotations

import asyncio
import logging
from pathlib import Path
from typing import TYPE_CHECKING

from retrodiff.cli.manifest import ModelRun, RunManifest, dataset_fingerprint
from retrodiff.config import RunMode, load_settings
from retrodiff.ensemble.report import format_eval_table, format_ranking
from retrodiff.ensemble.service import EnsembleService, load_members
from retrodiff.errors import ConfigError, InputError, LexError, ParseError
from retrodiff.smiles.parser import parse_smiles
from retrodiff.train.data import load_dataset, write_dataset
from retrodiff.train.synth import synth_dataset
from retrodiff.train.trainer import train_ensemble, train_model

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.smiles.models import MolGraph

logger = logging.getLogger(__name__)

EVAL_FILE = "eval.tsv"
MODE_FLAGS = {
    "variant": RunMode.VARIANT_PAD,
    "baseline": RunMode.BASELINE_LENGTH,
    "oracle": RunMode.ORACLE_LENGTH,
}


def _require_positive(**values: int) -> None:
    for name, value in values.items():
        if value < 1:
            raise InputError(f"--{name.replace('_', '-')} must be >= 1, got {value}")


def cmd_train(config_path: str | Path) -> RunManifest:
    settings = load_settings(config_path)
    if not settings.train_path:
        raise ConfigError("config sets no train_path")
    records = load_dataset(settings.train_path)
    output_dir = Path(settings.output_dir)
    manifest = RunManifest(
        config=settings.model_dump(mode="json"),
        seed=settings.seed,
        dataset_sha256=dataset_fingerprint(settings.train_path),
    )
    if settings.ensemble_pad_limits:
        for limit, result in train_ensemble(records, settings, output_dir).items():
            checkpoints = [str(p) for p in result.checkpoints]
            manifest.runs.append(ModelRun(pad_limit=limit, checkpoints=checkpoints, metrics=result.metrics))
    else:
        result = train_model(records, settings, output_dir)
        manifest.runs.append(
            ModelRun(
                pad_limit=settings.effective_pad_limit,
                checkpoints=[str(p) for p in result.checkpoints],
                metrics=result.metrics,
            )
        )
    path = manifest.write(output_dir)
    logger.info("training finished, manifest at %s", path)
    return manifest


def parse_product(smiles: str) -> MolGraph:
    try:
        return parse_smiles(smiles)
    except (LexError, ParseError) as exc:
        raise InputError(f"cannot read product {smiles!r}: {exc}") from exc


def cmd_sample(
    checkpoints: Sequence[str | Path],
    product: str,
    seed: int = 0,
    n_aug: int = 20,
    samples_per_aug: int = 1,
    oracle_length: int | None = None,
) -> str:
    _require_positive(n_aug=n_aug, samples_per_aug=samples_per_aug)
    graph = parse_product(product)
    if oracle_length is not None and oracle_length < 1:
        raise InputError(f"oracle length must be >= 1, got {oracle_length}")
    service = EnsembleService(load_members(checkpoints), n_aug=n_aug, samples_per_aug=samples_per_aug)
    mode = RunMode.ORACLE_LENGTH if oracle_length is not None else RunMode.VARIANT_PAD
    ranking = asyncio.run(service.rank(graph, seed, mode, oracle_length))
    return format_ranking(ranking)


def cmd_eval(
    checkpoints: Sequence[str | Path],
    test_path: str | Path,
    mode: RunMode = RunMode.VARIANT_PAD,
    seed: int = 0,
    n_aug: int = 20,
    samples_per_aug: int = 1,
    output_dir: str | Path | None = None,
    progress: bool = False,
) -> str:
    _require_positive(n_aug=n_aug, samples_per_aug=samples_per_aug)
    records = load_dataset(test_path)
    if not records:
        raise InputError(f"test file {test_path} holds no reactions")
    service = EnsembleService(load_members(checkpoints), n_aug=n_aug, samples_per_aug=samples_per_aug)
    evaluation = asyncio.run(service.evaluate(records, seed, mode, progress=progress))
    table = format_eval_table(evaluation.rows, evaluation.stats)
    if output_dir is not None:
        target = Path(output_dir) / EVAL_FILE
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(table, encoding="utf-8")
        logger.info("evaluation table written to %s", target)
    return table


def cmd_synth(out: str | Path, n_records: int, seed: int = 0) -> Path:
    _require_positive(n=n_records)
    return write_dataset(synth_dataset(n_records, seed), out)
