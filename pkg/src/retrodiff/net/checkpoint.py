"""Checkpoint container.

An uncompressed ``.npz`` archive: one little-endian float64 array per named
parameter plus ``__meta__``, a UTF-8 JSON document (stored as a uint8 array)
with the format version, the :class:`ModelConfig` and the vocabulary tokens.
"""

from __future__ import annotations

import json
import logging
import zipfile
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import ValidationError

from retrodiff.errors import CheckpointError, CheckpointVersionError
from retrodiff.net.config import ModelConfig
from retrodiff.net.model import DiffusionTransformer, init_params
from retrodiff.smiles.vocab import Vocabulary
from retrodiff.tensor.autograd import Tensor

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = "differ-ckpt-v1"
META_KEY = "__meta__"


def save_checkpoint(
    path: str | Path,
    model: DiffusionTransformer,
    vocab: Vocabulary,
    extra: dict[str, Any] | None = None,
) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "version": CHECKPOINT_VERSION,
        "config": model.config.model_dump(mode="json"),
        "vocab": list(vocab.tokens),
        "extra": extra or {},
    }
    arrays = {name: np.ascontiguousarray(param.data, dtype="<f8") for name, param in model.params.items()}
    arrays[META_KEY] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with target.open("wb") as handle:
        np.savez(handle, **arrays)
    logger.debug("saved checkpoint %s (%d arrays)", target, len(arrays) - 1)
    return target


def read_meta(path: str | Path) -> dict[str, Any]:
    return _load(path)[0]


def _load(path: str | Path) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    source = Path(path)
    if not source.is_file():
        raise CheckpointError(f"checkpoint {source} does not exist")
    try:
        with np.load(source, allow_pickle=False) as archive:
            if META_KEY not in archive.files:
                raise CheckpointVersionError(f"checkpoint {source} has no format metadata")
            meta = json.loads(archive[META_KEY].tobytes().decode("utf-8"))
            arrays = {name: archive[name] for name in archive.files if name != META_KEY}
    except CheckpointError:
        raise
    except (OSError, ValueError, EOFError, KeyError, zipfile.BadZipFile, UnicodeDecodeError) as exc:
        raise CheckpointError(f"checkpoint {source} is corrupt or truncated: {exc}") from exc
    version = meta.get("version") if isinstance(meta, dict) else None
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(f"checkpoint {source} has version {version!r}, expected {CHECKPOINT_VERSION!r}")
    return meta, arrays


def load_checkpoint(path: str | Path) -> tuple[DiffusionTransformer, Vocabulary, dict[str, Any]]:
    """Return the model (in eval mode), its vocabulary and the extra metadata saved with it."""
    meta, arrays = _load(path)
    try:
        config = ModelConfig.model_validate(meta["config"])
        vocab = Vocabulary(meta["vocab"])
    except (KeyError, ValidationError) as exc:
        raise CheckpointError(f"checkpoint {path} has invalid metadata: {exc}") from exc

    expected = init_params(config, np.random.default_rng(0))
    if set(expected) != set(arrays):
        missing = sorted(set(expected) - set(arrays))
        unexpected = sorted(set(arrays) - set(expected))
        raise CheckpointError(f"checkpoint {path} parameter mismatch: missing {missing}, unexpected {unexpected}")
    params: dict[str, Tensor] = {}
    for name, template in expected.items():
        data = arrays[name]
        if data.shape != template.shape:
            raise CheckpointError(f"checkpoint {path}: {name} has shape {data.shape}, expected {template.shape}")
        params[name] = Tensor(data, requires_grad=True, name=name)
    if len(vocab) != config.num_classes:
        raise CheckpointError(f"checkpoint {path}: vocabulary size {len(vocab)} != num_classes {config.num_classes}")
    model = DiffusionTransformer(config, params=params)
    return model.eval(), vocab, meta.get("extra", {})
