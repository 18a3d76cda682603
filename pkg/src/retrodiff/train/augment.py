from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from retrodiff.errors import ContractError

if TYPE_CHECKING:
    from collections.abc import Sequence

    import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class PaddedTarget:
    ids: list[int]
    pads: int
    delta: int


def clamp_delta(delta: int, bound: int) -> int:
    if abs(delta) <= bound:
        return delta
    clamped = max(-bound, min(bound, delta))
    logger.warning("length delta %d outside +-%d, clamped to %d", delta, bound, clamped)
    return clamped


def pad_augment(
    y0_ids: Sequence[int],
    pad_limit: int,
    rng: np.random.Generator,
    source_length: int,
    max_len: int,
    pad_id: int = 0,
) -> PaddedTarget | None:
    """Append ``n ~ U{1..pad_limit}`` PAD tokens to a training target.

    The returned delta is the padded one, ``(len(y0) + n) - source_length``.
    ``pad_limit = 0`` appends nothing and labels the true delta. Returns
    ``None`` (and logs) when the padded target would exceed ``max_len``.
    """
    if pad_limit < 0:
        raise ContractError(f"pad limit must be >= 0, got {pad_limit}")
    pads = int(rng.integers(1, pad_limit + 1)) if pad_limit > 0 else 0
    length = len(y0_ids) + pads
    if length > max_len:
        logger.warning("padded target of %d tokens exceeds max_len %d, record skipped", length, max_len)
        return None
    return PaddedTarget(ids=[*y0_ids, *([pad_id] * pads)], pads=pads, delta=length - source_length)
