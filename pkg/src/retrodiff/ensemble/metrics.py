from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.errors import ContractError
from retrodiff.smiles.canon import try_canonical_set

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from retrodiff.ensemble.models import CandidateRanking, Sample

TOP_KS = (1, 3, 5, 10)


def rank_of(ranking: CandidateRanking, truth: str) -> int | None:
    """1-based position of ``truth`` (already canonical) in the ranking."""
    for position, entry in enumerate(ranking.entries, start=1):
        if entry.reactants == truth:
            return position
    return None


def topk_accuracy(
    rankings: Sequence[CandidateRanking],
    truths: Sequence[str],
    ks: Iterable[int] = TOP_KS,
) -> dict[int, float]:
    """Fraction of reactions whose canonical ground-truth set is among the first k candidates."""
    ks = tuple(ks)
    if len(rankings) != len(truths):
        raise ContractError(f"{len(rankings)} rankings for {len(truths)} ground truths")
    if not rankings:
        return dict.fromkeys(ks, 0.0)
    positions = [
        rank_of(ranking, try_canonical_set(truth) or truth) for ranking, truth in zip(rankings, truths, strict=True)
    ]
    return {k: sum(1 for p in positions if p is not None and p <= k) / len(positions) for k in ks}


def validity(samples: Sequence[Sample]) -> float:
    if not samples:
        return 0.0
    return sum(1 for sample in samples if sample.valid) / len(samples)


@dataclass(frozen=True, slots=True)
class CandidateStats:
    """Distribution of distinct candidates per reaction."""

    mean: float
    median: float
    below_5: float
    below_10: float
    mean_when_correct: float
    mean_when_incorrect: float


def candidate_stats(rankings: Sequence[CandidateRanking], truths: Sequence[str]) -> CandidateStats:
    if not rankings:
        return CandidateStats(*(float("nan"),) * 6)
    sizes = np.array([len(ranking) for ranking in rankings], dtype=np.float64)
    correct = np.array(
        [
            rank_of(ranking, try_canonical_set(truth) or truth) == 1
            for ranking, truth in zip(rankings, truths, strict=True)
        ]
    )

    def mean_of(mask: np.ndarray) -> float:
        return float(sizes[mask].mean()) if mask.any() else float("nan")

    return CandidateStats(
        mean=float(sizes.mean()),
        median=float(np.median(sizes)),
        below_5=float((sizes < 5).mean()),
        below_10=float((sizes < 10).mean()),
        mean_when_correct=mean_of(correct),
        mean_when_incorrect=mean_of(~correct),
    )
