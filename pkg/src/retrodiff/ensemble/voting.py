"""Occurrence ranking of sampled reactant sets with instant-runoff tie-breaking."""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from typing import TYPE_CHECKING

from retrodiff.ensemble.models import Ballot, CandidateRanking, RankedCandidate

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from retrodiff.ensemble.models import Sample

logger = logging.getLogger(__name__)


def _by_count(counts: Counter[str]) -> list[str]:
    return sorted(counts, key=lambda candidate: (-counts[candidate], candidate))


def build_ballots(samples: Iterable[Sample]) -> list[Ballot]:
    """One ballot per model, ranked by that model's own counts, ties lexicographic."""
    per_model: dict[str, Counter[str]] = defaultdict(Counter)
    for sample in samples:
        tally = per_model[sample.model_id]
        if sample.reactants is not None:
            tally[sample.reactants] += 1
    return [Ballot(model_id=model_id, candidates=_by_count(per_model[model_id])) for model_id in sorted(per_model)]


def break_ties(tied: Iterable[str], ballots: Sequence[Ballot]) -> list[str]:
    """Instant runoff restricted to ``tied``.

    Each round counts the first remaining choice of every ballot and drops
    all candidates with the fewest; later-eliminated candidates rank higher.
    Candidates dropped in the same round are ordered by a runoff among
    themselves, and by their string when the ballots cannot separate them.
    """
    remaining = set(tied)
    rounds: list[list[str]] = []
    while remaining:
        firsts = dict.fromkeys(remaining, 0)
        for ballot in ballots:
            choice = next((candidate for candidate in ballot.candidates if candidate in remaining), None)
            if choice is not None:
                firsts[choice] += 1
        fewest = min(firsts.values())
        losers = {candidate for candidate, votes in firsts.items() if votes == fewest}
        if len(losers) == len(remaining):
            rounds.append(sorted(losers))
        elif len(losers) > 1:
            rounds.append(break_ties(losers, ballots))
        else:
            rounds.append(list(losers))
        remaining -= losers
    return [candidate for eliminated in reversed(rounds) for candidate in eliminated]


def rank_candidates(counts: Counter[str], ballots: Sequence[Ballot], total_samples: int) -> list[RankedCandidate]:
    by_count: dict[int, list[str]] = defaultdict(list)
    for candidate, count in counts.items():
        by_count[count].append(candidate)
    ranked: list[RankedCandidate] = []
    for count in sorted(by_count, reverse=True):
        group = by_count[count]
        ordered = break_ties(group, ballots) if len(group) > 1 else group
        ranked.extend(RankedCandidate(reactants=c, count=count, frequency=count / total_samples) for c in ordered)
    return ranked


def aggregate(samples: Sequence[Sample]) -> tuple[CandidateRanking, list[Ballot]]:
    """Global occurrence ranking over every model's samples plus the per-model ballots.

    Frequencies are counts over all samples, invalid ones included, so they
    sum to the validity fraction.
    """
    ballots = build_ballots(samples)
    counts = Counter(sample.reactants for sample in samples if sample.reactants is not None)
    valid = sum(counts.values())
    if not valid:
        logger.warning("no valid sample among %d, ranking is empty", len(samples))
        return CandidateRanking(total_samples=len(samples)), ballots
    ranking = CandidateRanking(
        entries=rank_candidates(counts, ballots, len(samples)),
        total_samples=len(samples),
        valid_samples=valid,
    )
    return ranking, ballots


def final_order(samples: Sequence[Sample]) -> list[str]:
    return aggregate(samples)[0].candidates
