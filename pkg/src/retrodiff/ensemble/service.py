from __future__ import annotations

import asyncio
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
from tqdm import tqdm

from retrodiff.config import RunMode
from retrodiff.diffusion.sampling import generate
from retrodiff.diffusion.schedule import cosine_schedule
from retrodiff.ensemble.metrics import TOP_KS, candidate_stats, topk_accuracy, validity
from retrodiff.ensemble.models import CandidateRanking, EnsembleMember, Sample
from retrodiff.ensemble.report import EvalRow
from retrodiff.ensemble.voting import aggregate
from retrodiff.errors import AlignmentError, ContractError, InputError
from retrodiff.net.checkpoint import load_checkpoint
from retrodiff.observability import get_tracer
from retrodiff.smiles.align import random_root_align
from retrodiff.smiles.canon import canonical, try_canonical_set
from retrodiff.smiles.models import strip_atom_maps
from retrodiff.smiles.writer import random_rooted

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from retrodiff.diffusion.schedule import NoiseSchedule
    from retrodiff.ensemble.metrics import CandidateStats
    from retrodiff.net.model import DiffusionTransformer
    from retrodiff.smiles.models import MolGraph
    from retrodiff.smiles.vocab import Vocabulary
    from retrodiff.train.data import ReactionRecord

logger = logging.getLogger(__name__)

ENSEMBLE_LABEL = "ensemble"


def _oracle_strings(product: MolGraph, reactants: MolGraph, rng: np.random.Generator) -> tuple[str, str]:
    if any(atom.atom_map is not None for atom in product.atoms):
        try:
            return random_root_align(product, reactants, rng)
        except AlignmentError:
            logger.debug("root alignment failed, oracle length taken from canonical reactants")
    return random_rooted(strip_atom_maps(product), rng), canonical(strip_atom_maps(reactants))


def sample_candidates(
    model: DiffusionTransformer,
    vocab: Vocabulary,
    product: MolGraph,
    n_aug: int,
    rng: np.random.Generator,
    samples_per_aug: int = 1,
    model_id: str = "model",
    mode: RunMode | None = None,
    oracle_length: int | None = None,
    reactants: MolGraph | None = None,
    sched: NoiseSchedule | None = None,
) -> list[Sample]:
    """Generate ``n_aug * samples_per_aug`` samples from randomly rooted product strings.

    In oracle-length mode the noise length is ``oracle_length`` when given,
    otherwise the token length of the reactants written aligned to the same
    product rooting.
    """
    if n_aug < 1 or samples_per_aug < 1:
        raise ContractError(f"need n_aug >= 1 and samples_per_aug >= 1, got {n_aug} and {samples_per_aug}")
    config = model.config
    mode = mode or config.mode
    oracle = mode == RunMode.ORACLE_LENGTH
    if oracle and oracle_length is None and reactants is None:
        raise InputError("oracle-length sampling needs the true reactants or an explicit length")
    sched = sched or cosine_schedule(config.steps)

    samples: list[Sample] = []
    for _ in range(n_aug):
        target: int | None = None
        if oracle and oracle_length is None:
            product_text, reactant_text = _oracle_strings(product, reactants, rng)
            target = len(vocab.encode(reactant_text))
        else:
            product_text = random_rooted(strip_atom_maps(product), rng)
            target = oracle_length if oracle else None
        ids = vocab.encode(product_text)
        if len(ids) + 1 > config.max_len:
            logger.warning("product of %d tokens exceeds max_len %d", len(ids), config.max_len)
            samples.extend(Sample(model_id=model_id, text="") for _ in range(samples_per_aug))
            continue
        for _ in range(samples_per_aug):
            length = target if target is not None else model.predict_length(ids, rng=rng)
            length = min(max(length, 1), config.max_len)
            text = vocab.decode(generate(ids, length, model, sched, rng, config.max_len, vocab.pad_id))
            samples.append(Sample(model_id=model_id, text=text, reactants=try_canonical_set(text)))
    return samples


@dataclass
class LoadedMember:
    member: EnsembleMember
    model: DiffusionTransformer
    vocab: Vocabulary

    @property
    def model_id(self) -> str:
        return self.member.model_id


def load_members(paths: Sequence[str | Path]) -> list[LoadedMember]:
    if not paths:
        raise InputError("at least one checkpoint is required")
    members: list[LoadedMember] = []
    seen: Counter[str] = Counter()
    for path in paths:
        model, vocab, _ = load_checkpoint(path)
        label = f"N{model.config.pad_limit}"
        seen[label] += 1
        if seen[label] > 1:
            label = f"{label}#{seen[label]}"
        member = EnsembleMember(model_id=label, pad_limit=model.config.pad_limit, path=str(path))
        members.append(LoadedMember(member, model, vocab))
    logger.info("loaded %d ensemble members: %s", len(members), ", ".join(m.model_id for m in members))
    return members


@dataclass
class Evaluation:
    rows: list[EvalRow]
    stats: CandidateStats
    rankings: list[CandidateRanking]
    truths: list[str]
    accuracy: dict[int, float] = field(default_factory=dict)
    failures: dict[str, int] = field(default_factory=dict)


class EnsembleService:
    """Runs every member on the same product and votes over the pooled samples."""

    def __init__(self, members: Sequence[LoadedMember], n_aug: int = 20, samples_per_aug: int = 1) -> None:
        if not members:
            raise ContractError("an ensemble needs at least one member")
        if n_aug < 1 or samples_per_aug < 1:
            raise ContractError(f"need n_aug >= 1 and samples_per_aug >= 1, got {n_aug} and {samples_per_aug}")
        self._members = list(members)
        self._n_aug = n_aug
        self._samples_per_aug = samples_per_aug
        self._schedules = {m.model_id: cosine_schedule(m.model.config.steps) for m in self._members}

    @property
    def members(self) -> list[LoadedMember]:
        return self._members

    async def sample(
        self,
        product: MolGraph,
        seed: int | np.random.SeedSequence,
        mode: RunMode | None = None,
        oracle_length: int | None = None,
        reactants: MolGraph | None = None,
    ) -> list[dict]:
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        rngs = [np.random.default_rng(child) for child in root.spawn(len(self._members))]

        async def _safe_sample(index: int, member: LoadedMember) -> dict:
            try:
                result = await asyncio.to_thread(
                    sample_candidates,
                    member.model,
                    member.vocab,
                    product,
                    self._n_aug,
                    rngs[index],
                    self._samples_per_aug,
                    member.model_id,
                    mode,
                    oracle_length,
                    reactants,
                    self._schedules[member.model_id],
                )
                return {"index": index, "success": True, "result": result, "error": None}
            except Exception as exc:
                logger.exception("sampling failed for member %s", member.model_id)
                return {"index": index, "success": False, "result": None, "error": str(exc)}

        with get_tracer().start_as_current_span("ensemble.sample") as span:
            span.set_attribute("retrodiff.members", len(self._members))
            tasks = [_safe_sample(i, member) for i, member in enumerate(self._members)]
            return list(await asyncio.gather(*tasks))

    @staticmethod
    def pooled(results: Sequence[dict]) -> list[Sample]:
        return [sample for entry in results if entry["success"] for sample in entry["result"]]

    async def rank(
        self,
        product: MolGraph,
        seed: int,
        mode: RunMode | None = None,
        oracle_length: int | None = None,
    ) -> CandidateRanking:
        results = await self.sample(product, seed, mode, oracle_length)
        failed = [entry for entry in results if not entry["success"]]
        if len(failed) == len(results):
            raise ContractError(f"every ensemble member failed: {failed[0]['error']}")
        return aggregate(self.pooled(results))[0]

    async def evaluate(
        self,
        records: Sequence[ReactionRecord],
        seed: int,
        mode: RunMode | None = None,
        progress: bool = False,
    ) -> Evaluation:
        """Top-k table for each member on its own and for the pooled ensemble."""
        oracle = mode == RunMode.ORACLE_LENGTH
        individual: dict[str, list[CandidateRanking]] = {m.model_id: [] for m in self._members}
        individual_samples: dict[str, list[Sample]] = {m.model_id: [] for m in self._members}
        pooled_rankings: list[CandidateRanking] = []
        pooled_samples: list[Sample] = []
        truths: list[str] = []
        failures: Counter[str] = Counter()
        with get_tracer().start_as_current_span("ensemble.evaluate") as span:
            span.set_attribute("retrodiff.reactions", len(records))
            for index, record in enumerate(tqdm(records, desc="eval", unit="rxn", disable=not progress)):
                truths.append(canonical(strip_atom_maps(record.reactants)))
                results = await self.sample(
                    record.product,
                    np.random.SeedSequence([seed, index]),
                    mode,
                    reactants=record.reactants if oracle else None,
                )
                if not any(entry["success"] for entry in results):
                    raise ContractError(f"every ensemble member failed on reaction {index}: {results[0]['error']}")
                for member, entry in zip(self._members, results, strict=True):
                    if not entry["success"]:
                        failures[member.model_id] += 1
                        continue
                    individual[member.model_id].append(aggregate(entry["result"])[0])
                    individual_samples[member.model_id].extend(entry["result"])
                samples = self.pooled(results)
                pooled_rankings.append(aggregate(samples)[0])
                pooled_samples.extend(samples)
            span.set_attribute("retrodiff.member_failures", sum(failures.values()))

        rows: list[EvalRow] = []
        for member in self._members:
            label = member.model_id
            if failures[label]:
                logger.warning("member %s failed on %d of %d reactions", label, failures[label], len(records))
                rows.append(EvalRow.failed(label, failures[label]))
            else:
                rows.append(self._row(label, individual[label], individual_samples[label], truths))
        if len(self._members) > 1:
            rows.append(self._row(ENSEMBLE_LABEL, pooled_rankings, pooled_samples, truths))
        return Evaluation(
            rows=rows,
            stats=candidate_stats(pooled_rankings, truths),
            rankings=pooled_rankings,
            truths=truths,
            accuracy=topk_accuracy(pooled_rankings, truths, TOP_KS),
            failures=dict(failures),
        )

    @staticmethod
    def _row(label: str, rankings: list[CandidateRanking], samples: list[Sample], truths: list[str]) -> EvalRow:
        accuracy = topk_accuracy(rankings, truths, TOP_KS)
        average = float(np.mean([len(r) for r in rankings])) if rankings else 0.0
        return EvalRow.from_metrics(label, accuracy, validity(samples), average)
