from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from retrodiff.errors import AlignmentError, DatasetError, RetrodiffError
from retrodiff.smiles.align import random_root_align
from retrodiff.smiles.canon import canonical
from retrodiff.smiles.models import MolGraph, strip_atom_maps
from retrodiff.smiles.parser import parse_smiles

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    import numpy as np

    from retrodiff.smiles.vocab import Vocabulary

logger = logging.getLogger(__name__)

MALFORMED_LIMIT = 0.10


@dataclass(frozen=True)
class ReactionRecord:
    reactants: MolGraph
    product: MolGraph
    reactants_text: str
    product_text: str

    @property
    def is_mapped(self) -> bool:
        return any(atom.atom_map is not None for atom in self.product.atoms)

    def line(self) -> str:
        return f"{self.reactants_text}>>{self.product_text}"


@dataclass(frozen=True, slots=True)
class MalformedLine:
    line_number: int
    text: str
    reason: str


@dataclass(frozen=True, slots=True)
class TrainingPair:
    source_ids: list[int]
    target_ids: list[int]


def parse_reaction(line: str) -> ReactionRecord:
    fields = line.split()
    if not fields:
        raise DatasetError("empty reaction line")
    parts = fields[0].split(">")
    if len(parts) != 3:
        raise DatasetError("expected 'reactants>>product' or 'reactants>reagents>product'")
    reactants_text, _, product_text = parts
    if not reactants_text or not product_text:
        raise DatasetError("reaction has an empty side")
    reactants = parse_smiles(reactants_text)
    product = parse_smiles(product_text)
    reactant_maps = reactants.atom_maps()
    missing = sorted(
        atom.atom_map for atom in product.atoms if atom.atom_map is not None and atom.atom_map not in reactant_maps
    )
    if missing:
        raise DatasetError(f"product atom maps {missing} do not appear in the reactants")
    return ReactionRecord(reactants, product, reactants_text, product_text)


def read_reactions(path: str | Path) -> tuple[list[ReactionRecord], list[MalformedLine]]:
    source = Path(path)
    try:
        text = source.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read dataset {source}: {exc}") from exc
    records: list[ReactionRecord] = []
    malformed: list[MalformedLine] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            records.append(parse_reaction(line))
        except RetrodiffError as exc:
            malformed.append(MalformedLine(number, line, str(exc)))
    return records, malformed


def load_dataset(path: str | Path) -> list[ReactionRecord]:
    """Load reaction records; more than 10% malformed lines is an error."""
    records, malformed = read_reactions(path)
    total = len(records) + len(malformed)
    for entry in malformed:
        logger.warning("%s:%d malformed reaction (%s)", path, entry.line_number, entry.reason)
    if total and len(malformed) / total > MALFORMED_LIMIT:
        raise DatasetError(f"{len(malformed)} of {total} lines in {path} are malformed")
    logger.info("loaded %d reactions from %s", len(records), path)
    return records


def write_dataset(records: Iterable[ReactionRecord], path: str | Path) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(record.line() + "\n")
    return target


def reaction_strings(record: ReactionRecord, rng: np.random.Generator | None) -> tuple[str, str]:
    """One (product, reactants) string pair for training.

    Mapped records are root-aligned from a random product atom; unmapped ones
    fall back to canonical strings.
    """
    if record.is_mapped and rng is not None:
        try:
            return random_root_align(record.product, record.reactants, rng)
        except AlignmentError:
            logger.debug("root alignment failed for %s, using canonical strings", record.line())
    return canonical(strip_atom_maps(record.product)), canonical(strip_atom_maps(record.reactants))


def training_pairs(
    records: Sequence[ReactionRecord],
    vocab: Vocabulary,
    rng: np.random.Generator,
    augment_factor: int = 1,
) -> list[TrainingPair]:
    pairs: list[TrainingPair] = []
    for record in records:
        for _ in range(max(1, augment_factor)):
            product_text, reactants_text = reaction_strings(record, rng)
            pairs.append(TrainingPair(vocab.encode(product_text), vocab.encode(reactants_text)))
    return pairs


def corpus_strings(records: Iterable[ReactionRecord]) -> list[str]:
    """Canonical strings of both sides, used to build the vocabulary."""
    out: list[str] = []
    for record in records:
        out.append(canonical(strip_atom_maps(record.product)))
        out.append(canonical(strip_atom_maps(record.reactants)))
    return out
