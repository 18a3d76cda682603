"""Synthetic single-step reactions for desk-scale experiments.

Each record is built product-first: a random acyclic C/O/N scaffold is
assembled around one reaction center, then the coupling bond is cut and a
leaving group is attached to the electrophile to obtain the reactants. All
product atoms are mapped; the electrophile carries map 1, the nucleophile map
2, and the leaving group is unmapped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import StrEnum

import numpy as np

from retrodiff.errors import ContractError
from retrodiff.smiles.canon import canonical
from retrodiff.smiles.models import Atom, Bond, BondOrder, MolGraph, strip_atom_maps
from retrodiff.smiles.writer import write
from retrodiff.train.data import ReactionRecord

logger = logging.getLogger(__name__)

MIN_ATOMS = 4
MAX_ATOMS = 12
ELECTROPHILE_MAP = 1
NUCLEOPHILE_MAP = 2

_CAPACITY = {"C": 4, "N": 3, "O": 2}
_ELEMENT_CHOICES = ("C", "C", "C", "C", "C", "O", "N")


class Template(StrEnum):
    ESTER = "ester"
    AMIDE = "amide"
    AMINE_ALKYLATION = "amine-alkylation"


@dataclass(frozen=True, slots=True)
class _Center:
    head: tuple[str, ...]
    head_bonds: tuple[tuple[int, int, BondOrder], ...]
    electrophile: int
    nucleophile: str
    leaving: str


_CENTERS = {
    # acyl carbon, carbonyl oxygen; nucleophile O or N follows
    Template.ESTER: _Center(("C", "O"), ((0, 1, BondOrder.DOUBLE),), 0, "O", "O"),
    Template.AMIDE: _Center(("C", "O"), ((0, 1, BondOrder.DOUBLE),), 0, "N", "O"),
    Template.AMINE_ALKYLATION: _Center((), (), -1, "N", "Br"),
}


def _fragment(size: int, rng: np.random.Generator) -> tuple[list[str], list[tuple[int, int]]]:
    """Random tree; atom 0 is a carbon with one bond kept free for attachment."""
    elements = ["C"]
    degree = [1]
    bonds: list[tuple[int, int]] = []
    for index in range(1, size):
        element = _ELEMENT_CHOICES[int(rng.integers(len(_ELEMENT_CHOICES)))]
        if element == "C":
            parents = [j for j, e in enumerate(elements) if degree[j] < _CAPACITY[e]]
        else:
            parents = [j for j, e in enumerate(elements) if e == "C" and degree[j] < _CAPACITY[e]]
        if not parents:
            element = "C"
            parents = [j for j, e in enumerate(elements) if degree[j] < _CAPACITY[e]]
        parent = parents[int(rng.integers(len(parents)))]
        elements.append(element)
        degree.append(1)
        degree[parent] += 1
        bonds.append((parent, index))
    return elements, bonds


def _assemble(template: Template, total: int, rng: np.random.Generator) -> tuple[MolGraph, MolGraph]:
    center = _CENTERS[template]
    side_atoms = total - len(center.head) - 1
    left_size = int(rng.integers(1, side_atoms))
    left, left_bonds = _fragment(left_size, rng)
    right, right_bonds = _fragment(side_atoms - left_size, rng)

    elements = list(left)
    bonds: list[tuple[int, int, BondOrder]] = [(a, b, BondOrder.SINGLE) for a, b in left_bonds]
    head_offset = len(elements)
    elements.extend(center.head)
    bonds.extend((a + head_offset, b + head_offset, order) for a, b, order in center.head_bonds)
    if center.head:
        bonds.append((0, head_offset, BondOrder.SINGLE))
        electrophile = head_offset + center.electrophile
    else:
        electrophile = 0
    nucleophile = len(elements)
    elements.append(center.nucleophile)
    right_offset = len(elements)
    elements.extend(right)
    bonds.extend((a + right_offset, b + right_offset, BondOrder.SINGLE) for a, b in right_bonds)
    bonds.append((nucleophile, right_offset, BondOrder.SINGLE))

    maps = {electrophile: ELECTROPHILE_MAP, nucleophile: NUCLEOPHILE_MAP}
    next_map = NUCLEOPHILE_MAP + 1
    for index in range(len(elements)):
        if index not in maps:
            maps[index] = next_map
            next_map += 1
    atoms = [Atom(element, atom_map=maps[index]) for index, element in enumerate(elements)]

    coupling = (electrophile, nucleophile, BondOrder.SINGLE)
    product = MolGraph(tuple(atoms), tuple(Bond(a, b, order) for a, b, order in [*bonds, coupling]))
    leaving = len(atoms)
    reactants = MolGraph(
        (*atoms, Atom(center.leaving)),
        tuple(Bond(a, b, order) for a, b, order in [*bonds, (electrophile, leaving, BondOrder.SINGLE)]),
    )
    return product, reactants


def apply_forward(reactants: MolGraph) -> MolGraph:
    """Couple the map-1 electrophile with the map-2 nucleophile, dropping the electrophile's unmapped leaving group."""
    maps = reactants.atom_maps()
    if ELECTROPHILE_MAP not in maps or NUCLEOPHILE_MAP not in maps:
        raise ContractError("reactants lack the reaction-center atom maps")
    electrophile, nucleophile = maps[ELECTROPHILE_MAP], maps[NUCLEOPHILE_MAP]
    leaving = [
        other for other, _ in reactants.neighbors(electrophile) if reactants.atoms[other].atom_map is None
    ]
    if len(leaving) != 1:
        raise ContractError(f"expected one leaving group on the electrophile, found {len(leaving)}")
    atoms = list(reactants.atoms)
    spec = atoms[nucleophile]
    if spec.explicit_h:
        atoms[nucleophile] = replace(spec, explicit_h=spec.explicit_h - 1)
    coupled = MolGraph(tuple(atoms), (*reactants.bonds, Bond(electrophile, nucleophile)))
    return coupled.subgraph(index for index in range(len(atoms)) if index != leaving[0])


def synth_dataset(n_records: int, seed: int) -> list[ReactionRecord]:
    """Deterministic mapped reactions over the ester, amide and amine-alkylation templates."""
    if n_records < 1:
        raise ContractError(f"need at least one record, got {n_records}")
    rng = np.random.default_rng(seed)
    templates = list(Template)
    records: list[ReactionRecord] = []
    for _ in range(n_records):
        template = templates[int(rng.integers(len(templates)))]
        floor = max(MIN_ATOMS, len(_CENTERS[template].head) + 3)
        total = int(rng.integers(floor, MAX_ATOMS + 1))
        product, reactants = _assemble(template, total, rng)
        if canonical(strip_atom_maps(apply_forward(reactants))) != canonical(strip_atom_maps(product)):
            raise ContractError(f"{template} template failed its forward check")
        record = ReactionRecord(reactants, product, write(reactants), write(product))
        records.append(record)
    logger.info("generated %d synthetic reactions (seed %d)", len(records), seed)
    return records
