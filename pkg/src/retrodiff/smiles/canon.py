"""Canonical SMILES.

Atoms are colored by their local invariants and the coloring is refined
Morgan-style over neighbour colors until stable. Remaining ties are broken by
individualizing each member of the first tied class in turn and refining
again; every complete ordering is written and the lexicographically least
string wins. Branches that a known automorphism maps onto an explored sibling
are skipped, so highly symmetric molecules stay cheap.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from retrodiff.errors import ContractError, RetrodiffError
from retrodiff.smiles.models import BondStereo, MolGraph, strip_atom_maps
from retrodiff.smiles.parser import parse_smiles
from retrodiff.smiles.writer import write_with_order

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

Coloring = list[int]


def _atom_invariant(graph: MolGraph, atom: int) -> tuple:
    spec = graph.atoms[atom]
    return (
        spec.element,
        spec.charge,
        spec.isotope or 0,
        spec.aromatic,
        graph.total_h(atom),
        graph.degree(atom),
        spec.chirality is not None,
        spec.atom_map or 0,
    )


def _dense(signatures: Sequence[tuple]) -> Coloring:
    ordered = sorted(set(signatures))
    rank = {signature: index for index, signature in enumerate(ordered)}
    return [rank[signature] for signature in signatures]


def _refine(graph: MolGraph, colors: Coloring) -> Coloring:
    edge_colors = [(bond.order.value, bond.stereo is not BondStereo.NONE) for bond in graph.bonds]
    while True:
        signatures = [
            (
                colors[atom],
                tuple(
                    sorted((edge_colors[bond_index], colors[other]) for other, bond_index in graph.neighbors(atom))
                ),
            )
            for atom in range(len(graph))
        ]
        refined = _dense(signatures)
        if len(set(refined)) == len(set(colors)):
            return refined
        colors = refined


def _individualize(colors: Coloring, atom: int) -> Coloring:
    return _dense([(color, 0 if index == atom else 1) for index, color in enumerate(colors)])


def _first_tied(colors: Coloring) -> int | None:
    counts: dict[int, int] = {}
    for color in colors:
        counts[color] = counts.get(color, 0) + 1
    tied = [color for color, count in counts.items() if count > 1]
    return min(tied) if tied else None


class _LeastString:
    """Search over tie-breaking choices for the least written string.

    Two leaves that write the same string give an automorphism through their
    emission orders. A branch that such automorphisms (fixing the branch's
    prefix) map onto an explored sibling is skipped or abandoned.
    """

    def __init__(self, graph: MolGraph) -> None:
        self.graph = graph
        self.best: str | None = None
        self.leaves = 0
        self._first_emission: dict[str, list[int]] = {}
        self._generators: list[list[int]] = []
        self._path: list[tuple[tuple[int, ...], list[int], int]] = []
        self._checked = 0

    def search(self, colors: Coloring, prefix: tuple[int, ...] = ()) -> None:
        target = _first_tied(colors)
        if target is None:
            self._leaf(colors)
            return
        explored: list[int] = []
        for atom in [index for index, color in enumerate(colors) if color == target]:
            if self._abandoned():
                return
            if explored and atom in self._orbit(explored, prefix):
                continue
            self._path.append((prefix, list(explored), atom))
            explored.append(atom)
            self.search(_refine(self.graph, _individualize(colors, atom)), (*prefix, atom))
            self._path.pop()

    def _leaf(self, colors: Coloring) -> None:
        self.leaves += 1
        text, emitted = write_with_order(self.graph, colors.index(0), colors)
        earlier = self._first_emission.get(text)
        if earlier is None:
            self._first_emission[text] = emitted
            if self.best is None or text < self.best:
                self.best = text
            return
        mapping = list(range(len(self.graph)))
        for source, image in zip(earlier, emitted, strict=True):
            mapping[source] = image
        if mapping != list(range(len(self.graph))):
            self._generators.append(mapping)

    def _orbit(self, seeds: Sequence[int], prefix: tuple[int, ...]) -> set[int]:
        active = [mapping for mapping in self._generators if all(mapping[atom] == atom for atom in prefix)]
        orbit = set(seeds)
        frontier = list(seeds)
        while frontier:
            atom = frontier.pop()
            for mapping in active:
                if mapping[atom] not in orbit:
                    orbit.add(mapping[atom])
                    frontier.append(mapping[atom])
        return orbit

    def _abandoned(self) -> bool:
        # only a new automorphism can make an entered branch redundant
        if len(self._generators) == self._checked:
            return False
        if any(explored and atom in self._orbit(explored, prefix) for prefix, explored, atom in self._path):
            return True
        self._checked = len(self._generators)
        return False


def _canonical_component(graph: MolGraph) -> str:
    colors = _refine(graph, _dense([_atom_invariant(graph, atom) for atom in range(len(graph))]))
    search = _LeastString(graph)
    search.search(colors)
    assert search.best is not None
    logger.debug("canonical form of %d atoms after %d leaves", len(graph), search.leaves)
    return search.best


def canonical(graph: MolGraph) -> str:
    """Canonical SMILES; components are canonicalized separately and sorted."""
    if not len(graph):
        raise ContractError("cannot canonicalize an empty graph")
    parts = sorted(_canonical_component(graph.subgraph(members)) for members in graph.components)
    return ".".join(parts)


def canonical_set(smiles: str) -> str:
    """Canonical form of a reactant set with atom maps dropped.

    Components are canonicalized separately and sorted, so "CCO.CC" and "CC.OCC" agree.
    """
    return canonical(strip_atom_maps(parse_smiles(smiles)))


def try_canonical_set(smiles: str) -> str | None:
    try:
        return canonical_set(smiles)
    except RetrodiffError:
        logger.debug("could not canonicalize %r", smiles)
        return None
