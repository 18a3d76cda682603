"""Rooted SMILES writing.

A graph is written by depth-first traversal from a chosen root. ``priority``
ranks atoms (lower first) and decides the order in which neighbours become
branches, which disconnected component comes next, and where each further
component is rooted. The component holding ``root`` is always written first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from retrodiff.errors import ContractError
from retrodiff.smiles.models import (
    AROMATIC_ORGANIC,
    HYDROGEN,
    ORGANIC_SUBSET,
    BondOrder,
    BondStereo,
    MolGraph,
    permutation_parity,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

    from retrodiff.smiles.models import Bond


@dataclass(slots=True)
class _Traversal:
    order: list[int] = field(default_factory=list)
    children: dict[int, list[int]] = field(default_factory=dict)
    parent: dict[int, int] = field(default_factory=dict)
    ring_bonds: list[int] = field(default_factory=list)


def _traverse(graph: MolGraph, root: int, rank: Sequence[int], traversal: _Traversal, seen: list[bool]) -> None:
    ring_set: set[int] = set()
    # Explicit stack of (atom, bond used to reach it, neighbour iterator).
    seen[root] = True
    traversal.order.append(root)
    traversal.children[root] = []
    stack = [(root, -1, iter(sorted(graph.neighbors(root), key=lambda item: rank[item[0]])))]
    while stack:
        atom, via, pending = stack[-1]
        advanced = False
        for other, bond_index in pending:
            if bond_index == via:
                continue
            if seen[other]:
                if bond_index not in ring_set:
                    ring_set.add(bond_index)
                    traversal.ring_bonds.append(bond_index)
                continue
            seen[other] = True
            traversal.order.append(other)
            traversal.children[atom].append(other)
            traversal.children[other] = []
            traversal.parent[other] = atom
            stack.append((other, bond_index, iter(sorted(graph.neighbors(other), key=lambda item: rank[item[0]]))))
            advanced = True
            break
        if not advanced:
            stack.pop()


def _bond_symbol(graph: MolGraph, bond: Bond, start: int) -> str:
    stereo = bond.stereo_from(start)
    if stereo is BondStereo.UP:
        return "/"
    if stereo is BondStereo.DOWN:
        return "\\"
    if bond.order is BondOrder.DOUBLE:
        return "="
    if bond.order is BondOrder.TRIPLE:
        return "#"
    if bond.order is BondOrder.AROMATIC:
        return ""
    both_aromatic = graph.atoms[bond.begin].aromatic and graph.atoms[bond.end].aromatic
    return "-" if both_aromatic else ""


def atom_text(graph: MolGraph, atom: int, chirality: str | None) -> str:
    spec = graph.atoms[atom]
    symbol = spec.element.lower() if spec.aromatic else spec.element
    hydrogens = graph.total_h(atom)
    bare = (
        spec.charge == 0
        and spec.isotope is None
        and spec.atom_map is None
        and chirality is None
        and spec.element in ORGANIC_SUBSET
        and (not spec.aromatic or spec.element in AROMATIC_ORGANIC)
        and hydrogens == graph.implicit_h(atom)
    )
    if bare:
        return symbol
    parts = ["[", str(spec.isotope) if spec.isotope is not None else "", symbol, chirality or ""]
    if hydrogens:
        parts.append("H" if hydrogens == 1 else f"H{hydrogens}")
    if spec.charge:
        sign = "+" if spec.charge > 0 else "-"
        parts.append(sign if abs(spec.charge) == 1 else f"{sign}{abs(spec.charge)}")
    if spec.atom_map is not None:
        parts.append(f":{spec.atom_map}")
    parts.append("]")
    return "".join(parts)


def _ring_label(number: int) -> str:
    return str(number) if number < 10 else f"%{number}"


def _emit_component(graph: MolGraph, traversal: _Traversal, out: list[str]) -> None:
    position = {atom: index for index, atom in enumerate(traversal.order)}
    ring_partners: dict[int, list[tuple[int, int]]] = {}
    for bond_index in traversal.ring_bonds:
        bond = graph.bonds[bond_index]
        ring_partners.setdefault(bond.begin, []).append((bond.end, bond_index))
        ring_partners.setdefault(bond.end, []).append((bond.begin, bond_index))

    open_digits: dict[int, int] = {}
    in_use: set[int] = set()
    # Each frame: atom to write, or a marker string to emit.
    stack: list[int | str] = [traversal.order[0]]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        atom = item
        written: list[int] = []
        if atom in traversal.parent:
            written.append(traversal.parent[atom])
        if graph.atoms[atom].explicit_h:
            written.append(HYDROGEN)

        partners = ring_partners.get(atom, [])
        closing = sorted((p for p in partners if position[p[0]] < position[atom]), key=lambda p: open_digits[p[1]])
        opening = sorted((p for p in partners if position[p[0]] > position[atom]), key=lambda p: position[p[0]])
        ring_text: list[str] = []
        for other, bond_index in closing:
            number = open_digits.pop(bond_index)
            in_use.discard(number)
            ring_text.append(_ring_label(number))
            written.append(other)
        for other, bond_index in opening:
            number = 1
            while number in in_use:
                number += 1
            in_use.add(number)
            open_digits[bond_index] = number
            ring_text.append(_bond_symbol(graph, graph.bonds[bond_index], atom) + _ring_label(number))
            written.append(other)

        children = traversal.children[atom]
        written.extend(children)
        chirality = graph.atoms[atom].chirality
        marker = None
        if chirality is not None:
            flip = permutation_parity(graph.reference_order(atom), written)
            marker = (chirality.flipped() if flip else chirality).value

        out.append(atom_text(graph, atom, marker))
        out.extend(ring_text)
        # Push in reverse so the first child comes out first; all but the last are branches.
        frames: list[int | str] = []
        for index, child in enumerate(children):
            bond = graph.bond_between(atom, child)
            symbol = _bond_symbol(graph, bond, atom) if bond is not None else ""
            if index < len(children) - 1:
                frames.extend(["(" + symbol, child, ")"])
            else:
                frames.extend([symbol, child])
        stack.extend(reversed(frames))


def write_with_order(
    graph: MolGraph,
    root: int = 0,
    priority: Sequence[int] | None = None,
) -> tuple[str, list[int]]:
    """Write ``graph`` from ``root`` and also return the atom emission order."""
    count = len(graph)
    if not 0 <= root < count:
        raise ContractError(f"root {root} outside 0..{count - 1}")
    rank = list(priority) if priority is not None else list(range(count))
    if len(rank) != count:
        raise ContractError(f"priority has {len(rank)} entries for {count} atoms")

    seen = [False] * count
    pieces: list[str] = []
    emitted: list[int] = []
    starts = [root] + sorted(
        (min(members, key=lambda atom: rank[atom]) for members in graph.components if root not in members),
        key=lambda atom: rank[atom],
    )
    for start in starts:
        traversal = _Traversal()
        _traverse(graph, start, rank, traversal, seen)
        out: list[str] = []
        _emit_component(graph, traversal, out)
        pieces.append("".join(out))
        emitted.extend(traversal.order)
    return ".".join(pieces), emitted


def write(graph: MolGraph, root: int = 0, priority: Sequence[int] | None = None) -> str:
    return write_with_order(graph, root, priority)[0]


def random_rooted(graph: MolGraph, seed: int | np.random.Generator | None = None) -> str:
    """Write from a uniformly chosen root with a shuffled branch order."""
    if not len(graph):
        raise ContractError("cannot write an empty graph")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    root = int(rng.integers(len(graph)))
    priority = rng.permutation(len(graph)).tolist()
    return write(graph, root, priority)
