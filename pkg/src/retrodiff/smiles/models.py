from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import StrEnum
from functools import cached_property
from typing import TYPE_CHECKING

from retrodiff.errors import ContractError

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

# Lowest valence first; implicit hydrogens fill up to the smallest valence that fits.
VALENCES: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_SUBSET = frozenset(VALENCES)
AROMATIC_ORGANIC = frozenset({"B", "C", "N", "O", "P", "S"})

ELEMENTS = frozenset(
    {
        "H", "Li", "Be", "B", "C", "N", "O", "F", "Na", "Mg", "Al", "Si", "P", "S", "Cl", "K", "Ca",
        "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Rb", "Sr",
        "Zr", "Mo", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Cs", "Ba", "Ce", "W",
        "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
    }
)  # fmt: skip
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As", "Te"})

HYDROGEN = -1


class BondOrder(StrEnum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"

    @property
    def valence(self) -> int:
        return {"single": 1, "double": 2, "triple": 3, "aromatic": 1}[self.value]


class BondStereo(StrEnum):
    NONE = "none"
    UP = "up"
    DOWN = "down"

    def flipped(self) -> BondStereo:
        if self is BondStereo.UP:
            return BondStereo.DOWN
        if self is BondStereo.DOWN:
            return BondStereo.UP
        return self


class Chirality(StrEnum):
    ANTICLOCKWISE = "@"
    CLOCKWISE = "@@"

    def flipped(self) -> Chirality:
        return Chirality.CLOCKWISE if self is Chirality.ANTICLOCKWISE else Chirality.ANTICLOCKWISE


@dataclass(frozen=True, slots=True)
class Atom:
    """One heavy atom.

    ``explicit_h`` is ``None`` for organic-subset atoms written without
    brackets; their hydrogen count is implied by the valence table.
    ``chirality`` is stored relative to the reference neighbour order
    ``[H] + sorted(neighbour indices)`` of the owning graph, never relative to
    any particular SMILES string.
    """

    element: str
    aromatic: bool = False
    charge: int = 0
    explicit_h: int | None = None
    isotope: int | None = None
    atom_map: int | None = None
    chirality: Chirality | None = None

    def __post_init__(self) -> None:
        if self.element not in ELEMENTS:
            raise ContractError(f"unsupported element {self.element!r}")
        if self.aromatic and self.element not in AROMATIC_ELEMENTS:
            raise ContractError(f"element {self.element!r} cannot be aromatic")
        if self.atom_map is not None and self.atom_map < 1:
            raise ContractError(f"atom map must be positive, got {self.atom_map}")


@dataclass(frozen=True, slots=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE
    stereo: BondStereo = BondStereo.NONE

    def other(self, atom: int) -> int:
        return self.end if atom == self.begin else self.begin

    def stereo_from(self, atom: int) -> BondStereo:
        """Directional marker when the bond is read starting at ``atom``."""
        return self.stereo if atom == self.begin else self.stereo.flipped()


def permutation_parity(reference: Sequence[int], observed: Sequence[int]) -> int:
    """0 when ``observed`` is an even permutation of ``reference``, else 1."""
    position = {item: index for index, item in enumerate(reference)}
    sequence = [position[item] for item in observed]
    inversions = sum(
        1 for i in range(len(sequence)) for j in range(i + 1, len(sequence)) if sequence[i] > sequence[j]
    )
    return inversions % 2


@dataclass(frozen=True)
class MolGraph:
    atoms: tuple[Atom, ...] = ()
    bonds: tuple[Bond, ...] = ()
    _adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        count = len(self.atoms)
        seen: set[tuple[int, int]] = set()
        adjacency: list[list[tuple[int, int]]] = [[] for _ in range(count)]
        for index, bond in enumerate(self.bonds):
            if not (0 <= bond.begin < count and 0 <= bond.end < count):
                raise ContractError(f"bond {index} has an endpoint outside 0..{count - 1}")
            if bond.begin == bond.end:
                raise ContractError(f"bond {index} is a self-bond on atom {bond.begin}")
            key = (min(bond.begin, bond.end), max(bond.begin, bond.end))
            if key in seen:
                raise ContractError(f"duplicate bond between atoms {key[0]} and {key[1]}")
            seen.add(key)
            if bond.order is BondOrder.AROMATIC and not (
                self.atoms[bond.begin].aromatic and self.atoms[bond.end].aromatic
            ):
                raise ContractError(f"aromatic bond {index} joins a non-aromatic atom")
            adjacency[bond.begin].append((bond.end, index))
            adjacency[bond.end].append((bond.begin, index))
        object.__setattr__(self, "_adjacency", tuple(tuple(row) for row in adjacency))

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, atom: int) -> tuple[tuple[int, int], ...]:
        """``(neighbour index, bond index)`` pairs of ``atom``."""
        return self._adjacency[atom]

    def degree(self, atom: int) -> int:
        return len(self._adjacency[atom])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for other, bond_index in self._adjacency[a]:
            if other == b:
                return self.bonds[bond_index]
        return None

    def implicit_h(self, atom: int) -> int:
        """Hydrogens implied by the valence table for an unbracketed atom."""
        spec = self.atoms[atom]
        valences = VALENCES.get(spec.element)
        if valences is None:
            return 0
        used = sum(self.bonds[bond_index].order.valence for _, bond_index in self._adjacency[atom])
        if spec.aromatic:
            return max(0, valences[0] - used - 1)
        for valence in valences:
            if valence >= used:
                return valence - used
        return 0

    def total_h(self, atom: int) -> int:
        spec = self.atoms[atom]
        return spec.explicit_h if spec.explicit_h is not None else self.implicit_h(atom)

    def reference_order(self, atom: int) -> list[int]:
        order = sorted(other for other, _ in self._adjacency[atom])
        if self.atoms[atom].explicit_h:
            order.insert(0, HYDROGEN)
        return order

    @cached_property
    def components(self) -> list[list[int]]:
        """Connected components as sorted atom-index lists, ordered by smallest member."""
        label = [-1] * len(self.atoms)
        groups: list[list[int]] = []
        for start in range(len(self.atoms)):
            if label[start] >= 0:
                continue
            label[start] = len(groups)
            members = [start]
            stack = [start]
            while stack:
                current = stack.pop()
                for other, _ in self._adjacency[current]:
                    if label[other] < 0:
                        label[other] = len(groups)
                        members.append(other)
                        stack.append(other)
            groups.append(sorted(members))
        return groups

    def relabel(self, permutation: Sequence[int]) -> MolGraph:
        """Move atom ``i`` to position ``permutation[i]``, keeping chirality meaning intact."""
        count = len(self.atoms)
        if sorted(permutation) != list(range(count)):
            raise ContractError("relabel needs a permutation of all atom indices")
        atoms: list[Atom | None] = [None] * count
        for old, spec in enumerate(self.atoms):
            if spec.chirality is not None:
                old_reference = self.reference_order(old)
                new_reference = sorted(
                    (item for item in old_reference if item != HYDROGEN), key=lambda item: permutation[item]
                )
                if old_reference and old_reference[0] == HYDROGEN:
                    new_reference.insert(0, HYDROGEN)
                if permutation_parity(old_reference, new_reference):
                    spec = replace(spec, chirality=spec.chirality.flipped())
            atoms[permutation[old]] = spec
        bonds = [
            Bond(permutation[bond.begin], permutation[bond.end], bond.order, bond.stereo) for bond in self.bonds
        ]
        return MolGraph(tuple(atoms), tuple(bonds))  # type: ignore[arg-type]

    def subgraph(self, members: Iterable[int]) -> MolGraph:
        """Induced subgraph; members keep their relative order so chirality is unchanged."""
        keep = sorted(set(members))
        index = {old: new for new, old in enumerate(keep)}
        bonds = [
            Bond(index[bond.begin], index[bond.end], bond.order, bond.stereo)
            for bond in self.bonds
            if bond.begin in index and bond.end in index
        ]
        return MolGraph(tuple(self.atoms[old] for old in keep), tuple(bonds))

    def atom_maps(self) -> dict[int, int]:
        """Atom map label to atom index."""
        return {spec.atom_map: index for index, spec in enumerate(self.atoms) if spec.atom_map is not None}

    def heavy_atom_count(self) -> int:
        return sum(1 for spec in self.atoms if spec.element != "H")


def strip_atom_maps(graph: MolGraph) -> MolGraph:
    if all(spec.atom_map is None for spec in graph.atoms):
        return graph
    atoms = tuple(replace(spec, atom_map=None) for spec in graph.atoms)
    return MolGraph(atoms, graph.bonds)


def combine(graphs: Sequence[MolGraph]) -> MolGraph:
    """Disjoint union, as written with ``.`` between the parts."""
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    for graph in graphs:
        offset = len(atoms)
        atoms.extend(graph.atoms)
        bonds.extend(Bond(b.begin + offset, b.end + offset, b.order, b.stereo) for b in graph.bonds)
    return MolGraph(tuple(atoms), tuple(bonds))
