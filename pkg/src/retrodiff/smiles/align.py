from __future__ import annotations

from typing import TYPE_CHECKING

from retrodiff.errors import AlignmentError
from retrodiff.smiles.models import MolGraph, strip_atom_maps
from retrodiff.smiles.writer import write, write_with_order

if TYPE_CHECKING:
    import numpy as np


def root_align(
    product: MolGraph,
    reactants: MolGraph,
    product_root: int,
    rng: np.random.Generator | None = None,
) -> tuple[str, str]:
    """Write product and reactants so both strings start from the same mapped atom.

    The reactant component holding the root's map comes first, rooted at that
    atom; mapped reactant atoms follow the order in which their product
    partners were written, so the two strings tend to share long prefixes.
    With ``rng`` the product's branch order is shuffled as well.
    """
    if not 0 <= product_root < len(product):
        raise AlignmentError(f"product root {product_root} outside 0..{len(product) - 1}")
    root_map = product.atoms[product_root].atom_map
    if root_map is None:
        raise AlignmentError(f"product root atom {product_root} carries no atom map")
    reactant_maps = reactants.atom_maps()
    if root_map not in reactant_maps:
        raise AlignmentError(f"atom map {root_map} of the product root is absent from the reactants")

    priority = rng.permutation(len(product)).tolist() if rng is not None else None
    product_text, product_order = write_with_order(strip_atom_maps(product), product_root, priority)

    emitted_at = {product.atoms[atom].atom_map: rank for rank, atom in enumerate(product_order)}
    unmapped_base = len(product)
    reactant_priority = [
        emitted_at.get(spec.atom_map, unmapped_base + index) if spec.atom_map is not None else unmapped_base + index
        for index, spec in enumerate(reactants.atoms)
    ]
    reactant_text = write(strip_atom_maps(reactants), reactant_maps[root_map], reactant_priority)
    return product_text, reactant_text


def random_root_align(product: MolGraph, reactants: MolGraph, rng: np.random.Generator) -> tuple[str, str]:
    """Root-align from a uniformly chosen mapped product atom whose map also appears in the reactants."""
    reactant_maps = reactants.atom_maps()
    candidates = [
        index
        for index, spec in enumerate(product.atoms)
        if spec.atom_map is not None and spec.atom_map in reactant_maps
    ]
    if not candidates:
        raise AlignmentError("no product atom shares an atom map with the reactants")
    root = candidates[int(rng.integers(len(candidates)))]
    return root_align(product, reactants, root, rng)
