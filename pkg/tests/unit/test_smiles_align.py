from __future__ import annotations

import itertools

import numpy as np
import pytest

from retrodiff.errors import AlignmentError
from retrodiff.smiles.align import random_root_align, root_align
from retrodiff.smiles.canon import canonical, canonical_set
from retrodiff.smiles.lexer import tokenize
from retrodiff.smiles.models import strip_atom_maps
from retrodiff.smiles.parser import parse_atom, parse_smiles

PRODUCT = "[CH3:1][C:2](=[O:3])[O:4][CH2:5][CH3:6]"
REACTANTS = "[CH3:1][C:2](=[O:3])O.[OH:4][CH2:5][CH3:6]"


@pytest.mark.unit
@pytest.mark.parametrize("root", range(6))
def test_aligned_strings_start_at_the_same_mapped_atom(root: int) -> None:
    product = parse_smiles(PRODUCT)
    reactants = parse_smiles(REACTANTS)

    product_text, reactant_text = root_align(product, reactants, root)

    first_product = parse_atom(tokenize(product_text)[0])
    first_reactant = parse_atom(tokenize(reactant_text)[0])
    assert first_product.element == product.atoms[root].element
    assert first_reactant.element == product.atoms[root].element
    assert canonical_set(product_text) == canonical(strip_atom_maps(product))
    assert canonical_set(reactant_text) == canonical(strip_atom_maps(reactants))


@pytest.mark.unit
def test_alignment_shares_a_prefix() -> None:
    product_text, reactant_text = root_align(parse_smiles(PRODUCT), parse_smiles(REACTANTS), 5)

    assert product_text.startswith("CCO")
    assert reactant_text.startswith("CCO")


@pytest.mark.unit
def test_aligned_strings_carry_no_atom_maps() -> None:
    rng = np.random.default_rng(0)

    product_text, reactant_text = random_root_align(parse_smiles(PRODUCT), parse_smiles(REACTANTS), rng)

    assert ":" not in product_text
    assert ":" not in reactant_text


@pytest.mark.unit
def test_root_out_of_range() -> None:
    with pytest.raises(AlignmentError):
        root_align(parse_smiles(PRODUCT), parse_smiles(REACTANTS), 9)


@pytest.mark.unit
def test_unmapped_root() -> None:
    with pytest.raises(AlignmentError):
        root_align(parse_smiles("C[CH3:1]"), parse_smiles("[CH4:1]"), 0)


@pytest.mark.unit
def test_map_missing_from_reactants() -> None:
    with pytest.raises(AlignmentError):
        root_align(parse_smiles("[CH3:1][CH3:2]"), parse_smiles("[CH4:1]"), 1)


@pytest.mark.unit
def test_random_alignment_needs_a_shared_map() -> None:
    with pytest.raises(AlignmentError):
        random_root_align(parse_smiles("CC"), parse_smiles("C.C"), np.random.default_rng(0))


MAPPED_REACTIONS = [
    (PRODUCT, REACTANTS),
    ("[CH3:1][C:2](=[O:3])[NH:4][CH2:5][CH3:6]", "[CH3:1][C:2](=[O:3])Cl.[NH2:4][CH2:5][CH3:6]"),
    ("[CH3:1][CH2:2][O:3][CH3:4]", "[CH3:1][CH2:2][OH:3].I[CH3:4]"),
    ("[CH3:1][CH2:2][CH2:3][OH:4]", "[CH3:1][CH2:2][CH:3]=[O:4]"),
    (
        "[CH3:1][C:2](=[O:3])[c:4]1[cH:5][cH:6][cH:7][cH:8][cH:9]1",
        "[CH3:1][C:2](=[O:3])Cl.[cH:4]1[cH:5][cH:6][cH:7][cH:8][cH:9]1",
    ),
    (
        "[cH:2]1[cH:3][cH:4][cH:5][cH:6][c:1]1-[c:7]1[cH:8][cH:9][cH:10][cH:11][cH:12]1",
        "Br[c:1]1[cH:2][cH:3][cH:4][cH:5][cH:6]1.OB(O)[c:7]1[cH:8][cH:9][cH:10][cH:11][cH:12]1",
    ),
    ("[NH2:1][CH2:2][CH2:3][OH:4]", "CC(C)(C)OC(=O)[NH:1][CH2:2][CH2:3][OH:4]"),
    ("[CH3:1][CH2:2][C:3](=[O:4])[OH:5]", "[CH3:1][CH2:2][C:3](=[O:4])[O:5]C"),
    ("[CH3:1][CH2:2][C:3]#[N:4]", "[CH3:1][CH2:2]Br.[C-:3]#[N:4]"),
    ("[CH3:1][N:2]([CH3:3])[CH2:4][CH3:5]", "[CH3:1][NH:2][CH3:3].Br[CH2:4][CH3:5]"),
    (
        "[cH:1]1[cH:2][cH:3][c:4]([O:7][CH3:8])[cH:5][cH:6]1",
        "[cH:1]1[cH:2][cH:3][c:4]([OH:7])[cH:5][cH:6]1.I[CH3:8]",
    ),
    ("[CH3:1][CH2:2][NH:3][CH2:4][CH3:5]", "[CH3:1][CH2:2][NH2:3].[CH3:5][CH:4]=O"),
    ("[CH3:1][C:2](=[O:3])[CH3:4]", "[CH3:1][CH:2]([OH:3])[CH3:4]"),
    ("[CH3:1][C:2]([OH:3])([CH3:4])[CH3:5]", "[CH3:1][C:2](=[O:3])[CH3:4].Br[Mg][CH3:5]"),
    ("[CH3:1][S:2](=[O:3])(=[O:4])[NH:5][CH3:6]", "[CH3:1][S:2](=[O:3])(=[O:4])Cl.[NH2:5][CH3:6]"),
    ("[NH2:1][c:2]1[cH:3][cH:4][cH:5][cH:6][cH:7]1", "[O-][N+:1](=O)[c:2]1[cH:3][cH:4][cH:5][cH:6][cH:7]1"),
    (
        "[CH3:1][C:2](=[O:3])[O:4][CH2:5][c:6]1[cH:7][cH:8][cH:9][cH:10][cH:11]1",
        "[CH3:1][C:2](=[O:3])[OH:4].Br[CH2:5][c:6]1[cH:7][cH:8][cH:9][cH:10][cH:11]1",
    ),
    ("[CH3:1][CH2:2][CH2:3][CH3:4]", "[CH3:1][CH:2]=[CH:3][CH3:4]"),
    ("[CH3:1][NH:2][C:3](=[O:4])[CH2:5][CH3:6]", "[CH3:1][NH2:2].O[C:3](=[O:4])[CH2:5][CH3:6]"),
    ("[OH:1][c:2]1[cH:3][cH:4][cH:5][cH:6][cH:7]1", "C[O:1][c:2]1[cH:3][cH:4][cH:5][cH:6][cH:7]1"),
]


def _shared_prefix(first: str, second: str) -> int:
    return sum(1 for _ in itertools.takewhile(lambda pair: pair[0] == pair[1], zip(tokenize(first), tokenize(second))))


@pytest.mark.unit
def test_aligned_pairs_share_longer_prefixes_than_canonical_pairs() -> None:
    assert len(MAPPED_REACTIONS) == 20
    aligned: list[float] = []
    unaligned: list[int] = []
    for product_smiles, reactant_smiles in MAPPED_REACTIONS:
        product = parse_smiles(product_smiles)
        reactants = parse_smiles(reactant_smiles)
        maps = reactants.atom_maps()
        roots = [index for index, atom in enumerate(product.atoms) if atom.atom_map in maps]
        aligned.append(np.mean([_shared_prefix(*root_align(product, reactants, root)) for root in roots]))
        unaligned.append(_shared_prefix(canonical(strip_atom_maps(product)), canonical(strip_atom_maps(reactants))))

    assert all(prefix >= 1 for prefix in aligned)
    assert np.mean(aligned) > np.mean(unaligned)
