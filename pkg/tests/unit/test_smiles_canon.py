from __future__ import annotations

from collections import Counter
from typing import TYPE_CHECKING

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from retrodiff.errors import ContractError
from retrodiff.smiles.canon import canonical, canonical_set, try_canonical_set
from retrodiff.smiles.lexer import tokenize
from retrodiff.smiles.models import strip_atom_maps
from retrodiff.smiles.parser import parse_smiles
from retrodiff.smiles.writer import random_rooted, write, write_with_order

if TYPE_CHECKING:
    from collections.abc import Callable

    from retrodiff.smiles.models import MolGraph

CORPUS = [
    "CCO",
    "CC(=O)O",
    "c1ccccc1O",
    "CC(C)(C)C",
    "C1CCCCC1",
    "N[C@@H](C)C(=O)O",
    "C[C@H](O)CC",
    "F/C=C/F",
    "CC(=O)Nc1ccc(O)cc1",
    "O=C(O)c1ccccc1",
    "C1CC2CCC1C2",
    "[NH4+].[Cl-]",
    "CCN(CC)CC",
    "c1ccc2ccccc2c1",
    "OC1CCOC1",
    "CC#N",
    "C=CC=C",
    "Brc1ccncc1",
    "CS(=O)(=O)O",
    "[13CH4]",
    "c1ccccc1-c1ccccc1",
]


@pytest.mark.unit
@pytest.mark.parametrize("smiles", CORPUS)
def test_random_rootings_reparse_isomorphic_with_one_canonical_form(
    smiles: str, same_molecule: Callable[[MolGraph, MolGraph], bool]
) -> None:
    graph = parse_smiles(smiles)
    expected = canonical(graph)
    rng = np.random.default_rng(42)

    for _ in range(15):
        written = random_rooted(graph, rng)
        reparsed = parse_smiles(written)
        assert same_molecule(graph, reparsed), written
        assert canonical(reparsed) == expected, written


@pytest.mark.unit
@pytest.mark.parametrize("smiles", CORPUS)
def test_canonical_is_a_fixed_point(smiles: str) -> None:
    first = canonical(parse_smiles(smiles))

    assert canonical(parse_smiles(first)) == first


@pytest.mark.unit
def test_equivalent_chirality_spellings_agree_and_enantiomers_differ() -> None:
    first = canonical(parse_smiles("N[C@@H](C)O"))
    swapped = canonical(parse_smiles("N[C@H](O)C"))
    mirror = canonical(parse_smiles("N[C@H](C)O"))

    assert first == swapped
    assert first != mirror


@pytest.mark.unit
def test_write_starts_at_root_and_reports_emission_order() -> None:
    graph = parse_smiles("CCO")

    text, order = write_with_order(graph, root=2)

    assert text == "OCC"
    assert order == [2, 1, 0]


@pytest.mark.unit
def test_write_rejects_bad_root() -> None:
    with pytest.raises(ContractError):
        write(parse_smiles("CC"), root=5)


@pytest.mark.unit
def test_reactant_sets_are_order_insensitive() -> None:
    assert canonical_set("CCO.CC") == canonical_set("CC.OCC")


@pytest.mark.unit
def test_canonical_set_drops_atom_maps() -> None:
    assert canonical_set("[CH3:1][OH:2]") == canonical_set("CO")


@pytest.mark.unit
def test_try_canonical_set_returns_none_for_garbage() -> None:
    assert try_canonical_set("C(C") is None
    assert try_canonical_set("<pad>C") is None


@pytest.mark.unit
def test_strip_atom_maps_keeps_everything_else() -> None:
    graph = parse_smiles("[CH3:1][OH:2]")

    stripped = strip_atom_maps(graph)

    assert all(atom.atom_map is None for atom in stripped.atoms)
    assert stripped.bonds == graph.bonds
    assert [stripped.total_h(i) for i in range(2)] == [3, 1]


@pytest.mark.unit
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_canonical_is_invariant_under_relabelling(data: st.DataObject) -> None:
    graph = parse_smiles(data.draw(st.sampled_from(CORPUS)))
    permutation = data.draw(st.permutations(range(len(graph))))

    assert canonical(graph.relabel(permutation)) == canonical(graph)


@pytest.mark.unit
def test_random_roots_are_uniform_over_atoms() -> None:
    # Six distinct elements, so the first token names the root.
    graph = parse_smiles("ClCNOSBr")
    rng = np.random.default_rng(6)
    draws = 1000

    firsts = Counter(tokenize(random_rooted(graph, rng))[0] for _ in range(draws))

    assert set(firsts) == {"Cl", "C", "N", "O", "S", "Br"}
    for count in firsts.values():
        assert count / draws == pytest.approx(1 / 6, abs=0.05)


SYMMETRIC = [
    "C(C(F)(F)F)(C(F)(F)F)(C(F)(F)F)C(F)(F)F",
    "CC(C)(C)C(C(C)(C)C)(C(C)(C)C)C(C)(C)C",
    "C12C3C4C1C5C2C3C45",
]


@pytest.mark.unit
@pytest.mark.parametrize("smiles", SYMMETRIC)
def test_symmetric_molecules_search_few_orderings(
    smiles: str,
    monkeypatch: pytest.MonkeyPatch,
    same_molecule: Callable[[MolGraph, MolGraph], bool],
) -> None:
    graph = parse_smiles(smiles)
    calls = 0

    def counting(*args, **kwargs):
        nonlocal calls
        calls += 1
        return write_with_order(*args, **kwargs)

    monkeypatch.setattr("retrodiff.smiles.canon.write_with_order", counting)
    expected = canonical(graph)

    # unpruned, the first two need 4! * 3!**4 complete orderings
    assert calls < 200
    rng = np.random.default_rng(12)
    for _ in range(20):
        reparsed = parse_smiles(random_rooted(graph, rng))
        assert same_molecule(graph, reparsed)
        assert canonical(reparsed) == expected
    assert canonical(parse_smiles(expected)) == expected
