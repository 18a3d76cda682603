from __future__ import annotations

import pytest

from retrodiff.errors import LexError, ParseError
from retrodiff.smiles.lexer import TokenKind, lex, tokenize
from retrodiff.smiles.models import BondOrder
from retrodiff.smiles.parser import parse_smiles


@pytest.mark.unit
@pytest.mark.parametrize("smiles", ["C[C@H](N)O", "c1ccccc1Cl", "[NH4+].[Cl-]", "C%12CC%12", "F/C=C/F"])
def test_tokens_reassemble_to_input(smiles: str) -> None:
    assert "".join(tokenize(smiles)) == smiles


@pytest.mark.unit
def test_token_kinds() -> None:
    kinds = [token.kind for token in lex("C(=O)1.C1")]

    assert kinds == [
        TokenKind.ATOM,
        TokenKind.BRANCH_OPEN,
        TokenKind.BOND,
        TokenKind.ATOM,
        TokenKind.BRANCH_CLOSE,
        TokenKind.RING,
        TokenKind.DOT,
        TokenKind.ATOM,
        TokenKind.RING,
    ]


@pytest.mark.unit
@pytest.mark.parametrize(
    ("smiles", "offset"),
    [("", 0), ("CC$", 2), ("C[CH3", 1), ("C[Xx]", 1), ("C%1", 1), ("CCé", 2), ("C[C-+]", 1)],
)
def test_lex_errors_carry_offset(smiles: str, offset: int) -> None:
    with pytest.raises(LexError) as info:
        lex(smiles)

    assert info.value.offset == offset
    assert info.value.user_error


@pytest.mark.unit
@pytest.mark.parametrize(
    ("smiles", "token_index"),
    [("=C", 0), ("C)", 1), ("C(C", 1), ("C()", 2), ("C1CC", 1), ("CC=", 2), ("C.", 1), ("C1C1", 3)],
)
def test_parse_errors_carry_token_index(smiles: str, token_index: int) -> None:
    with pytest.raises(ParseError) as info:
        parse_smiles(smiles)

    assert info.value.token_index == token_index


@pytest.mark.unit
def test_ethanol() -> None:
    graph = parse_smiles("CCO")

    assert len(graph) == 3
    assert [graph.total_h(atom) for atom in range(3)] == [3, 2, 1]
    assert all(bond.order is BondOrder.SINGLE for bond in graph.bonds)


@pytest.mark.unit
def test_benzene_is_aromatic_ring() -> None:
    graph = parse_smiles("c1ccccc1")

    assert len(graph.bonds) == 6
    assert all(bond.order is BondOrder.AROMATIC for bond in graph.bonds)
    assert all(graph.total_h(atom) == 1 for atom in range(6))


@pytest.mark.unit
def test_bracket_atom_fields() -> None:
    atom = parse_smiles("[13CH3:7]").atoms[0]

    assert atom.isotope == 13
    assert atom.explicit_h == 3
    assert atom.atom_map == 7


@pytest.mark.unit
def test_charged_components() -> None:
    graph = parse_smiles("[NH4+].[Cl-]")

    assert [atom.charge for atom in graph.atoms] == [1, -1]
    assert len(graph.components) == 2


@pytest.mark.unit
@pytest.mark.parametrize(("smiles", "charge"), [("[Fe++]", 2), ("[Fe+3]", 3), ("[O--]", -2), ("[N-]", -1)])
def test_charge_spellings(smiles: str, charge: int) -> None:
    assert parse_smiles(smiles).atoms[0].charge == charge


@pytest.mark.unit
def test_multiple_bond_orders() -> None:
    graph = parse_smiles("C#CC=O")

    assert [bond.order for bond in graph.bonds] == [BondOrder.TRIPLE, BondOrder.SINGLE, BondOrder.DOUBLE]


HYDROGEN_COUNTS = [
    ("C", [4]),
    ("CC=O", [3, 1, 0]),
    ("C#N", [1, 0]),
    ("C=C", [2, 2]),
    ("C1CC1", [2, 2, 2]),
    ("CC(C)(C)C", [3, 0, 3, 3, 3]),
    ("FC(F)(F)F", [0, 0, 0, 0, 0]),
    ("ClCBr", [0, 2, 0]),
    ("CN(C)C", [3, 0, 3, 3]),
    ("CN(=O)=O", [3, 0, 0, 0]),
    ("CP(C)C", [3, 0, 3, 3]),
    ("CSC", [3, 0, 3]),
    ("CS(C)=O", [3, 0, 3, 0]),
    ("CS(=O)(=O)O", [3, 0, 0, 0, 1]),
    ("OB(O)O", [1, 0, 1, 1]),
    ("c1ccncc1", [1, 1, 1, 0, 1, 1]),
    ("o1cccc1", [0, 1, 1, 1, 1]),
    ("s1cccc1", [0, 1, 1, 1, 1]),
    ("Cc1ccccc1", [3, 0, 1, 1, 1, 1, 1]),
    ("c1ccc2ccccc2c1", [1, 1, 1, 0, 1, 1, 1, 1, 0, 1]),
    ("O=c1cc[nH]cc1", [0, 0, 1, 1, 1, 1, 1]),
    ("[NH4+]", [4]),
    ("C[O-]", [3, 0]),
    ("[CH2]C", [2, 3]),
]


@pytest.mark.unit
@pytest.mark.parametrize(("smiles", "expected"), HYDROGEN_COUNTS)
def test_hydrogen_counts(smiles: str, expected: list[int]) -> None:
    graph = parse_smiles(smiles)

    assert [graph.total_h(atom) for atom in range(len(graph))] == expected
