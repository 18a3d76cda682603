from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from retrodiff.errors import ContractError, ParseError
from retrodiff.smiles.lexer import BRACKET_ATOM, Token, TokenKind, lex
from retrodiff.smiles.models import (
    HYDROGEN,
    Atom,
    Bond,
    BondOrder,
    BondStereo,
    Chirality,
    MolGraph,
    permutation_parity,
)

if TYPE_CHECKING:
    from collections.abc import Sequence

_BOND_SYMBOLS = {
    "-": (BondOrder.SINGLE, BondStereo.NONE),
    "=": (BondOrder.DOUBLE, BondStereo.NONE),
    "#": (BondOrder.TRIPLE, BondStereo.NONE),
    ":": (BondOrder.AROMATIC, BondStereo.NONE),
    "/": (BondOrder.SINGLE, BondStereo.UP),
    "\\": (BondOrder.SINGLE, BondStereo.DOWN),
}


def parse_atom(text: str) -> Atom:
    if not text.startswith("["):
        return Atom(element=text.capitalize(), aromatic=text.islower())
    match = BRACKET_ATOM.match(text)
    if match is None:
        raise ContractError(f"malformed bracket atom {text!r}")
    element = match["element"]
    hcount = match["hcount"]
    charge_text = match["charge"]
    charge = 0
    if charge_text:
        sign = 1 if charge_text[0] == "+" else -1
        rest = charge_text[1:]
        charge = sign * (int(rest) if rest.isdigit() else len(rest) + 1)
    return Atom(
        element=element.capitalize() if element.islower() else element,
        aromatic=element.islower(),
        charge=charge,
        explicit_h=(int(hcount[1:]) if len(hcount) > 1 else 1) if hcount else 0,
        isotope=int(match["isotope"]) if match["isotope"] else None,
        atom_map=int(match["atom_map"]) if match["atom_map"] else None,
        chirality=Chirality(match["chirality"]) if match["chirality"] else None,
    )


@dataclass(slots=True)
class _OpenRing:
    atom: int
    symbol: str | None
    token_index: int
    slot: int


class _Builder:
    def __init__(self) -> None:
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.pairs: set[tuple[int, int]] = set()
        # Neighbour order as written, per atom, for chirality.
        self.written: list[list[int]] = []

    def add_atom(self, atom: Atom) -> int:
        self.atoms.append(atom)
        self.written.append([])
        return len(self.atoms) - 1

    def default_order(self, a: int, b: int) -> BondOrder:
        if self.atoms[a].aromatic and self.atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    def add_bond(self, a: int, b: int, symbol: str | None, token_index: int) -> None:
        key = (min(a, b), max(a, b))
        if a == b or key in self.pairs:
            raise ParseError("ring closure duplicates an existing bond", token_index)
        order, stereo = _BOND_SYMBOLS[symbol] if symbol else (self.default_order(a, b), BondStereo.NONE)
        if order is BondOrder.AROMATIC and not (self.atoms[a].aromatic and self.atoms[b].aromatic):
            raise ParseError("aromatic bond between non-aromatic atoms", token_index)
        self.pairs.add(key)
        self.bonds.append(Bond(a, b, order, stereo))


def parse(tokens: Sequence[Token]) -> MolGraph:
    """Build a molecular graph from lexed tokens.

    Errors report the index of the offending token.
    """
    builder = _Builder()
    branches: list[tuple[int | None, int]] = []
    rings: dict[int, _OpenRing] = {}
    previous: int | None = None
    pending_bond: tuple[str, int] | None = None
    last_kind: TokenKind | None = None

    for index, token in enumerate(tokens):
        kind = token.kind
        if kind is TokenKind.ATOM:
            atom = builder.add_atom(parse_atom(token.text))
            if previous is not None:
                symbol = pending_bond[0] if pending_bond else None
                builder.add_bond(previous, atom, symbol, index)
                builder.written[previous].append(atom)
                builder.written[atom].append(previous)
            elif pending_bond is not None:
                raise ParseError("bond has no atom before it", pending_bond[1])
            if builder.atoms[atom].explicit_h:
                builder.written[atom].append(HYDROGEN)
            pending_bond = None
            previous = atom
        elif kind is TokenKind.BOND:
            if previous is None or pending_bond is not None:
                raise ParseError("bond has no atom before it", index)
            pending_bond = (token.text, index)
        elif kind is TokenKind.BRANCH_OPEN:
            if previous is None or pending_bond is not None:
                raise ParseError("branch opens without an atom", index)
            branches.append((previous, index))
        elif kind is TokenKind.BRANCH_CLOSE:
            if not branches:
                raise ParseError("unmatched ')'", index)
            if pending_bond is not None:
                raise ParseError("bond has no atom after it", pending_bond[1])
            if last_kind is TokenKind.BRANCH_OPEN:
                raise ParseError("empty branch", index)
            previous, _ = branches.pop()
        elif kind is TokenKind.RING:
            if previous is None or last_kind in (TokenKind.BRANCH_OPEN, TokenKind.BRANCH_CLOSE):
                raise ParseError("ring closure digit without an atom", index)
            number = token.ring_number
            symbol = pending_bond[0] if pending_bond else None
            pending_bond = None
            opened = rings.pop(number, None)
            if opened is None:
                builder.written[previous].append(HYDROGEN - 1)
                rings[number] = _OpenRing(previous, symbol, index, len(builder.written[previous]) - 1)
                last_kind = kind
                continue
            if opened.symbol and symbol:
                first = _BOND_SYMBOLS[opened.symbol]
                # The same bond read from the closing end reverses any direction marker.
                second = (_BOND_SYMBOLS[symbol][0], _BOND_SYMBOLS[symbol][1].flipped())
                if first != second:
                    raise ParseError(f"ring bond {number} has conflicting bond symbols", index)
            if opened.symbol:
                builder.add_bond(opened.atom, previous, opened.symbol, index)
            elif symbol:
                builder.add_bond(opened.atom, previous, symbol, index)
                stereo = _BOND_SYMBOLS[symbol][1]
                if stereo is not BondStereo.NONE:
                    bond = builder.bonds[-1]
                    builder.bonds[-1] = Bond(bond.begin, bond.end, bond.order, stereo.flipped())
            else:
                builder.add_bond(opened.atom, previous, None, index)
            builder.written[opened.atom][opened.slot] = previous
            builder.written[previous].append(opened.atom)
        elif kind is TokenKind.DOT:
            if previous is None or pending_bond is not None or branches:
                raise ParseError("misplaced '.'", index)
            if index + 1 >= len(tokens) or tokens[index + 1].kind is not TokenKind.ATOM:
                raise ParseError("'.' must be followed by an atom", index)
            previous = None
        last_kind = kind

    if pending_bond is not None:
        raise ParseError("bond has no atom after it", pending_bond[1])
    if branches:
        raise ParseError("unmatched '('", branches[-1][1])
    if rings:
        number, opened = min(rings.items(), key=lambda item: item[1].token_index)
        raise ParseError(f"ring bond {number} never closed", opened.token_index)
    if not builder.atoms:
        raise ParseError("no atoms", 0)

    graph = MolGraph(tuple(builder.atoms), tuple(builder.bonds))
    return _normalize_chirality(graph, builder.written)


def _normalize_chirality(graph: MolGraph, written: list[list[int]]) -> MolGraph:
    atoms = list(graph.atoms)
    changed = False
    for index, atom in enumerate(atoms):
        if atom.chirality is None:
            continue
        if permutation_parity(graph.reference_order(index), written[index]):
            atoms[index] = replace(atom, chirality=atom.chirality.flipped())
            changed = True
    return MolGraph(tuple(atoms), graph.bonds) if changed else graph


def parse_smiles(smiles: str) -> MolGraph:
    return parse(lex(smiles))
