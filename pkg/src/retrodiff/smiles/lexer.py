"""SMILES tokenizer.

Tokens keep their exact surface text so ``"".join(token.text for token in
lex(s)) == s`` always holds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import StrEnum

from retrodiff.errors import LexError
from retrodiff.smiles.models import AROMATIC_ELEMENTS, ELEMENTS

BRACKET_ATOM = re.compile(
    r"^\[(?P<isotope>\d+)?"
    r"(?P<element>[A-Z][a-z]?|se|as|te|[bcnops])"
    r"(?P<chirality>@@|@)?"
    r"(?P<hcount>H\d?)?"
    r"(?P<charge>\+\d{1,2}|-\d{1,2}|\++|-+)?"
    r"(?::(?P<atom_map>\d+))?\]$"
)

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = frozenset("BCNOPSFI") | frozenset("bcnosp")
_BONDS = frozenset("-=#:/\\")


class TokenKind(StrEnum):
    ATOM = "atom"
    BOND = "bond"
    BRANCH_OPEN = "branch_open"
    BRANCH_CLOSE = "branch_close"
    RING = "ring"
    DOT = "dot"


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    offset: int

    @property
    def ring_number(self) -> int:
        return int(self.text[1:]) if self.text.startswith("%") else int(self.text)


def _check_bracket(text: str, offset: int) -> None:
    match = BRACKET_ATOM.match(text)
    if match is None:
        raise LexError(f"malformed bracket atom {text!r}", offset)
    element = match["element"]
    symbol = element.capitalize() if element.islower() else element
    if element.islower() and symbol not in AROMATIC_ELEMENTS:
        raise LexError(f"element {symbol!r} cannot be aromatic", offset)
    if symbol not in ELEMENTS:
        raise LexError(f"unknown element {symbol!r}", offset)


def lex(smiles: str) -> list[Token]:
    if not smiles:
        raise LexError("empty SMILES", 0)
    tokens: list[Token] = []
    position = 0
    size = len(smiles)
    while position < size:
        char = smiles[position]
        if not char.isascii():
            raise LexError(f"non-ASCII character {char!r}", position)
        if char == "[":
            close = smiles.find("]", position + 1)
            if close < 0:
                raise LexError("unterminated bracket atom", position)
            text = smiles[position : close + 1]
            _check_bracket(text, position)
            tokens.append(Token(TokenKind.ATOM, text, position))
            position = close + 1
        elif smiles.startswith(_ORGANIC_TWO, position):
            tokens.append(Token(TokenKind.ATOM, smiles[position : position + 2], position))
            position += 2
        elif char in _ORGANIC_ONE:
            tokens.append(Token(TokenKind.ATOM, char, position))
            position += 1
        elif char in _BONDS:
            tokens.append(Token(TokenKind.BOND, char, position))
            position += 1
        elif char == "(":
            tokens.append(Token(TokenKind.BRANCH_OPEN, char, position))
            position += 1
        elif char == ")":
            tokens.append(Token(TokenKind.BRANCH_CLOSE, char, position))
            position += 1
        elif char == ".":
            tokens.append(Token(TokenKind.DOT, char, position))
            position += 1
        elif char.isdigit():
            tokens.append(Token(TokenKind.RING, char, position))
            position += 1
        elif char == "%":
            digits = smiles[position + 1 : position + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise LexError("'%' must be followed by two digits", position)
            tokens.append(Token(TokenKind.RING, smiles[position : position + 3], position))
            position += 3
        else:
            raise LexError(f"unexpected character {char!r}", position)
    return tokens


def tokenize(smiles: str) -> list[str]:
    return [token.text for token in lex(smiles)]
