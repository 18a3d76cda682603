from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from retrodiff.errors import ContractError
from retrodiff.smiles.lexer import tokenize

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

PAD = "<pad>"
LENGTH = "<length>"
UNK = "<unk>"
SEPARATOR = "."

SPECIAL_TOKENS = (PAD, LENGTH, UNK, SEPARATOR)
STRUCTURAL_TOKENS = ("(", ")", "-", "=", "#", ":", "/", "\\", *(str(digit) for digit in range(1, 10)))


class Vocabulary:
    """Token <-> id mapping over SMILES surface tokens.

    Ids 0..3 are always PAD, LENGTH, UNK and the "." separator.
    """

    def __init__(self, tokens: Sequence[str]) -> None:
        if tuple(tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ContractError(f"vocabulary must start with {SPECIAL_TOKENS}")
        if len(set(tokens)) != len(tokens):
            raise ContractError("vocabulary tokens must be unique")
        self.tokens: tuple[str, ...] = tuple(tokens)
        self._index = {token: index for index, token in enumerate(self.tokens)}

    @classmethod
    def build(cls, corpus: Iterable[str]) -> Vocabulary:
        seen: set[str] = set()
        for smiles in corpus:
            seen.update(tokenize(smiles))
        # Re-rooting can flip a chirality marker, so both spellings belong in the vocabulary.
        for token in list(seen):
            if "@@" in token:
                seen.add(token.replace("@@", "@"))
            elif "@" in token:
                seen.add(token.replace("@", "@@"))
        extra = sorted(seen.union(STRUCTURAL_TOKENS).difference(SPECIAL_TOKENS))
        return cls([*SPECIAL_TOKENS, *extra])

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    @property
    def pad_id(self) -> int:
        return 0

    @property
    def length_id(self) -> int:
        return 1

    @property
    def unk_id(self) -> int:
        return 2

    @property
    def separator_id(self) -> int:
        return 3

    def encode(self, smiles: str) -> list[int]:
        """Token ids of ``smiles``; tokens outside the vocabulary become UNK."""
        ids = [self._index.get(token, self.unk_id) for token in tokenize(smiles)]
        unknown = ids.count(self.unk_id)
        if unknown:
            logger.debug("%d unknown tokens in %r", unknown, smiles)
        return ids

    def decode(self, ids: Iterable[int]) -> str:
        out = []
        for token_id in ids:
            if not 0 <= token_id < len(self.tokens):
                raise ContractError(f"token id {token_id} outside vocabulary of size {len(self.tokens)}")
            out.append(self.tokens[token_id])
        return "".join(out)
