from retrodiff.smiles.align import random_root_align, root_align
from retrodiff.smiles.canon import canonical, canonical_set, try_canonical_set
from retrodiff.smiles.lexer import Token, TokenKind, lex, tokenize
from retrodiff.smiles.models import Atom, Bond, BondOrder, BondStereo, Chirality, MolGraph, strip_atom_maps
from retrodiff.smiles.parser import parse, parse_smiles
from retrodiff.smiles.vocab import Vocabulary
from retrodiff.smiles.writer import random_rooted, write, write_with_order

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "BondStereo",
    "Chirality",
    "MolGraph",
    "Token",
    "TokenKind",
    "Vocabulary",
    "canonical",
    "canonical_set",
    "lex",
    "parse",
    "parse_smiles",
    "random_root_align",
    "random_rooted",
    "root_align",
    "strip_atom_maps",
    "tokenize",
    "try_canonical_set",
    "write",
    "write_with_order",
]
