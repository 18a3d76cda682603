from __future__ import annotations

from typing import TYPE_CHECKING

import networkx as nx
import numpy as np
import pytest

from retrodiff.config import Settings, get_settings
from retrodiff.net.config import ModelConfig
from retrodiff.net.model import DiffusionTransformer
from retrodiff.train.synth import synth_dataset
from retrodiff.train.trainer import build_vocabulary

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator

    from retrodiff.smiles.models import MolGraph
    from retrodiff.smiles.vocab import Vocabulary
    from retrodiff.train.data import ReactionRecord


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Iterator[None]:
    for name in ("RETRODIFF_OUTPUT_DIR", "RETRODIFF_OTEL_EXPORTER_OTLP_ENDPOINT", "RETRODIFF_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synth_records() -> list[ReactionRecord]:
    return synth_dataset(12, seed=7)


@pytest.fixture(scope="session")
def synth_vocab(synth_records: list[ReactionRecord]) -> Vocabulary:
    return build_vocabulary(synth_records)


@pytest.fixture
def toy_settings(tmp_path) -> Settings:
    return Settings(
        layers=1,
        heads=2,
        d_model=16,
        d_ff=32,
        max_len=64,
        length_bound=24,
        steps=8,
        pad_limit=4,
        dropout=0.0,
        epochs=1,
        batch_size=4,
        learning_rate=1e-3,
        output_dir=str(tmp_path / "runs"),
    )


@pytest.fixture
def toy_model(toy_settings: Settings, synth_vocab: Vocabulary) -> DiffusionTransformer:
    config = ModelConfig.from_settings(toy_settings, len(synth_vocab))
    return DiffusionTransformer(config, seed=3)


def to_networkx(graph: MolGraph) -> nx.Graph:
    out = nx.Graph()
    for index, atom in enumerate(graph.atoms):
        out.add_node(
            index,
            element=atom.element,
            aromatic=atom.aromatic,
            charge=atom.charge,
            isotope=atom.isotope,
            hydrogens=graph.total_h(index),
        )
    for bond in graph.bonds:
        out.add_edge(bond.begin, bond.end, order=bond.order.value)
    return out


def isomorphic(first: MolGraph, second: MolGraph) -> bool:
    return nx.is_isomorphic(
        to_networkx(first),
        to_networkx(second),
        node_match=lambda a, b: a == b,
        edge_match=lambda a, b: a == b,
    )


@pytest.fixture
def same_molecule() -> Callable[[MolGraph, MolGraph], bool]:
    """Graph isomorphism over element, aromaticity, charge, isotope, H count and bond order."""
    return isomorphic
