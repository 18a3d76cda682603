from __future__ import annotations

import itertools

import pytest

from retrodiff.ensemble.models import Ballot, Sample
from retrodiff.ensemble.voting import aggregate, break_ties, build_ballots, final_order
from retrodiff.smiles.canon import try_canonical_set


def _ballots(*orders: list[str]) -> list[Ballot]:
    return [Ballot(model_id=f"m{index}", candidates=order) for index, order in enumerate(orders)]


def _sample(model_id: str, text: str) -> Sample:
    return Sample(model_id=model_id, text=text, reactants=try_canonical_set(text))


@pytest.mark.unit
def test_runoff_eliminates_fewest_first_choices() -> None:
    ballots = _ballots(["A", "B", "C"], ["B", "A", "C"], ["B", "C", "A"])

    assert break_ties(["A", "B", "C"], ballots) == ["B", "A", "C"]


@pytest.mark.unit
def test_single_ballot_is_its_own_order() -> None:
    assert break_ties(["C", "A", "B"], _ballots(["B", "C", "A"])) == ["B", "C", "A"]


@pytest.mark.unit
def test_identical_ballots_reproduce_the_ballot() -> None:
    order = ["D", "A", "C", "B"]
    assert break_ties(order, _ballots(order, order, order)) == order


@pytest.mark.unit
def test_unseparable_candidates_fall_back_to_string_order() -> None:
    assert break_ties(["Z", "X", "Y"], _ballots(["Q"])) == ["X", "Y", "Z"]


@pytest.mark.unit
def test_runoff_ignores_ballot_order() -> None:
    ballots = _ballots(["A", "B", "C", "D"], ["B", "D", "A", "C"], ["C", "A", "B", "D"], ["A", "C", "D", "B"])
    expected = break_ties("ABCD", ballots)

    for permutation in itertools.permutations(ballots):
        assert break_ties("ABCD", list(permutation)) == expected


@pytest.mark.unit
def test_ballots_rank_by_each_models_counts() -> None:
    samples = [_sample("a", "CCO"), _sample("a", "CCN"), _sample("a", "CCN"), _sample("b", "CCO"), _sample("b", "C1")]

    ballots = build_ballots(samples)

    assert [b.model_id for b in ballots] == ["a", "b"]
    assert ballots[0].candidates == [try_canonical_set("CCN"), try_canonical_set("CCO")]
    assert ballots[1].candidates == [try_canonical_set("CCO")]


@pytest.mark.unit
def test_duplicate_ballot_entries_are_rejected() -> None:
    with pytest.raises(ValueError):
        Ballot(model_id="m", candidates=["A", "A"])


@pytest.mark.unit
def test_aggregate_counts_and_frequencies() -> None:
    texts = ["CCO", "OCC", "C(O)C", "CCN", "NCC", "CC", "C((C"]
    samples = [_sample(f"m{i % 2}", text) for i, text in enumerate(texts)]

    ranking, _ = aggregate(samples)

    assert ranking.candidates == [try_canonical_set(text) for text in ("CCO", "CCN", "CC")]
    assert [entry.count for entry in ranking.entries] == [3, 2, 1]
    assert ranking.entries[0].frequency == pytest.approx(3 / 7)
    assert ranking.total_samples == 7
    assert ranking.valid_samples == 6
    assert ranking.validity == pytest.approx(6 / 7)
    assert sum(entry.frequency for entry in ranking.entries) == pytest.approx(6 / 7)


@pytest.mark.unit
def test_reactant_sets_are_order_insensitive() -> None:
    samples = [_sample("m", "CCO.CC(=O)O"), _sample("m", "OC(C)=O.OCC"), _sample("m", "CCO")]

    assert final_order(samples)[0] == try_canonical_set("CC(=O)O.CCO")


@pytest.mark.unit
def test_equal_counts_are_ordered_by_runoff() -> None:
    samples = [
        _sample("a", "CCO"),
        _sample("a", "CCO"),
        _sample("a", "CCO"),
        _sample("a", "CCN"),
        _sample("b", "CCN"),
        _sample("b", "CCN"),
        _sample("b", "CCO"),
        _sample("c", "CCN"),
    ]

    assert final_order(samples) == [try_canonical_set("CCN"), try_canonical_set("CCO")]


@pytest.mark.unit
def test_no_valid_samples_gives_empty_ranking(caplog: pytest.LogCaptureFixture) -> None:
    ranking, _ = aggregate([_sample("m", "C((C"), Sample(model_id="m", text="")])

    assert len(ranking) == 0
    assert ranking.top is None
    assert ranking.total_samples == 2
    assert "no valid sample" in caplog.text
