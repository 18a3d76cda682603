from __future__ import annotations

from pydantic import BaseModel, Field, computed_field, model_validator


class Sample(BaseModel):
    """One decoded generation; ``reactants`` is its canonical reactant set, None when unparseable."""

    model_id: str
    text: str
    reactants: str | None = None

    @computed_field
    @property
    def valid(self) -> bool:
        return self.reactants is not None


class Ballot(BaseModel):
    model_id: str
    candidates: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_unique(self) -> Ballot:
        if len(set(self.candidates)) != len(self.candidates):
            raise ValueError(f"ballot of {self.model_id} lists a candidate twice")
        return self


class RankedCandidate(BaseModel):
    reactants: str
    count: int
    frequency: float


class CandidateRanking(BaseModel):
    entries: list[RankedCandidate] = Field(default_factory=list)
    total_samples: int = 0
    valid_samples: int = 0

    @property
    def candidates(self) -> list[str]:
        return [entry.reactants for entry in self.entries]

    @property
    def top(self) -> str | None:
        return self.entries[0].reactants if self.entries else None

    @property
    def validity(self) -> float:
        return self.valid_samples / self.total_samples if self.total_samples else 0.0

    def __len__(self) -> int:
        return len(self.entries)


class EnsembleMember(BaseModel):
    """How a loaded checkpoint is labelled in reports."""

    model_id: str
    pad_limit: int
    path: str = ""
