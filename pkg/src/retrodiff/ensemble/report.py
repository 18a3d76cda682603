"""Tab-separated reports: per-product candidate rankings and the evaluation table."""

from __future__ import annotations

from typing import TYPE_CHECKING

from pydantic import BaseModel

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from retrodiff.ensemble.metrics import CandidateStats
    from retrodiff.ensemble.models import CandidateRanking

RANKING_HEADER = ("rank", "reactants", "count", "frequency")
EVAL_HEADER = ("Model", "Top-1", "Top-3", "Top-5", "Top-10", "Sample Validity", "Avg. Num. Reactants")
FAILED_CELL = "error"


class EvalRow(BaseModel):
    label: str
    top1: float
    top3: float
    top5: float
    top10: float
    validity: float
    avg_reactants: float
    failures: int = 0

    @classmethod
    def from_metrics(cls, label: str, accuracy: Mapping[int, float], validity: float, avg: float) -> EvalRow:
        return cls(
            label=label,
            top1=accuracy.get(1, 0.0),
            top3=accuracy.get(3, 0.0),
            top5=accuracy.get(5, 0.0),
            top10=accuracy.get(10, 0.0),
            validity=validity,
            avg_reactants=avg,
        )

    @classmethod
    def failed(cls, label: str, failures: int) -> EvalRow:
        """Row for a member that could not sample every reaction; its metrics are not reported."""
        return cls.from_metrics(label, {}, 0.0, 0.0).model_copy(update={"failures": failures})

    def cells(self) -> list[str]:
        if self.failures:
            return [self.label, *(FAILED_CELL for _ in EVAL_HEADER[1:])]
        percents = (self.top1, self.top3, self.top5, self.top10, self.validity)
        return [self.label, *(f"{100.0 * value:.1f}" for value in percents), f"{self.avg_reactants:.2f}"]


def format_ranking(ranking: CandidateRanking, accuracy: Mapping[int, float] | None = None) -> str:
    lines = ["\t".join(RANKING_HEADER)]
    for rank, entry in enumerate(ranking.entries, start=1):
        lines.append(f"{rank}\t{entry.reactants}\t{entry.count}\t{entry.frequency:.4f}")
    lines.append(f"# samples\t{ranking.total_samples}\tvalid\t{ranking.valid_samples}")
    if accuracy:
        lines.append("# " + "\t".join(f"top-{k}\t{value:.4f}" for k, value in sorted(accuracy.items())))
    return "\n".join(lines) + "\n"


def format_eval_table(rows: Sequence[EvalRow], stats: CandidateStats | None = None) -> str:
    lines = ["\t".join(EVAL_HEADER)]
    lines.extend("\t".join(row.cells()) for row in rows)
    if stats is not None:
        lines.append(
            "# candidates\t"
            f"mean\t{stats.mean:.2f}\tmedian\t{stats.median:.1f}\t"
            f"below_5\t{stats.below_5:.3f}\tbelow_10\t{stats.below_10:.3f}\t"
            f"correct\t{stats.mean_when_correct:.2f}\tincorrect\t{stats.mean_when_incorrect:.2f}"
        )
    return "\n".join(lines) + "\n"
