from retrodiff.ensemble.metrics import CandidateStats, candidate_stats, rank_of, topk_accuracy, validity
from retrodiff.ensemble.models import Ballot, CandidateRanking, EnsembleMember, RankedCandidate, Sample
from retrodiff.ensemble.report import EvalRow, format_eval_table, format_ranking
from retrodiff.ensemble.service import EnsembleService, Evaluation, LoadedMember, load_members, sample_candidates
from retrodiff.ensemble.voting import aggregate, break_ties, build_ballots, final_order

__all__ = [
    "Ballot",
    "CandidateRanking",
    "CandidateStats",
    "EnsembleMember",
    "EnsembleService",
    "EvalRow",
    "Evaluation",
    "LoadedMember",
    "RankedCandidate",
    "Sample",
    "aggregate",
    "break_ties",
    "build_ballots",
    "candidate_stats",
    "final_order",
    "format_eval_table",
    "format_ranking",
    "load_members",
    "rank_of",
    "sample_candidates",
    "topk_accuracy",
    "validity",
]
