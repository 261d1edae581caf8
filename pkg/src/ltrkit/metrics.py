"""MRR@k and recall@k evaluation over ranked runs.

A query is evaluated when its judgments contain at least one document with
grade > 0; judged queries with no relevant document cannot score under
either metric and are excluded from the means but counted in the report.
Evaluated queries missing from the run score 0, so every answerable query
counts.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .core import Judgments, RankedRun
from .validation import check_positive_int


@dataclass(frozen=True)
class EvalReport:
    """Per-query reciprocal ranks at cutoff k plus the aggregate mean."""

    k: int
    per_query: dict[str, float]
    mrr: float
    query_count: int
    no_relevant_count: int

    def to_text(self) -> str:
        lines = [
            f"MRR@{self.k}: {self.mrr:.4f}",
            f"queries evaluated: {self.query_count}",
            f"queries without relevant docs (skipped): {self.no_relevant_count}",
        ]
        return "\n".join(lines)

    def to_jsonl(self) -> str:
        """One JSON record per query plus a final aggregate record."""
        records = [
            {"query_id": qid, "reciprocal_rank": rr, "k": self.k}
            for qid, rr in sorted(self.per_query.items())
        ]
        records.append(
            {
                "aggregate": True,
                "k": self.k,
                "mrr": self.mrr,
                "query_count": self.query_count,
                "no_relevant_count": self.no_relevant_count,
            }
        )
        return "\n".join(json.dumps(rec, sort_keys=True) for rec in records)


def _split_judged(judgments: Judgments) -> tuple[list[str], int]:
    evaluated = []
    no_relevant = 0
    for qid in judgments.queries():
        if judgments.relevant_docs(qid):
            evaluated.append(qid)
        else:
            no_relevant += 1
    return evaluated, no_relevant


def mrr_at_k(run: RankedRun, judgments: Judgments, k: int) -> EvalReport:
    """Mean reciprocal rank of the first relevant document, zeroed past k."""
    check_positive_int(k, "k")
    if len(judgments) == 0:
        raise ValueError("cannot evaluate against empty judgments")
    evaluated, no_relevant = _split_judged(judgments)
    per_query: dict[str, float] = {}
    for qid in evaluated:
        rr = 0.0
        if qid in run:
            for pos, (did, _) in enumerate(run.entries(qid)[:k], start=1):
                if judgments.grade(qid, did) > 0:
                    rr = 1.0 / pos
                    break
        per_query[qid] = rr
    mrr = sum(per_query.values()) / len(per_query) if per_query else 0.0
    return EvalReport(k, per_query, mrr, len(per_query), no_relevant)


def recall_at_k(run: RankedRun, judgments: Judgments, k: int) -> float:
    """Mean fraction of a query's relevant documents found in the top k."""
    check_positive_int(k, "k")
    if len(judgments) == 0:
        raise ValueError("cannot evaluate against empty judgments")
    evaluated, _ = _split_judged(judgments)
    if not evaluated:
        return 0.0
    total = 0.0
    for qid in evaluated:
        relevant = judgments.relevant_docs(qid)
        top = set(run.doc_ids(qid)[:k]) if qid in run else set()
        total += len(relevant & top) / len(relevant)
    return total / len(evaluated)
