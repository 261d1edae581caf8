"""Reciprocal-rank ensembling of n runs and two-list fusion.

Ensembling rescores each (query, document) with the average reciprocal rank
over the runs: s = (1/n) * sum_k 1/P_k, where a run that does not contain
the pair contributes 0 while n stays the divisor (a document absent from a
run earned no rank there). Two-list fusion averages the two reciprocal
ranks for documents present in both lists and keeps the single reciprocal
rank otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .core import RankedRun, rank_positions


@dataclass(frozen=True)
class RunSet:
    """Named, ordered collection of runs to ensemble."""

    entries: tuple[tuple[str, RankedRun], ...]

    def __post_init__(self):
        entries = tuple((str(name), run) for name, run in self.entries)
        if not entries:
            raise ValueError("a RunSet needs at least one run")
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            raise ValueError(f"run names must be unique, got {names}")
        object.__setattr__(self, "entries", entries)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    @property
    def runs(self) -> list[RankedRun]:
        return [run for _, run in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def ensemble_reciprocal_rank(runs: RunSet) -> RankedRun:
    """Average-reciprocal-rank ensemble over every run in the set."""
    n = len(runs)
    queries = sorted({qid for run in runs.runs for qid in run.queries()})
    per_query: dict[str, list[tuple[str, float]]] = {}
    for qid in queries:
        contributions: dict[str, list[float]] = {}
        for run in runs.runs:
            if qid not in run:
                continue
            for did, pos in rank_positions(run.entries(qid)).items():
                contributions.setdefault(did, []).append(1.0 / pos)
        # fsum rounds the exact sum once, so run order cannot perturb scores
        per_query[qid] = [(did, math.fsum(values) / n) for did, values in contributions.items()]
    return RankedRun(per_query)


def fuse_two_lists(run_a: RankedRun, run_b: RankedRun) -> RankedRun:
    """Fuse two runs by reciprocal rank.

    Documents present in both lists for a query get the average of their two
    reciprocal ranks; documents present in exactly one list keep that list's
    reciprocal rank.
    """
    queries = sorted(set(run_a.queries()) | set(run_b.queries()))
    per_query: dict[str, list[tuple[str, float]]] = {}
    for qid in queries:
        pos_a = rank_positions(run_a.entries(qid)) if qid in run_a else {}
        pos_b = rank_positions(run_b.entries(qid)) if qid in run_b else {}
        fused: dict[str, float] = {}
        for did in pos_a.keys() | pos_b.keys():
            if did in pos_a and did in pos_b:
                fused[did] = (1.0 / pos_a[did] + 1.0 / pos_b[did]) / 2.0
            elif did in pos_a:
                fused[did] = 1.0 / pos_a[did]
            else:
                fused[did] = 1.0 / pos_b[did]
        per_query[qid] = list(fused.items())
    return RankedRun(per_query)
