"""Shared domain types: identifiers, judgments, query groups and ranked runs.

Identifiers for queries and documents are opaque non-empty strings without
tab, carriage-return or newline characters, so they survive every file
format used by the toolkit unchanged. Ranked lists are always ordered by
score descending with ties broken by ascending document id; rank positions
are 1-based. All types here are immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

_FORBIDDEN_ID_CHARS = ("\t", "\n", "\r")


class LtrError(Exception):
    """Base class for toolkit errors that map to a data-error exit code."""


class DataFormatError(LtrError):
    """Malformed input file; carries the file path and 1-based line number."""

    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = path
        self.line_no = line_no


class CheckpointError(LtrError):
    """Checkpoint file has an unknown version or inconsistent layout."""


class TrainingDivergedError(LtrError):
    """Training produced a non-finite loss or parameter."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


def check_identifier(value: str, kind: str = "identifier") -> str:
    """Validate a query/document id: non-empty, no tab or newline characters."""
    if not isinstance(value, str) or not value:
        raise ValueError(f"{kind} must be a non-empty string, got {value!r}")
    for ch in _FORBIDDEN_ID_CHARS:
        if ch in value:
            raise ValueError(f"{kind} {value!r} contains a forbidden character {ch!r}")
    return value


class Judgments:
    """Relevance grades keyed by (query_id, doc_id); absent pairs are grade 0."""

    def __init__(self, grades: Mapping[tuple[str, str], int] | Iterable[tuple[str, str, int]] = ()):
        table: dict[tuple[str, str], int] = {}
        if isinstance(grades, Mapping):
            items = list(grades.items())
        else:
            items = [((q, d), g) for q, d, g in grades]
        for (qid, did), grade in items:
            check_identifier(qid, "query id")
            check_identifier(did, "doc id")
            if not isinstance(grade, (int, np.integer)) or grade < 0:
                raise ValueError(f"relevance grade must be a non-negative integer, got {grade!r}")
            table[(qid, did)] = int(grade)
        self._grades = table

    def grade(self, query_id: str, doc_id: str) -> int:
        return self._grades.get((query_id, doc_id), 0)

    def queries(self) -> list[str]:
        """All judged query ids, sorted."""
        return sorted({q for q, _ in self._grades})

    def relevant_docs(self, query_id: str) -> frozenset[str]:
        """Doc ids with grade > 0 for the query."""
        return frozenset(d for (q, d), g in self._grades.items() if q == query_id and g > 0)

    def __len__(self) -> int:
        return len(self._grades)

    def __eq__(self, other) -> bool:
        return isinstance(other, Judgments) and self._grades == other._grades


@dataclass(frozen=True)
class QueryGroup:
    """One query with its candidate documents, feature vectors and labels.

    ``features`` is an (n_docs, n_features) float matrix aligned with
    ``doc_ids`` and ``labels``; the unit of listwise scoring and reranking.
    """

    query_id: str
    doc_ids: tuple[str, ...]
    features: np.ndarray
    labels: tuple[int, ...]

    def __post_init__(self):
        check_identifier(self.query_id, "query id")
        object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
        object.__setattr__(self, "labels", tuple(int(v) for v in self.labels))
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] < 1:
            raise ValueError(f"features must be a 2-d matrix with >= 1 column, got shape {feats.shape}")
        object.__setattr__(self, "features", feats)
        n = len(self.doc_ids)
        if feats.shape[0] != n or len(self.labels) != n:
            raise ValueError(
                f"query {self.query_id!r}: doc_ids/features/labels lengths disagree "
                f"({n}/{feats.shape[0]}/{len(self.labels)})"
            )
        seen = set()
        for did in self.doc_ids:
            check_identifier(did, "doc id")
            if did in seen:
                raise ValueError(f"query {self.query_id!r}: duplicate doc id {did!r}")
            seen.add(did)
        if any(v < 0 for v in self.labels):
            raise ValueError(f"query {self.query_id!r}: negative relevance grade")

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return len(self.doc_ids)


def order_entries(entries: Iterable[tuple[str, float]]) -> list[tuple[str, float]]:
    """Sort (doc_id, score) pairs by score descending, ties by ascending doc id.

    Rejects duplicate doc ids, naming the offending id.
    """
    items = [(str(did), float(score)) for did, score in entries]
    seen = set()
    for did, _ in items:
        if did in seen:
            raise ValueError(f"duplicate doc id in ranked list: {did!r}")
        seen.add(did)
    items.sort(key=lambda item: (-item[1], item[0]))
    return items


def rank_positions(entries: Iterable[tuple[str, float]]) -> dict[str, int]:
    """Map each doc id to its 1-based rank under the (score desc, id asc) order."""
    return {did: pos for pos, (did, _) in enumerate(order_entries(entries), start=1)}


class RankedRun:
    """Per-query ranked document lists with scores.

    Lists are stored already ordered by the canonical rule; queries iterate
    in sorted order so a run's serialized form is independent of how it was
    assembled.
    """

    def __init__(self, per_query: Mapping[str, Iterable[tuple[str, float]]] = ()):
        lists: dict[str, list[tuple[str, float]]] = {}
        for qid, entries in dict(per_query).items():
            check_identifier(qid, "query id")
            ordered = order_entries(entries)
            for did, _ in ordered:
                check_identifier(did, "doc id")
            lists[qid] = ordered
        self._lists = lists

    def queries(self) -> list[str]:
        return sorted(self._lists)

    def entries(self, query_id: str) -> list[tuple[str, float]]:
        return list(self._lists[query_id])

    def doc_ids(self, query_id: str) -> list[str]:
        return [did for did, _ in self._lists[query_id]]

    def __contains__(self, query_id: str) -> bool:
        return query_id in self._lists

    def __len__(self) -> int:
        return len(self._lists)

    def __eq__(self, other) -> bool:
        return isinstance(other, RankedRun) and self._lists == other._lists

    def __repr__(self) -> str:
        return f"RankedRun({len(self._lists)} queries)"
