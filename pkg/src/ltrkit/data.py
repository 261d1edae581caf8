"""File parsers and training-data construction.

File formats (UTF-8, CRLF tolerated, one record per line):

* triples TSV:    ``query \\t positive_passage \\t negative_passage``
* qrels:          whitespace-separated ``qid 0 pid grade``
* candidates TSV: ``qid \\t pid \\t query_text \\t passage_text`` (top-1000 style)
* collection TSV: ``pid \\t passage_text``
* queries TSV:    ``qid \\t query_text``

Training lists are built from triples: consecutive triples sharing the same
(query, positive) pair form a group, the group's distinct negatives are
shuffled and chunked into lists of ``list_size - 1``, the positive is
inserted at a seeded-random position in each list, and a short final chunk
is padded with masked entries.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Iterator

import numpy as np

from .core import DataFormatError, Judgments, QueryGroup, check_identifier
from .retrieval import Corpus, InvertedIndex, okapi_term_score

logger = logging.getLogger(__name__)

#: Version tag of the featurize() output layout below.
FEATURE_VERSION = 1
#: Feature positions: overlap count, overlap fraction, idf-weighted overlap,
#: idf overlap fraction, log1p query length, log1p passage length,
#: log1p length ratio, BM25 score (0.0 when no index is supplied).
NUM_FEATURES = 8

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters, dropping empties."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Triple:
    """One training record: a query with one relevant and one irrelevant passage."""

    query_text: str
    positive_text: str
    negative_text: str


@dataclass(frozen=True)
class TrainingList:
    """Fixed-size list of one relevant plus negatives, padded with masked rows."""

    query_key: str
    features: np.ndarray
    labels: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        mask = np.asarray(self.mask, dtype=bool)
        if features.ndim != 2:
            raise ValueError(f"features must be (list_size, num_features), got shape {features.shape}")
        n = features.shape[0]
        if labels.shape != (n,) or mask.shape != (n,):
            raise ValueError("labels and mask must align with the feature rows")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("training-list labels must be 0 or 1")
        if (labels[~mask] != 0).any():
            raise ValueError("masked entries must carry label 0")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "mask", mask)

    @property
    def list_size(self) -> int:
        return self.features.shape[0]


@dataclass(frozen=True)
class GroupSkeleton:
    """A query with its candidate passages, before featurization."""

    query_id: str
    query_text: str
    candidates: tuple[tuple[str, str], ...]


def _read_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            yield line_no, raw.rstrip("\n")


def parse_triples(path: str | Path) -> Iterator[Triple]:
    """Stream triples from a TSV file, erroring with the offending line number."""
    for line_no, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 3:
            raise DataFormatError(path, line_no, f"expected 3 tab-separated fields, got {len(fields)}")
        if any(not f for f in fields):
            raise DataFormatError(path, line_no, "empty field in triple")
        yield Triple(*fields)


def featurize(query_text: str, passage_text: str, index: InvertedIndex | None = None) -> np.ndarray:
    """Deterministic text-overlap feature vector for a (query, passage) pair.

    Layout is fixed (see NUM_FEATURES); without an index the IDF weight of
    every token is 1.0 and the BM25 feature is 0.0, so the dimension never
    changes. Callers must featurize training and scoring data the same way.
    """
    q_tokens = tokenize(query_text)
    p_tokens = tokenize(passage_text)
    q_set = set(q_tokens)
    p_counts: dict[str, int] = {}
    for tok in p_tokens:
        p_counts[tok] = p_counts.get(tok, 0) + 1
    overlap = q_set & p_counts.keys()

    if index is not None:
        idf = {tok: index.idf(tok) for tok in q_set}
    else:
        idf = {tok: 1.0 for tok in q_set}
    idf_total = sum(idf.values())
    idf_overlap = sum(idf[tok] for tok in overlap)

    bm25 = 0.0
    if index is not None:
        for tok in q_tokens:
            bm25 += okapi_term_score(
                p_counts.get(tok, 0), index.doc_frequency(tok), index.num_docs, len(p_tokens), index.avgdl
            )

    q_len = len(q_tokens)
    p_len = len(p_tokens)
    return np.array(
        [
            float(len(overlap)),
            len(overlap) / max(len(q_set), 1),
            idf_overlap,
            idf_overlap / idf_total if idf_total > 0 else 0.0,
            np.log1p(q_len),
            np.log1p(p_len),
            np.log1p(p_len / max(q_len, 1)),
            bm25,
        ],
        dtype=np.float64,
    )


def group_triples(
    triples: Iterable[Triple],
    list_size: int = 12,
    seed: int = 0,
    featurizer: Callable[[str, str], np.ndarray] = featurize,
) -> Iterator[TrainingList]:
    """Build fixed-size training lists from a stream of triples.

    Consecutive triples sharing (query_text, positive_text) form one group;
    the group's distinct negatives are shuffled with the given seed and
    chunked into lists of ``list_size - 1`` negatives plus the positive at
    a seeded-random position. The final short chunk is padded with masked
    zero rows.
    """
    if list_size < 2:
        raise ValueError(f"list_size must be >= 2, got {list_size}")
    rng = np.random.default_rng(seed)

    key: tuple[str, str] | None = None
    negatives: list[str] = []
    for triple in triples:
        this_key = (triple.query_text, triple.positive_text)
        if this_key != key:
            if key is not None:
                yield from _emit_group(key, negatives, list_size, rng, featurizer)
            key = this_key
            negatives = []
        negatives.append(triple.negative_text)
    if key is not None:
        yield from _emit_group(key, negatives, list_size, rng, featurizer)


def _emit_group(key, negatives, list_size, rng, featurizer) -> Iterator[TrainingList]:
    query_text, positive_text = key
    distinct = list(dict.fromkeys(negatives))
    order = rng.permutation(len(distinct))
    shuffled = [distinct[i] for i in order]

    positive_vec = featurizer(query_text, positive_text)
    num_features = positive_vec.shape[0]
    chunk = list_size - 1
    for start in range(0, len(shuffled), chunk):
        chunk_texts = shuffled[start : start + chunk]
        n_real = len(chunk_texts) + 1
        pos_at = int(rng.integers(0, n_real))
        features = np.zeros((list_size, num_features))
        labels = np.zeros(list_size, dtype=np.int64)
        mask = np.zeros(list_size, dtype=bool)
        mask[:n_real] = True
        labels[pos_at] = 1
        features[pos_at] = positive_vec
        slots = [i for i in range(n_real) if i != pos_at]
        for slot, text in zip(slots, chunk_texts):
            features[slot] = featurizer(query_text, text)
        yield TrainingList(query_text, features, labels, mask)


def parse_qrels(path: str | Path) -> Judgments:
    """Read whitespace-separated ``qid 0 pid grade`` judgments."""
    grades: dict[tuple[str, str], int] = {}
    for line_no, line in _read_lines(path):
        if not line.strip():
            continue
        fields = line.split()
        if len(fields) != 4:
            raise DataFormatError(path, line_no, f"expected 4 whitespace-separated fields, got {len(fields)}")
        qid, _, pid, grade_text = fields
        try:
            grade = int(grade_text)
        except ValueError:
            raise DataFormatError(path, line_no, f"relevance grade is not an integer: {grade_text!r}") from None
        if grade < 0:
            raise DataFormatError(path, line_no, f"negative relevance grade {grade}")
        try:
            check_identifier(qid, "query id")
            check_identifier(pid, "doc id")
        except ValueError as exc:
            raise DataFormatError(path, line_no, str(exc)) from None
        grades[(qid, pid)] = grade
    return Judgments(grades)


def parse_top1000(path: str | Path) -> list[GroupSkeleton]:
    """Read candidate lists (``qid \\t pid \\t query_text \\t passage_text``).

    Duplicate (qid, pid) pairs keep the first occurrence and log a warning.
    Candidates are grouped per query in file order.
    """
    texts: dict[str, str] = {}
    candidates: dict[str, list[tuple[str, str]]] = {}
    seen: set[tuple[str, str]] = set()
    for line_no, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 4:
            raise DataFormatError(path, line_no, f"expected 4 tab-separated fields, got {len(fields)}")
        qid, pid, query_text, passage_text = fields
        try:
            check_identifier(qid, "query id")
            check_identifier(pid, "doc id")
        except ValueError as exc:
            raise DataFormatError(path, line_no, str(exc)) from None
        if not query_text:
            raise DataFormatError(path, line_no, "empty query text")
        if (qid, pid) in seen:
            logger.warning("%s:%d: duplicate candidate (%s, %s); keeping first occurrence", path, line_no, qid, pid)
            continue
        seen.add((qid, pid))
        texts.setdefault(qid, query_text)
        candidates.setdefault(qid, []).append((pid, passage_text))
    return [GroupSkeleton(qid, texts[qid], tuple(cands)) for qid, cands in candidates.items()]


def parse_collection(path: str | Path) -> Corpus:
    """Read a ``pid \\t passage_text`` collection into a tokenized corpus."""
    docs: dict[str, tuple[str, ...]] = {}
    for line_no, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataFormatError(path, line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        pid, text = fields
        try:
            check_identifier(pid, "doc id")
        except ValueError as exc:
            raise DataFormatError(path, line_no, str(exc)) from None
        if pid in docs:
            raise DataFormatError(path, line_no, f"duplicate doc id {pid!r} in collection")
        docs[pid] = tuple(tokenize(text))
    return Corpus(docs)


def parse_queries(path: str | Path) -> list[tuple[str, str]]:
    """Read a ``qid \\t query_text`` file, preserving order."""
    queries: list[tuple[str, str]] = []
    seen: set[str] = set()
    for line_no, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise DataFormatError(path, line_no, f"expected 2 tab-separated fields, got {len(fields)}")
        qid, text = fields
        try:
            check_identifier(qid, "query id")
        except ValueError as exc:
            raise DataFormatError(path, line_no, str(exc)) from None
        if not text:
            raise DataFormatError(path, line_no, "empty query text")
        if qid in seen:
            raise DataFormatError(path, line_no, f"duplicate query id {qid!r}")
        seen.add(qid)
        queries.append((qid, text))
    return queries


def build_query_groups(
    skeletons: Iterable[GroupSkeleton],
    judgments: Judgments | None = None,
    index: InvertedIndex | None = None,
) -> Iterator[QueryGroup]:
    """Featurize candidate skeletons into scoreable query groups."""
    for skel in skeletons:
        features = np.stack([featurize(skel.query_text, text, index) for _, text in skel.candidates])
        labels = tuple(
            judgments.grade(skel.query_id, pid) if judgments is not None else 0 for pid, _ in skel.candidates
        )
        yield QueryGroup(skel.query_id, tuple(pid for pid, _ in skel.candidates), features, labels)
