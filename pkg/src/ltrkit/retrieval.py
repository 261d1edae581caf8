"""In-memory inverted index with Okapi BM25 scoring.

The index stores postings of (doc_id, term frequency) sorted by doc id, per
document lengths and per-token document frequencies. Scoring uses the
+1-smoothed IDF ln((N - df + 0.5) / (df + 0.5) + 1), which keeps every
term contribution non-negative, with the standard k1 = 1.2, b = 0.75
saturation and length normalization. Query tokens contribute once per
occurrence in the query.

Desk-scale corpora fit comfortably in memory; an optional JSON snapshot
(versioned) serializes a built index.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .core import CheckpointError, check_identifier, order_entries
from .validation import check_positive_int

BM25_K1 = 1.2
BM25_B = 0.75

_SNAPSHOT_FORMAT = "ltrkit-index"
_SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class Corpus:
    """Tokenized document collection."""

    docs: dict[str, tuple[str, ...]]

    def __post_init__(self):
        normalized = {}
        for did, tokens in self.docs.items():
            check_identifier(did, "doc id")
            normalized[did] = tuple(tokens)
        object.__setattr__(self, "docs", normalized)

    @property
    def num_docs(self) -> int:
        return len(self.docs)

    @property
    def avgdl(self) -> float:
        if not self.docs:
            return 0.0
        return sum(len(t) for t in self.docs.values()) / len(self.docs)

    def __len__(self) -> int:
        return len(self.docs)


class InvertedIndex:
    """Postings per token plus the corpus statistics BM25 needs."""

    def __init__(
        self,
        postings: Mapping[str, Iterable[tuple[str, int]]],
        doc_lengths: Mapping[str, int],
        avgdl: float,
    ):
        self.postings = {tok: sorted(((d, int(tf)) for d, tf in plist)) for tok, plist in postings.items()}
        self.doc_lengths = dict(doc_lengths)
        self.num_docs = len(self.doc_lengths)
        self.avgdl = float(avgdl)

    def doc_frequency(self, token: str) -> int:
        return len(self.postings.get(token, ()))

    def idf(self, token: str) -> float:
        return okapi_idf(self.doc_frequency(token), self.num_docs)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InvertedIndex)
            and self.postings == other.postings
            and self.doc_lengths == other.doc_lengths
            and self.avgdl == other.avgdl
        )


def okapi_idf(df: int, num_docs: int) -> float:
    """+1-smoothed inverse document frequency; non-negative for any df."""
    return math.log((num_docs - df + 0.5) / (df + 0.5) + 1.0)


def okapi_term_score(tf: int, df: int, num_docs: int, doc_len: int, avgdl: float) -> float:
    """One term's BM25 contribution for a document."""
    if tf <= 0:
        return 0.0
    norm = 1.0 - BM25_B + BM25_B * doc_len / (avgdl if avgdl > 0 else 1.0)
    return okapi_idf(df, num_docs) * tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * norm)


def build_index(corpus: Corpus) -> InvertedIndex:
    """Build the inverted index; deterministic for a given corpus."""
    if corpus.num_docs == 0:
        raise ValueError("cannot build an index over an empty corpus")
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for did in sorted(corpus.docs):
        tokens = corpus.docs[did]
        doc_lengths[did] = len(tokens)
        for token, tf in sorted(Counter(tokens).items()):
            postings.setdefault(token, []).append((did, tf))
    return InvertedIndex(postings, doc_lengths, corpus.avgdl)


def bm25_search(index: InvertedIndex, query_tokens: Iterable[str], k: int) -> list[tuple[str, float]]:
    """Top-k documents by BM25 score, ordered score desc then doc id asc.

    Only documents containing at least one query token are scored; the
    result may hold fewer than k entries. An empty query yields an empty
    result.
    """
    check_positive_int(k, "k")
    tokens = list(query_tokens)
    if not tokens:
        return []
    scores: dict[str, float] = {}
    for token in tokens:
        plist = index.postings.get(token)
        if not plist:
            continue
        df = len(plist)
        for did, tf in plist:
            contribution = okapi_term_score(tf, df, index.num_docs, index.doc_lengths[did], index.avgdl)
            scores[did] = scores.get(did, 0.0) + contribution
    ranked = order_entries(scores.items())
    return ranked[:k]


def save_index(index: InvertedIndex, path: str | Path) -> None:
    """Write a deterministic JSON snapshot of the index."""
    payload = {
        "format": _SNAPSHOT_FORMAT,
        "version": _SNAPSHOT_VERSION,
        "avgdl": index.avgdl,
        "doc_lengths": index.doc_lengths,
        "postings": {tok: [[d, tf] for d, tf in plist] for tok, plist in index.postings.items()},
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8")


def load_index(path: str | Path) -> InvertedIndex:
    """Read a snapshot, refusing unknown formats or versions."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not an index snapshot ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != _SNAPSHOT_FORMAT:
        raise CheckpointError(f"{path}: not an index snapshot")
    if payload.get("version") != _SNAPSHOT_VERSION:
        raise CheckpointError(f"{path}: unsupported snapshot version {payload.get('version')!r}")
    postings = {tok: [(d, int(tf)) for d, tf in plist] for tok, plist in payload["postings"].items()}
    return InvertedIndex(postings, {d: int(n) for d, n in payload["doc_lengths"].items()}, payload["avgdl"])
