"""Deterministic synthetic ranking benchmark generator.

Relevance is planted through token overlap: each query draws a few topic
tokens and its one relevant passage keeps most of them. Distractors are
noisy along different axes - some match almost all topic tokens but are
long and diluted, some are short with a single strong match, most are
random filler - so rankers that weight coverage, brevity and token rarity
differently make different mistakes. Filler tokens follow a skewed
distribution, giving tokens genuinely different document frequencies.

All outputs are pure functions of the seed, so regeneration is
byte-identical. Emitted files (formats from :mod:`ltrkit.data`):
collection.tsv, queries.tsv, qrels.txt, triples.tsv and candidates.tsv
(the per-query candidate pools, top-1000 style).
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .validation import check_positive_int

QUERY_TOKENS_MIN = 3
QUERY_TOKENS_MAX = 5
KEEP_PROB = 0.8
# fraction of queries that carry a set of near-tie champion distractors,
# each strong along a different profile axis (coverage, brevity, rarity)
AMBIGUOUS_QUERY_RATE = 0.45
# champion profiles: (topic tokens relative to n_topic - 1, filler range)
CHAMPION_PROFILES = (
    (0, (22, 45)),  # full near-coverage, diluted
    (0, (14, 24)),  # full near-coverage, mildly diluted
    (0, (8, 16)),   # full near-coverage at relevant-like length
    (-1, (2, 6)),   # dense and short
    (-2, (3, 8)),   # single strong hit
)
# distractor mix for the remaining pool slots
COVERAGE_DISTRACTOR_RATE = 0.15
DENSE_DISTRACTOR_RATE = 0.15


def generate(
    out_dir: str | Path,
    num_queries: int,
    docs_per_query: int,
    seed: int = 0,
    vocab_size: int = 500,
) -> dict[str, Path]:
    """Write the synthetic benchmark files; returns their paths by name."""
    check_positive_int(num_queries, "num_queries")
    check_positive_int(docs_per_query, "docs_per_query")
    check_positive_int(vocab_size, "vocab_size")
    if docs_per_query < 2:
        raise ValueError("docs_per_query must be at least 2 (one relevant plus negatives)")

    rng = np.random.default_rng(seed)
    vocab = [f"w{i:03d}" for i in range(vocab_size)]
    # skewed filler distribution: low-index tokens are common, high-index rare
    filler_weights = 1.0 / np.arange(1, vocab_size + 1)
    filler_weights /= filler_weights.sum()

    collection_lines: list[str] = []
    query_lines: list[str] = []
    qrel_lines: list[str] = []
    triple_lines: list[str] = []
    candidate_lines: list[str] = []

    doc_counter = 0
    for q_idx in range(num_queries):
        qid = f"q{q_idx:04d}"
        n_topic = int(rng.integers(QUERY_TOKENS_MIN, QUERY_TOKENS_MAX + 1))
        topic = [vocab[i] for i in rng.choice(vocab_size, size=n_topic, replace=False)]
        query_text = " ".join(topic)
        query_lines.append(f"{qid}\t{query_text}")

        def make_doc(overlap_tokens: list[str], n_filler: int) -> tuple[str, str]:
            nonlocal doc_counter
            filler_idx = rng.choice(vocab_size, size=n_filler, replace=True, p=filler_weights)
            tokens = overlap_tokens + [vocab[i] for i in filler_idx]
            order = rng.permutation(len(tokens))
            text = " ".join(tokens[i] for i in order)
            pid = f"d{doc_counter:06d}"
            doc_counter += 1
            collection_lines.append(f"{pid}\t{text}")
            return pid, text

        keep = [tok for tok in topic if rng.random() < KEEP_PROB]
        if len(keep) < 2:
            keep = topic[:2]
        pos_pid, pos_text = make_doc(keep, int(rng.integers(10, 19)))
        qrel_lines.append(f"{qid} 0 {pos_pid} 1")

        negatives = []
        n_negatives = docs_per_query - 1
        if rng.random() < AMBIGUOUS_QUERY_RATE:
            # champions: near-ties with the relevant along different axes,
            # so which one a scorer prefers depends on its learned tradeoffs
            for coverage_delta, (filler_lo, filler_hi) in CHAMPION_PROFILES[
                : min(len(CHAMPION_PROFILES), n_negatives)
            ]:
                n_overlap = min(max(n_topic - 1 + coverage_delta, 1), n_topic)
                n_filler = int(rng.integers(filler_lo, filler_hi + 1))
                chosen = [topic[i] for i in rng.choice(n_topic, size=n_overlap, replace=False)]
                negatives.append(make_doc(chosen, n_filler))

        while len(negatives) < n_negatives:
            kind = rng.random()
            if kind < COVERAGE_DISTRACTOR_RATE:
                # matches almost every topic token but is heavily diluted
                n_overlap = max(n_topic - 1, 1)
                n_filler = int(rng.integers(35, 70))
            elif kind < COVERAGE_DISTRACTOR_RATE + DENSE_DISTRACTOR_RATE:
                # one or two strong matches in a very short passage
                n_overlap = int(rng.integers(1, 3))
                n_filler = int(rng.integers(2, 6))
            else:
                n_overlap = int(rng.integers(0, 2))
                n_filler = int(rng.integers(10, 19))
            n_overlap = min(n_overlap, n_topic)
            chosen = [topic[i] for i in rng.choice(n_topic, size=n_overlap, replace=False)]
            negatives.append(make_doc(chosen, n_filler))

        pool = [(pos_pid, pos_text)] + negatives
        pool_order = rng.permutation(len(pool))
        for i in pool_order:
            pid, text = pool[i]
            candidate_lines.append(f"{qid}\t{pid}\t{query_text}\t{text}")
            if pid != pos_pid:
                triple_lines.append(f"{query_text}\t{pos_text}\t{text}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "collection": out / "collection.tsv",
        "queries": out / "queries.tsv",
        "qrels": out / "qrels.txt",
        "triples": out / "triples.tsv",
        "candidates": out / "candidates.tsv",
    }
    _write_lines(paths["collection"], collection_lines)
    _write_lines(paths["queries"], query_lines)
    _write_lines(paths["qrels"], qrel_lines)
    _write_lines(paths["triples"], triple_lines)
    _write_lines(paths["candidates"], candidate_lines)
    return paths


def _write_lines(path: Path, lines: list[str]) -> None:
    path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
