"""Reading and writing run files.

Two formats are supported and auto-detected on read by field count:

* MS MARCO: ``qid \\t pid \\t rank`` (tab-separated, 3 fields); scores are
  reconstructed as 1/rank so orderings round-trip exactly.
* TREC: ``qid Q0 pid rank score tag`` (whitespace-separated, 6 fields).

Writers emit queries in sorted order, cut each list at ``topk`` and number
ranks contiguously from 1, so identical runs serialize to identical bytes.
"""
from __future__ import annotations

from pathlib import Path

from .core import DataFormatError, RankedRun, check_identifier
from .validation import check_positive_int

RUN_FORMATS = ("msmarco", "trec")


def write_run(
    run: RankedRun,
    path: str | Path,
    fmt: str = "msmarco",
    topk: int = 1000,
    tag: str = "ltrkit",
) -> None:
    """Serialize a run, cutting each query's list at ``topk``."""
    if fmt not in RUN_FORMATS:
        raise ValueError(f"unknown run format {fmt!r}; expected one of {RUN_FORMATS}")
    check_positive_int(topk, "topk")
    lines = []
    for qid in run.queries():
        for rank, (did, score) in enumerate(run.entries(qid)[:topk], start=1):
            if fmt == "msmarco":
                lines.append(f"{qid}\t{did}\t{rank}")
            else:
                lines.append(f"{qid} Q0 {did} {rank} {score!r} {tag}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_run(path: str | Path) -> RankedRun:
    """Parse a run file, auto-detecting the format by field count."""
    per_query: dict[str, list[tuple[str, float]]] = {}
    ranks: dict[str, list[int]] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            tab_fields = line.split("\t")
            if len(tab_fields) == 3:
                qid, did, rank_text = tab_fields
                score = None
            else:
                fields = line.split()
                if len(fields) != 6:
                    raise DataFormatError(
                        path, line_no, f"expected 3 tab-separated or 6 whitespace-separated fields"
                    )
                qid, _, did, rank_text, score_text, _ = fields
                try:
                    score = float(score_text)
                except ValueError:
                    raise DataFormatError(path, line_no, f"bad score {score_text!r}") from None
            try:
                rank = int(rank_text)
            except ValueError:
                raise DataFormatError(path, line_no, f"bad rank {rank_text!r}") from None
            if rank < 1:
                raise DataFormatError(path, line_no, f"rank must be >= 1, got {rank}")
            try:
                check_identifier(qid, "query id")
                check_identifier(did, "doc id")
            except ValueError as exc:
                raise DataFormatError(path, line_no, str(exc)) from None
            per_query.setdefault(qid, []).append((did, 1.0 / rank if score is None else score))
            ranks.setdefault(qid, []).append(rank)
    for qid, rank_list in ranks.items():
        if sorted(rank_list) != list(range(1, len(rank_list) + 1)):
            raise DataFormatError(path, 0, f"ranks for query {qid!r} are not contiguous from 1")
    try:
        return RankedRun(per_query)
    except ValueError as exc:
        raise DataFormatError(path, 0, str(exc)) from None
