"""Tests for run-file serialization in MS MARCO and TREC formats."""

import numpy as np
import pytest

from ltrkit.core import DataFormatError, RankedRun
from ltrkit.runio import read_run, write_run


def sample_run(seed=0, n_queries=4, n_docs=15):
    rng = np.random.default_rng(seed)
    per_query = {}
    for i in range(n_queries):
        per_query[f"q{i}"] = [(f"d{j:03d}", float(rng.normal())) for j in range(n_docs)]
    return RankedRun(per_query)


class TestWriteRead:
    def test_msmarco_roundtrip_preserves_ordering(self, tmp_path):
        run = sample_run()
        path = tmp_path / "run.tsv"
        write_run(run, path, fmt="msmarco")
        loaded = read_run(path)
        for qid in run.queries():
            assert loaded.doc_ids(qid) == run.doc_ids(qid)

    def test_trec_roundtrip_preserves_ordering_and_scores(self, tmp_path):
        run = sample_run(seed=3)
        path = tmp_path / "run.trec"
        write_run(run, path, fmt="trec", tag="mytag")
        loaded = read_run(path)
        assert loaded == run

    def test_msmarco_line_shape(self, tmp_path):
        run = RankedRun({"q1": [("a", 5.0), ("b", 1.0)]})
        path = tmp_path / "run.tsv"
        write_run(run, path, fmt="msmarco")
        assert path.read_text(encoding="utf-8") == "q1\ta\t1\nq1\tb\t2\n"

    def test_trec_line_shape(self, tmp_path):
        run = RankedRun({"q1": [("a", 0.5)]})
        path = tmp_path / "run.trec"
        write_run(run, path, fmt="trec", tag="sys1")
        assert path.read_text(encoding="utf-8") == "q1 Q0 a 1 0.5 sys1\n"

    def test_topk_cuts_lists_with_contiguous_ranks(self, tmp_path):
        run = sample_run(n_docs=30)
        path = tmp_path / "run.tsv"
        write_run(run, path, topk=10)
        loaded = read_run(path)
        for qid in loaded.queries():
            assert len(loaded.doc_ids(qid)) == 10

    def test_tied_scores_roundtrip_identically(self, tmp_path):
        run = RankedRun({"q": [("b", 1.0), ("a", 1.0), ("c", 1.0)]})
        path = tmp_path / "run.tsv"
        write_run(run, path, fmt="msmarco")
        assert read_run(path).doc_ids("q") == ["a", "b", "c"]

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="format"):
            write_run(sample_run(), tmp_path / "x", fmt="csv")

    def test_empty_run_roundtrip(self, tmp_path):
        path = tmp_path / "empty.tsv"
        write_run(RankedRun({}), path)
        assert len(read_run(path)) == 0


class TestReadValidation:
    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("q1 d1\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match=":1"):
            read_run(path)

    def test_bad_rank_rejected(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("q1\td1\tfirst\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="rank"):
            read_run(path)

    def test_non_contiguous_ranks_rejected(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("q1\td1\t1\nq1\td2\t3\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="contiguous"):
            read_run(path)

    def test_duplicate_doc_rejected(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("q1\td1\t1\nq1\td1\t2\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="duplicate"):
            read_run(path)

    def test_bad_trec_score_rejected(self, tmp_path):
        path = tmp_path / "run.trec"
        path.write_text("q1 Q0 d1 1 notascore tag\n", encoding="utf-8")
        with pytest.raises(DataFormatError, match="score"):
            read_run(path)
