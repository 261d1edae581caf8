"""Tests for reciprocal-rank ensembling and two-list fusion."""

import numpy as np
import pytest

from ltrkit.core import RankedRun
from ltrkit.ensemble import RunSet, ensemble_reciprocal_rank, fuse_two_lists


def oracle_ensemble(runs: list[RankedRun]) -> dict[str, dict[str, float]]:
    """Direct evaluation of (1/n) * sum over runs of 1/rank, per (query, doc)."""
    n = len(runs)
    queries = set()
    for run in runs:
        queries.update(run.queries())
    out = {}
    for qid in queries:
        docs = set()
        for run in runs:
            if qid in run:
                docs.update(run.doc_ids(qid))
        scores = {}
        for did in docs:
            total = 0.0
            for run in runs:
                if qid in run:
                    for position, (candidate, _) in enumerate(run.entries(qid), start=1):
                        if candidate == did:
                            total += 1.0 / position
                            break
            scores[did] = total / n
        out[qid] = scores
    return out


def random_run(rng, queries, doc_pool, min_docs=1):
    per_query = {}
    for qid in queries:
        if rng.random() < 0.15:
            continue  # this run skips the query entirely
        size = int(rng.integers(min_docs, len(doc_pool) + 1))
        chosen = rng.permutation(len(doc_pool))[:size]
        per_query[qid] = [(doc_pool[i], float(rng.normal())) for i in chosen]
    return RankedRun(per_query)


class TestEnsemble:
    def test_single_run_preserves_ordering(self):
        rng = np.random.default_rng(0)
        run = random_run(rng, [f"q{i}" for i in range(5)], [f"d{i}" for i in range(20)])
        result = ensemble_reciprocal_rank(RunSet((("only", run),)))
        for qid in run.queries():
            assert result.doc_ids(qid) == run.doc_ids(qid)

    def test_two_run_average(self):
        run_a = RankedRun({"q": [("x", 9.0), ("y", 5.0)]})
        run_b = RankedRun({"q": [("y", 9.0), ("x", 5.0)]})
        result = ensemble_reciprocal_rank(RunSet((("a", run_a), ("b", run_b))))
        scores = dict(result.entries("q"))
        assert scores["x"] == pytest.approx((1.0 + 0.5) / 2)
        assert scores["y"] == pytest.approx((0.5 + 1.0) / 2)

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(30):
            n_runs = int(rng.integers(1, 6))
            queries = [f"q{i}" for i in range(int(rng.integers(1, 6)))]
            doc_pool = [f"d{i:02d}" for i in range(int(rng.integers(2, 15)))]
            runs = [random_run(rng, queries, doc_pool) for _ in range(n_runs)]
            entries = tuple((f"run{i}", run) for i, run in enumerate(runs))
            result = ensemble_reciprocal_rank(RunSet(entries))
            expected = oracle_ensemble(runs)
            assert set(result.queries()) == set(expected)
            for qid, scores in expected.items():
                got = dict(result.entries(qid))
                assert got.keys() == scores.keys()
                for did, want in scores.items():
                    assert abs(got[did] - want) <= 1e-12

    def test_permutation_invariant_in_run_order(self):
        rng = np.random.default_rng(7)
        queries = ["q1", "q2"]
        pool = [f"d{i}" for i in range(10)]
        runs = [random_run(rng, queries, pool) for _ in range(4)]
        forward = ensemble_reciprocal_rank(RunSet(tuple((f"r{i}", r) for i, r in enumerate(runs))))
        backward = ensemble_reciprocal_rank(
            RunSet(tuple((f"r{i}", r) for i, r in enumerate(reversed(runs))))
        )
        assert forward == backward

    def test_identical_runs_reproduce_input_ordering(self):
        rng = np.random.default_rng(11)
        run = random_run(rng, ["q1", "q2", "q3"], [f"d{i}" for i in range(12)])
        result = ensemble_reciprocal_rank(RunSet(tuple((f"copy{i}", run) for i in range(4))))
        for qid in run.queries():
            assert result.doc_ids(qid) == run.doc_ids(qid)

    def test_scores_in_unit_interval(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            runs = [random_run(rng, ["q"], [f"d{i}" for i in range(8)], min_docs=1) for _ in range(3)]
            result = ensemble_reciprocal_rank(RunSet(tuple((f"r{i}", r) for i, r in enumerate(runs))))
            for qid in result.queries():
                for _, score in result.entries(qid):
                    assert 0.0 < score <= 1.0

    def test_idempotent_at_ordering_level(self):
        rng = np.random.default_rng(17)
        runs = [random_run(rng, ["q1", "q2"], [f"d{i}" for i in range(10)]) for _ in range(3)]
        once = ensemble_reciprocal_rank(RunSet(tuple((f"r{i}", r) for i, r in enumerate(runs))))
        twice = ensemble_reciprocal_rank(RunSet((("a", once), ("b", once))))
        for qid in once.queries():
            assert twice.doc_ids(qid) == once.doc_ids(qid)

    def test_empty_runset_rejected(self):
        with pytest.raises(ValueError, match="at least one"):
            RunSet(())

    def test_duplicate_run_names_rejected(self):
        run = RankedRun({"q": [("d", 1.0)]})
        with pytest.raises(ValueError, match="unique"):
            RunSet((("same", run), ("same", run)))

    def test_doc_missing_from_one_run_contributes_zero(self):
        run_a = RankedRun({"q": [("x", 2.0), ("y", 1.0)]})
        run_b = RankedRun({"q": [("y", 1.0)]})
        result = ensemble_reciprocal_rank(RunSet((("a", run_a), ("b", run_b))))
        scores = dict(result.entries("q"))
        assert scores["x"] == pytest.approx(0.5)  # (1/1 + 0) / 2
        assert scores["y"] == pytest.approx(0.75)  # (1/2 + 1/1) / 2


class TestFuseTwoLists:
    def test_rank_one_in_both_scores_one(self):
        run_a = RankedRun({"q": [("x", 5.0), ("y", 1.0)]})
        run_b = RankedRun({"q": [("x", 7.0), ("z", 2.0)]})
        fused = fuse_two_lists(run_a, run_b)
        assert dict(fused.entries("q"))["x"] == pytest.approx(1.0)

    def test_doc_in_one_list_keeps_its_reciprocal_rank(self):
        run_a = RankedRun({"q": [("x", 5.0), ("y", 1.0)]})
        run_b = RankedRun({"q": [("z", 2.0)]})
        fused = fuse_two_lists(run_a, run_b)
        assert dict(fused.entries("q"))["y"] == pytest.approx(0.5)

    def test_both_lists_average(self):
        run_a = RankedRun({"q": [("x", 9.0), ("a", 8.0), ("b", 7.0), ("c", 6.0)]})
        run_b = RankedRun({"q": [("a", 9.0), ("b", 8.0), ("c", 7.0), ("x", 6.0)]})
        fused = fuse_two_lists(run_a, run_b)
        assert dict(fused.entries("q"))["x"] == pytest.approx((1.0 + 0.25) / 2)

    def test_output_doc_set_is_union(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            pool = [f"d{i}" for i in range(12)]
            run_a = random_run(rng, ["q1", "q2"], pool)
            run_b = random_run(rng, ["q1", "q2"], pool)
            fused = fuse_two_lists(run_a, run_b)
            for qid in set(run_a.queries()) | set(run_b.queries()):
                union = set()
                if qid in run_a:
                    union.update(run_a.doc_ids(qid))
                if qid in run_b:
                    union.update(run_b.doc_ids(qid))
                assert set(fused.doc_ids(qid)) == union

    def test_identical_candidate_sets(self):
        run = RankedRun({"q": [("a", 3.0), ("b", 2.0), ("c", 1.0)]})
        fused = fuse_two_lists(run, run)
        assert fused.doc_ids("q") == ["a", "b", "c"]
        assert dict(fused.entries("q"))["b"] == pytest.approx(0.5)

    def test_disjoint_candidate_sets(self):
        run_a = RankedRun({"q": [("a", 2.0), ("b", 1.0)]})
        run_b = RankedRun({"q": [("c", 9.0), ("d", 8.0)]})
        fused = fuse_two_lists(run_a, run_b)
        scores = dict(fused.entries("q"))
        assert scores == {"a": 1.0, "c": 1.0, "b": 0.5, "d": 0.5}

    def test_empty_second_run_degenerates_to_rescoring_first(self):
        run_a = RankedRun({"q": [("a", 3.2), ("b", 0.1), ("c", 1.7)]})
        fused = fuse_two_lists(run_a, RankedRun({}))
        assert fused.doc_ids("q") == run_a.doc_ids("q")
        assert dict(fused.entries("q")) == {"a": 1.0, "c": 0.5, "b": pytest.approx(1 / 3)}

    def test_fusion_scores_in_unit_interval(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            pool = [f"d{i}" for i in range(9)]
            fused = fuse_two_lists(random_run(rng, ["q"], pool), random_run(rng, ["q"], pool))
            for qid in fused.queries():
                for _, score in fused.entries(qid):
                    assert 0.0 < score <= 1.0
