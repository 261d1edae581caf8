"""Tests for identifiers, judgments, query groups and ranked runs."""

import numpy as np
import pytest

from ltrkit.core import Judgments, QueryGroup, RankedRun, check_identifier, rank_positions


class TestRankPositions:
    def test_orders_by_score_descending(self):
        assert rank_positions([("A", 0.9), ("B", 0.5)]) == {"A": 1, "B": 2}

    def test_tie_broken_by_ascending_doc_id(self):
        assert rank_positions([("A", 0.5), ("B", 0.5)]) == {"A": 1, "B": 2}

    def test_score_desc_then_id_asc(self):
        assert rank_positions([("C", 1.0), ("A", 1.0), ("B", 2.0)]) == {"B": 1, "A": 2, "C": 3}

    def test_duplicate_doc_id_rejected_with_offending_id(self):
        with pytest.raises(ValueError, match="'A'"):
            rank_positions([("A", 1.0), ("A", 0.5)])

    def test_bijection_onto_1_to_n(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n = int(rng.integers(1, 40))
            entries = [(f"d{i}", float(rng.normal())) for i in range(n)]
            ranks = rank_positions(entries)
            assert sorted(ranks.values()) == list(range(1, n + 1))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            # coarse scores force plenty of ties
            entries = [(f"d{i:02d}", float(rng.integers(0, 4))) for i in range(n)]
            baseline = rank_positions(entries)
            shuffled = [entries[i] for i in rng.permutation(n)]
            assert rank_positions(shuffled) == baseline


class TestIdentifiers:
    def test_accepts_plain_strings(self):
        assert check_identifier("doc-1.a") == "doc-1.a"

    @pytest.mark.parametrize("bad", ["", "a\tb", "a\nb", "a\rb", None, 12])
    def test_rejects_empty_or_control_characters(self, bad):
        with pytest.raises(ValueError):
            check_identifier(bad)


class TestJudgments:
    def test_absent_pairs_are_grade_zero(self):
        judgments = Judgments({("q1", "d1"): 1})
        assert judgments.grade("q1", "d1") == 1
        assert judgments.grade("q1", "d2") == 0
        assert judgments.grade("q2", "d1") == 0

    def test_relevant_docs_filters_zero_grades(self):
        judgments = Judgments({("q1", "d1"): 1, ("q1", "d2"): 0, ("q1", "d3"): 2})
        assert judgments.relevant_docs("q1") == {"d1", "d3"}

    def test_rejects_negative_grades(self):
        with pytest.raises(ValueError):
            Judgments({("q1", "d1"): -1})

    def test_construction_from_tuples(self):
        judgments = Judgments([("q1", "d1", 1), ("q2", "d9", 0)])
        assert judgments.queries() == ["q1", "q2"]


class TestQueryGroup:
    def test_basic_construction(self):
        group = QueryGroup("q1", ("a", "b"), np.zeros((2, 3)), (1, 0))
        assert group.num_features == 3
        assert len(group) == 2

    def test_rejects_duplicate_doc_ids(self):
        with pytest.raises(ValueError, match="duplicate"):
            QueryGroup("q1", ("a", "a"), np.zeros((2, 3)), (1, 0))

    def test_rejects_misaligned_lengths(self):
        with pytest.raises(ValueError):
            QueryGroup("q1", ("a", "b"), np.zeros((3, 2)), (1, 0))

    def test_rejects_flat_features(self):
        with pytest.raises(ValueError):
            QueryGroup("q1", ("a",), np.zeros(3), (1,))


class TestRankedRun:
    def test_stores_canonical_order(self):
        run = RankedRun({"q1": [("b", 0.2), ("a", 0.9), ("c", 0.9)]})
        assert run.doc_ids("q1") == ["a", "c", "b"]

    def test_queries_iterate_sorted(self):
        run = RankedRun({"q2": [("a", 1.0)], "q1": [("a", 1.0)]})
        assert run.queries() == ["q1", "q2"]

    def test_duplicate_docs_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            RankedRun({"q1": [("a", 1.0), ("a", 0.5)]})

    def test_equality_ignores_insertion_order(self):
        run1 = RankedRun({"q1": [("a", 1.0)], "q2": [("b", 2.0)]})
        run2 = RankedRun({"q2": [("b", 2.0)], "q1": [("a", 1.0)]})
        assert run1 == run2
