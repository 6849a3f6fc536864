import io
import random

import pytest

from tlinkrec.relations import EventGraph, RelType
from tlinkrec.scoring import (
    ScoreReport,
    build_graph,
    f1_score,
    format_score_table,
    score_run,
    temporal_awareness,
    write_csv,
)
from tlinkrec.timeml import ClassifierRun, EntityKind, EntityRef, TLink

from test_relations import random_model_graph


def ev(i, doc="d1"):
    return EntityRef(EntityKind.EVENT_INSTANCE, f"ei{i}", doc)


def graph_of(*edges):
    g = EventGraph()
    for p, q, rel in edges:
        g.set_relation(p, q, rel)
    return g


class TestF1:
    def test_harmonic_mean(self):
        assert f1_score(0.5, 0.5) == 0.5
        assert f1_score(1.0, 0.5) == pytest.approx(2 / 3)

    def test_zero_guard(self):
        assert f1_score(0.0, 0.0) == 0.0


class TestBuildGraph:
    def test_basic(self):
        g = build_graph([TLink(ev(1), ev(2), RelType.BEFORE)])
        assert g.get("ei1", "ei2") is RelType.BEFORE

    def test_none_dropped(self):
        g = build_graph([TLink(ev(1), ev(2), RelType.NONE)])
        assert len(g) == 0

    def test_duplicate_last_wins(self):
        g = build_graph([TLink(ev(1), ev(2), RelType.BEFORE),
                         TLink(ev(2), ev(1), RelType.BEFORE)])
        assert g.get("ei1", "ei2") is RelType.AFTER


class TestTemporalAwareness:
    def test_self_comparison_is_perfect(self):
        g = graph_of(("a", "b", RelType.BEFORE), ("b", "c", RelType.INCLUDES))
        counts = temporal_awareness(g, g)
        assert (counts.precision, counts.recall, counts.f1) == (1.0, 1.0, 1.0)

    def test_inferred_relation_verifies(self):
        # System asserts only a BEFORE c; the reference closure entails it,
        # so precision is 1, but neither reference edge is entailed by the
        # single system edge, so recall is 0.
        ref = graph_of(("a", "b", RelType.BEFORE), ("b", "c", RelType.BEFORE))
        sys = graph_of(("a", "c", RelType.BEFORE))
        counts = temporal_awareness(ref, sys)
        assert counts.verified_sys == 1 and counts.total_sys == 1
        assert counts.verified_ref == 0 and counts.total_ref == 2
        assert counts.precision == 1.0 and counts.recall == 0.0

    def test_orientation_invariance(self):
        ref = graph_of(("a", "b", RelType.BEFORE))
        flipped = graph_of(("b", "a", RelType.AFTER))
        counts = temporal_awareness(ref, flipped)
        assert counts.precision == 1.0 and counts.recall == 1.0

    def test_identity_collapses_by_default(self):
        ref = graph_of(("a", "b", RelType.SIMULTANEOUS))
        sys = graph_of(("a", "b", RelType.IDENTITY))
        counts = temporal_awareness(ref, sys)
        assert counts.precision == 1.0 and counts.recall == 1.0

    def test_identity_strict_switch(self):
        ref = graph_of(("a", "b", RelType.SIMULTANEOUS))
        sys = graph_of(("a", "b", RelType.IDENTITY))
        counts = temporal_awareness(ref, sys, collapse_identity=False)
        assert counts.verified_sys == 0  # IDENTITY not stored in reference
        assert counts.verified_ref == 1  # SIMULTANEOUS still collapses

    def test_identity_strict_exact_match(self):
        g = graph_of(("a", "b", RelType.IDENTITY))
        counts = temporal_awareness(g, g, collapse_identity=False)
        assert counts.precision == 1.0 and counts.recall == 1.0

    def test_unrelated_pair_not_verified(self):
        ref = graph_of(("a", "b", RelType.BEFORE))
        sys = graph_of(("a", "c", RelType.BEFORE))
        counts = temporal_awareness(ref, sys)
        assert counts.verified_sys == 0

    def test_inconsistent_reference_falls_back_to_raw(self):
        ref = graph_of(("a", "b", RelType.BEFORE), ("b", "c", RelType.BEFORE),
                       ("c", "a", RelType.BEFORE))
        sys = graph_of(("a", "b", RelType.BEFORE))
        counts = temporal_awareness(ref, sys)
        assert counts.inconsistent_ref and not counts.inconsistent_sys
        assert counts.verified_sys == 1  # stored label matches
        assert counts.verified_ref == 1  # only a-b matches in system

    def test_inconsistent_system_flagged(self):
        sys = graph_of(("a", "b", RelType.BEFORE), ("b", "c", RelType.BEFORE),
                       ("c", "a", RelType.BEFORE))
        counts = temporal_awareness(graph_of(("a", "b", RelType.BEFORE)), sys)
        assert counts.inconsistent_sys

    def test_empty_system(self):
        ref = graph_of(("a", "b", RelType.BEFORE))
        counts = temporal_awareness(ref, EventGraph())
        assert counts.precision == 0.0 and counts.recall == 0.0
        assert counts.f1 == 0.0

    def test_random_self_scores_are_perfect(self):
        rng = random.Random(11)
        for _ in range(20):
            g = random_model_graph(rng, rng.randint(3, 6), density=0.7)
            counts = temporal_awareness(g, g)
            assert counts.precision == 1.0 and counts.recall == 1.0


def run_of(name, docs):
    return ClassifierRun(name, 1.0, docs)


class TestScoreRun:
    def two_doc_runs(self):
        # d1: system gets 2 of 3 edges; d2: 2 of 3 -> micro P = 4/6.
        ref = {
            "d1": [TLink(ev(1), ev(2), RelType.BEFORE),
                   TLink(ev(2), ev(3), RelType.BEFORE),
                   TLink(ev(3), ev(4), RelType.INCLUDES)],
            "d2": [TLink(ev(1, "d2"), ev(2, "d2"), RelType.BEFORE),
                   TLink(ev(2, "d2"), ev(3, "d2"), RelType.AFTER),
                   TLink(ev(1, "d2"), ev(4, "d2"), RelType.SIMULTANEOUS)],
        }
        sys = {
            "d1": [TLink(ev(1), ev(2), RelType.BEFORE),
                   TLink(ev(2), ev(3), RelType.BEFORE),
                   TLink(ev(3), ev(4), RelType.AFTER)],
            "d2": [TLink(ev(1, "d2"), ev(2, "d2"), RelType.BEFORE),
                   TLink(ev(2, "d2"), ev(3, "d2"), RelType.AFTER),
                   TLink(ev(1, "d2"), ev(4, "d2"), RelType.BEFORE)],
        }
        return run_of("ref", ref), run_of("sys", sys)

    def test_micro_average(self):
        ref, sys = self.two_doc_runs()
        report = score_run(ref, sys)
        assert report.precision == pytest.approx(4 / 6)
        assert report.recall == pytest.approx(4 / 6)

    def test_macro_average(self):
        ref, sys = self.two_doc_runs()
        report = score_run(ref, sys, average="macro")
        assert report.precision == pytest.approx((2 / 3 + 2 / 3) / 2)

    def test_doc_filter(self):
        ref, sys = self.two_doc_runs()
        report = score_run(ref, sys, doc_filter={"d1"})
        assert list(report.per_document) == ["d1"]

    def test_missing_system_doc_scores_zero(self):
        ref, _ = self.two_doc_runs()
        empty = run_of("sys", {})
        report = score_run(ref, empty)
        assert report.precision == 0.0 and report.recall == 0.0

    def test_unknown_filter_doc_rejected(self):
        ref, sys = self.two_doc_runs()
        with pytest.raises(ValueError, match="not in reference"):
            score_run(ref, sys, doc_filter={"nope"})

    def test_bad_average_rejected(self):
        ref, sys = self.two_doc_runs()
        with pytest.raises(ValueError, match="averaging"):
            score_run(ref, sys, average="median")

    def test_empty_report_guards(self):
        report = ScoreReport()
        assert report.precision == 0.0 and report.f1 == 0.0
        assert ScoreReport(average="macro").precision == 0.0


class TestOutput:
    def test_write_csv(self):
        ref, sys = TestScoreRun().two_doc_runs()
        report = score_run(ref, sys)
        sink = io.StringIO()
        write_csv(report, sink)
        lines = sink.getvalue().splitlines()
        assert lines[0].startswith("doc_id,precision,recall,f1")
        assert lines[1].startswith("d1,0.6667,0.6667,")
        assert lines[-1].startswith("ALL,0.6667,")
        assert len(lines) == 4

    def test_format_score_table(self):
        text = format_score_table([("C2,C4", 0.39, 0.32, 0.50)])
        lines = text.splitlines()
        assert lines[0].split() == ["IDs", "F1", "Prec", "Rec"]
        assert "0.3900" in lines[1] and "C2,C4" in lines[1]
