"""Closure-based temporal-awareness precision/recall/F1.

A predicted relation counts as correct when it is entailed by the closure of
the reference annotation, and symmetrically for recall.  Verification goes
through the interval-algebra closure; plain relation counts are used (no
reduced-graph weighting).  Documents whose graph is inconsistent are scored
against the raw, unclosed graph on that side and flagged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Set, TextIO, Tuple

from .relations import (
    EventGraph,
    INCONSISTENT,
    RelSet,
    RelType,
    closure,
    collapse,
)
from .timeml import ClassifierRun, TLink


def f1_score(precision: float, recall: float) -> float:
    if precision + recall <= 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def build_graph(links: Iterable[TLink]) -> EventGraph:
    """Event graph over raw entity ids; duplicate pairs keep the last label."""
    g = EventGraph()
    for link in links:
        if link.rel is RelType.NONE:
            continue
        g.set_relation(link.source.id, link.target.id, link.rel)
    return g


@dataclass
class AwarenessCounts:
    verified_sys: int = 0
    total_sys: int = 0
    verified_ref: int = 0
    total_ref: int = 0
    inconsistent_ref: bool = False
    inconsistent_sys: bool = False

    @property
    def precision(self) -> float:
        return self.verified_sys / self.total_sys if self.total_sys else 0.0

    @property
    def recall(self) -> float:
        return self.verified_ref / self.total_ref if self.total_ref else 0.0

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


def _verifiable(closed: EventGraph, raw: Optional[EventGraph],
                stored: EventGraph, p: str, q: str, rel: RelType,
                collapse_identity: bool) -> bool:
    """A relation is verifiable when the closed graph pins the pair to it.

    With collapse_identity off, IDENTITY only matches a stored IDENTITY edge
    (the closure cannot keep the synonyms apart).
    """
    if not collapse_identity and rel is RelType.IDENTITY:
        return stored.get(p, q) is RelType.IDENTITY
    target = collapse(rel)
    if raw is not None:  # inconsistent side: fall back to stored labels
        stored = raw.get(p, q)
        return isinstance(stored, RelType) and collapse(stored) is target
    label_set = closed.get(p, q) if p in closed.nodes and q in closed.nodes else None
    if not isinstance(label_set, RelSet) or label_set.is_empty:
        return False
    return all(r is target for r in label_set)


def temporal_awareness(reference: EventGraph, system: EventGraph, *,
                       collapse_identity: bool = True) -> AwarenessCounts:
    """Precision/recall counts of a system graph against a reference graph."""
    counts = AwarenessCounts()

    closed_ref = closure(reference)
    raw_ref = None
    if closed_ref is INCONSISTENT:
        counts.inconsistent_ref = True
        closed_ref, raw_ref = reference, reference
    closed_sys = closure(system)
    raw_sys = None
    if closed_sys is INCONSISTENT:
        counts.inconsistent_sys = True
        closed_sys, raw_sys = system, system

    for p, q, rel in system.edges():
        counts.total_sys += 1
        if _verifiable(closed_ref, raw_ref, reference, p, q, rel,
                       collapse_identity):
            counts.verified_sys += 1
    for p, q, rel in reference.edges():
        counts.total_ref += 1
        if _verifiable(closed_sys, raw_sys, system, p, q, rel,
                       collapse_identity):
            counts.verified_ref += 1
    return counts


@dataclass
class ScoreReport:
    per_document: Dict[str, AwarenessCounts] = field(default_factory=dict)
    average: str = "micro"

    def _totals(self) -> AwarenessCounts:
        total = AwarenessCounts()
        for c in self.per_document.values():
            total.verified_sys += c.verified_sys
            total.total_sys += c.total_sys
            total.verified_ref += c.verified_ref
            total.total_ref += c.total_ref
        return total

    @property
    def precision(self) -> float:
        if self.average == "macro":
            docs = self.per_document
            return sum(c.precision for c in docs.values()) / len(docs) if docs else 0.0
        return self._totals().precision

    @property
    def recall(self) -> float:
        if self.average == "macro":
            docs = self.per_document
            return sum(c.recall for c in docs.values()) / len(docs) if docs else 0.0
        return self._totals().recall

    @property
    def f1(self) -> float:
        return f1_score(self.precision, self.recall)


def score_run(reference_run: ClassifierRun, system_run: ClassifierRun,
              doc_filter: Optional[Set[str]] = None, *,
              collapse_identity: bool = True, average: str = "micro") -> ScoreReport:
    """Per-document temporal awareness plus a corpus aggregate.

    Documents in the filter but missing from the system run score against an
    empty system graph.
    """
    if average not in ("micro", "macro"):
        raise ValueError(f"unknown averaging mode {average!r}")
    docs = sorted(doc_filter) if doc_filter is not None else sorted(reference_run.documents)
    missing = set(docs) - set(reference_run.documents)
    if missing:
        raise ValueError(f"documents not in reference run: {sorted(missing)}")
    report = ScoreReport(average=average)
    for doc in docs:
        ref_graph = build_graph(reference_run.documents[doc])
        sys_graph = build_graph(system_run.documents.get(doc, []))
        report.per_document[doc] = temporal_awareness(
            ref_graph, sys_graph, collapse_identity=collapse_identity
        )
    return report


def write_csv(report: ScoreReport, sink: TextIO) -> None:
    sink.write("doc_id,precision,recall,f1,verified_sys,total_sys,"
               "verified_ref,total_ref\n")
    for doc in sorted(report.per_document):
        c = report.per_document[doc]
        sink.write(f"{doc},{c.precision:.4f},{c.recall:.4f},{c.f1:.4f},"
                   f"{c.verified_sys},{c.total_sys},{c.verified_ref},{c.total_ref}\n")
    sink.write(f"ALL,{report.precision:.4f},{report.recall:.4f},"
               f"{report.f1:.4f},,,,\n")


def format_score_table(rows: List[Tuple[str, float, float, float]]) -> str:
    """Aligned text table: label, F1, precision, recall per row."""
    width = max([len(label) for label, *_ in rows] + [8])
    lines = [f"{'IDs':<{width}}  {'F1':>6}  {'Prec':>6}  {'Rec':>6}"]
    for label, f1, prec, rec in rows:
        lines.append(f"{label:<{width}}  {f1:6.4f}  {prec:6.4f}  {rec:6.4f}")
    return "\n".join(lines) + "\n"
