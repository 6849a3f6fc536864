"""Experiment orchestration: ensemble reconciliation and the two procedures.

Procedure one weighs ensemble members by their F1 on the full reference set
and scores the reconciled output on the same set.  Procedure two splits the
corpus in half, derives weights from the first half, and reconciles/scores on
the second half only.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import ConfigurationError
from .model import VoteTable, build_ip, collect_arcs, enumerate_triangles
from .relations import RelType
from .scoring import ScoreReport, format_score_table, score_run
from .solver import Solution, solve
from .timeml import ClassifierRun, Corpus, EntityRef, TLink, write_timeml

log = logging.getLogger(__name__)


class WeightsSource(enum.Enum):
    FULL_REFERENCE = "full"
    S1 = "s1"
    FILE = "file"


@dataclass(frozen=True)
class EnsembleSpec:
    members: Tuple[str, ...]
    weights_source: WeightsSource = WeightsSource.FULL_REFERENCE
    label: str = ""

    def display(self) -> str:
        return self.label or ", ".join(self.members)


@dataclass
class ExperimentConfig:
    corpus_root: Path
    split: Optional[Tuple[List[str], List[str]]] = None
    time_limit: float = 300.0
    none_breaks_triangles: bool = False
    collapse_identity: bool = True
    average: str = "micro"
    output_dir: Optional[Path] = None
    weights_path: Optional[Path] = None


def default_split(doc_ids: Sequence[str]) -> Tuple[List[str], List[str]]:
    """Lexicographic doc-id order, first half into S1."""
    docs = sorted(doc_ids)
    half = len(docs) // 2
    return docs[:half], docs[half:]


def check_members(corpus: Corpus, members: Iterable[str]) -> None:
    unknown = sorted(set(members) - set(corpus.runs))
    if unknown:
        raise ConfigurationError(f"unknown classifier name(s): {', '.join(unknown)}")


@dataclass
class ReconcileResult:
    run: ClassifierRun
    votes: Dict[str, VoteTable] = field(default_factory=dict)
    solutions: Dict[str, Solution] = field(default_factory=dict)


def reconcile(corpus: Corpus, members: Sequence[str],
              weights: Optional[Dict[str, float]] = None, *,
              doc_filter: Optional[Set[str]] = None,
              time_limit: float = 300.0,
              none_breaks_triangles: bool = False,
              label: str = "") -> ReconcileResult:
    """Solve the per-document assignment program over the members' votes."""
    check_members(corpus, members)
    member_runs = []
    for name in members:
        run = corpus.runs[name]
        if weights is not None:
            if name not in weights:
                raise ConfigurationError(f"no weight for ensemble member {name!r}")
            run = replace(run, f1_weight=weights[name])
        member_runs.append(run)

    docs = sorted({d for run in member_runs for d in run.documents})
    if doc_filter is not None:
        docs = [d for d in docs if d in doc_filter]

    result = ReconcileResult(ClassifierRun(label or "+".join(members), 1.0))
    for doc in docs:
        votes = collect_arcs(member_runs, doc)
        program = build_ip(votes, enumerate_triangles(votes.arcs),
                           none_breaks_triangles=none_breaks_triangles)
        solution = solve(program, time_limit=time_limit)
        links = [
            TLink(arc.lo, arc.hi, solution.assignment[i])
            for i, arc in enumerate(votes.arcs)
            if solution.assignment[i] is not RelType.NONE
        ]
        result.run.documents[doc] = links
        result.votes[doc] = votes
        result.solutions[doc] = solution
    return result


def compute_f1_weights(corpus: Corpus, names: Iterable[str],
                       doc_filter: Optional[Set[str]] = None, *,
                       collapse_identity: bool = True,
                       average: str = "micro") -> Dict[str, float]:
    """Temporal-awareness F1 of each classifier against the reference."""
    check_members(corpus, names)
    return {
        name: score_run(corpus.reference, corpus.runs[name], doc_filter,
                        collapse_identity=collapse_identity, average=average).f1
        for name in names
    }


def resolve_weights(corpus: Corpus, spec: EnsembleSpec,
                    config: ExperimentConfig) -> Optional[Dict[str, float]]:
    if spec.weights_source is WeightsSource.FILE:
        return None  # keep the f1_weight loaded from the weights file
    if spec.weights_source is WeightsSource.FULL_REFERENCE:
        doc_filter = None
    else:
        if config.split is None:
            raise ConfigurationError("S1 weights requested but no split configured")
        doc_filter = set(config.split[0])
    return compute_f1_weights(corpus, spec.members, doc_filter,
                              collapse_identity=config.collapse_identity,
                              average=config.average)


@dataclass
class ExperimentRow:
    spec: EnsembleSpec
    report: ScoreReport
    result: ReconcileResult


def _run_ensembles(corpus: Corpus, config: ExperimentConfig,
                   ensembles: Sequence[EnsembleSpec],
                   score_docs: Optional[Set[str]]) -> List[ExperimentRow]:
    rows = []
    for spec in ensembles:
        weights = resolve_weights(corpus, spec, config)
        result = reconcile(
            corpus, spec.members, weights,
            doc_filter=score_docs,
            time_limit=config.time_limit,
            none_breaks_triangles=config.none_breaks_triangles,
            label=spec.display(),
        )
        report = score_run(
            corpus.reference, result.run,
            score_docs if score_docs is not None else None,
            collapse_identity=config.collapse_identity,
            average=config.average,
        )
        rows.append(ExperimentRow(spec, report, result))
        log.info("ensemble %s: F1 %.4f P %.4f R %.4f", spec.display(),
                 report.f1, report.precision, report.recall)
    return rows


def run_procedure_one(config: ExperimentConfig,
                      ensembles: Sequence[EnsembleSpec]) -> List[ExperimentRow]:
    """Weights from the full reference set; scored on the full reference set."""
    from .timeml import load_corpus

    corpus = load_corpus(config.corpus_root, config.weights_path)
    return _run_ensembles(corpus, config, ensembles, None)


def run_procedure_two(config: ExperimentConfig,
                      ensembles: Sequence[EnsembleSpec]) -> List[ExperimentRow]:
    """Weights measured on S1; reconciliation and scoring restricted to S2."""
    from .timeml import load_corpus

    corpus = load_corpus(config.corpus_root, config.weights_path)
    if config.split is None:
        config.split = default_split(corpus.documents)
        log.info("no split configured; defaulting to first half -> S1")
    s1, s2 = config.split
    if set(s1) & set(s2):
        raise ConfigurationError("S1 and S2 overlap")
    ensembles = [
        replace(spec, weights_source=WeightsSource.S1)
        if spec.weights_source is not WeightsSource.FILE else spec
        for spec in ensembles
    ]
    return _run_ensembles(corpus, config, ensembles, set(s2))


def format_experiment_table(rows: Sequence[ExperimentRow]) -> str:
    return format_score_table([
        (row.spec.display(), row.report.f1, row.report.precision, row.report.recall)
        for row in rows
    ])


def enumerate_ensembles(base: EnsembleSpec, pool: Set[str]) -> List[EnsembleSpec]:
    """All supersets of the base within the pool, by size then lexicographic."""
    if not set(base.members) <= pool:
        raise ConfigurationError("base ensemble members must lie within the pool")
    remaining = sorted(pool - set(base.members))
    out = []
    for k in range(len(remaining) + 1):
        for extra in combinations(remaining, k):
            members = tuple(sorted(set(base.members) | set(extra)))
            out.append(replace(base, members=members, label=""))
    return out


def write_reconciled(result: ReconcileResult, out_dir: Path) -> None:
    """Write reconciled output back as TimeML so it scores like any run."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc, links in sorted(result.run.documents.items()):
        entities: List[EntityRef] = []
        for votes_arc in result.votes[doc].arcs:
            entities.append(votes_arc.lo)
            entities.append(votes_arc.hi)
        write_timeml(entities, links, out_dir / f"{doc}.tml")
