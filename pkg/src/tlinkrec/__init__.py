"""Globally consistent reconciliation of temporal-relation classifier ensembles.

Merges the TLINK predictions of multiple classifiers over a document into a
single labeling by solving a weighted-assignment integer program with
interval-algebra transitivity constraints, and scores annotations with a
closure-based temporal-awareness metric.
"""

from .errors import (
    ConfigurationError,
    DataError,
    Infeasible,
    InconsistentNetworkError,
    ReconciliationError,
    TimeMLParseError,
)
from .relations import (
    INCONSISTENT,
    CompositionTable,
    EventGraph,
    RelSet,
    RelType,
    TABLE,
    closure,
    collapse,
    compose,
    compose_sets,
    invert,
    is_consistent_labeling,
)
from .timeml import (
    CanonicalArc,
    ClassifierRun,
    Corpus,
    EntityKind,
    EntityRef,
    TLink,
    canonicalize,
    load_corpus,
    parse_timeml,
)
from .model import (
    BinaryProgram,
    TriangleIndex,
    VoteTable,
    build_ip,
    collect_arcs,
    enumerate_triangles,
    export_lp,
)
from .solver import Solution, SolverStats, brute_force_solve, solve, verify
from .scoring import ScoreReport, score_run, temporal_awareness
from .pipeline import (
    EnsembleSpec,
    ExperimentConfig,
    enumerate_ensembles,
    reconcile,
    run_procedure_one,
    run_procedure_two,
)

__version__ = "0.1.0"
