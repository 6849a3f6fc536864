"""TimeML relation vocabulary, interval-algebra composition, and closure.

The 14 TimeML relation labels (plus an artificial NONE) are grounded in the
interval algebra: every label maps to a basic interval relation, expressed as
order constraints between the four interval endpoints.  The composition table
is generated from those endpoint constraints at import time, so no entry is
hand-typed.  SIMULTANEOUS/IDENTITY and IS_INCLUDED/DURING (and their inverses)
denote the same interval relation; composition results are emitted in
canonical form (SIMULTANEOUS, IS_INCLUDED, INCLUDES), and consistency checks
collapse the synonyms before testing membership.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, Iterable, Iterator, Optional, Tuple, Union


class RelType(enum.IntEnum):
    """The 14 TimeML relation labels plus NONE; values are the 1..15 ordinals."""

    BEFORE = 1
    AFTER = 2
    IBEFORE = 3
    IAFTER = 4
    INCLUDES = 5
    IS_INCLUDED = 6
    DURING = 7
    DURING_INV = 8
    BEGINS = 9
    BEGUN_BY = 10
    ENDS = 11
    ENDED_BY = 12
    SIMULTANEOUS = 13
    IDENTITY = 14
    NONE = 15


NON_NONE = tuple(r for r in RelType if r is not RelType.NONE)

_INVERSE = {
    RelType.BEFORE: RelType.AFTER,
    RelType.AFTER: RelType.BEFORE,
    RelType.IBEFORE: RelType.IAFTER,
    RelType.IAFTER: RelType.IBEFORE,
    RelType.INCLUDES: RelType.IS_INCLUDED,
    RelType.IS_INCLUDED: RelType.INCLUDES,
    RelType.DURING: RelType.DURING_INV,
    RelType.DURING_INV: RelType.DURING,
    RelType.BEGINS: RelType.BEGUN_BY,
    RelType.BEGUN_BY: RelType.BEGINS,
    RelType.ENDS: RelType.ENDED_BY,
    RelType.ENDED_BY: RelType.ENDS,
    RelType.SIMULTANEOUS: RelType.SIMULTANEOUS,
    RelType.IDENTITY: RelType.IDENTITY,
    RelType.NONE: RelType.NONE,
}

# Synonyms collapse onto the canonical label carrying the same interval relation.
_COLLAPSE = {
    RelType.DURING: RelType.IS_INCLUDED,
    RelType.DURING_INV: RelType.INCLUDES,
    RelType.IDENTITY: RelType.SIMULTANEOUS,
}

CANONICAL_LABELS = tuple(
    r for r in NON_NONE if r not in _COLLAPSE
)


def invert(r: RelType) -> RelType:
    """Converse label; total over all 15 labels and involutive."""
    return _INVERSE[r]


def collapse(r: RelType) -> RelType:
    """Map a label onto its canonical synonym (identity for most labels)."""
    return _COLLAPSE.get(r, r)


def synonyms(r: RelType) -> Tuple[RelType, ...]:
    """All labels denoting the same interval relation as canonical label r."""
    extra = tuple(k for k, v in _COLLAPSE.items() if v is r)
    return (r,) + extra


# --- endpoint semantics ----------------------------------------------------
#
# Each basic interval relation between intervals x = (x1, x2) and y = (y1, y2)
# is a 2x2 grid of point relations: entry [i][k] relates endpoint x_{i+1} to
# endpoint y_{k+1}, each one of '<', '=', '>'.

_ALLEN_ENDPOINTS: Dict[str, Tuple[Tuple[str, str], Tuple[str, str]]] = {
    "b":  (("<", "<"), ("<", "<")),
    "bi": ((">", ">"), (">", ">")),
    "m":  (("<", "<"), ("=", "<")),
    "mi": ((">", "="), (">", ">")),
    "o":  (("<", "<"), (">", "<")),
    "oi": ((">", "<"), (">", ">")),
    "s":  (("=", "<"), (">", "<")),
    "si": (("=", "<"), (">", ">")),
    "d":  ((">", "<"), (">", "<")),
    "di": (("<", "<"), (">", ">")),
    "f":  ((">", "<"), (">", "=")),
    "fi": (("<", "<"), (">", "=")),
    "eq": (("=", "<"), (">", "=")),
}

_TIMEML_TO_ALLEN = {
    RelType.BEFORE: "b",
    RelType.AFTER: "bi",
    RelType.IBEFORE: "m",
    RelType.IAFTER: "mi",
    RelType.INCLUDES: "di",
    RelType.IS_INCLUDED: "d",
    RelType.DURING: "d",
    RelType.DURING_INV: "di",
    RelType.BEGINS: "s",
    RelType.BEGUN_BY: "si",
    RelType.ENDS: "f",
    RelType.ENDED_BY: "fi",
    RelType.SIMULTANEOUS: "eq",
    RelType.IDENTITY: "eq",
}

# Interval relations with no TimeML label (overlap and its converse) simply
# contribute nothing when a composition result is decoded back to labels.
_ALLEN_TO_TIMEML = {
    "b": RelType.BEFORE,
    "bi": RelType.AFTER,
    "m": RelType.IBEFORE,
    "mi": RelType.IAFTER,
    "di": RelType.INCLUDES,
    "d": RelType.IS_INCLUDED,
    "s": RelType.BEGINS,
    "si": RelType.BEGUN_BY,
    "f": RelType.ENDS,
    "fi": RelType.ENDED_BY,
    "eq": RelType.SIMULTANEOUS,
}

_POINT_COMP = {
    ("<", "<"): frozenset("<"),
    ("<", "="): frozenset("<"),
    ("<", ">"): frozenset("<=>"),
    ("=", "<"): frozenset("<"),
    ("=", "="): frozenset("="),
    ("=", ">"): frozenset(">"),
    (">", "<"): frozenset("<=>"),
    (">", "="): frozenset(">"),
    (">", ">"): frozenset(">"),
}


def _allen_compose(a: str, b: str) -> frozenset:
    """Basic-relation composition derived from endpoint constraints.

    Point relations between the endpoints of p and r are composed through the
    shared interval q; a candidate relation is possible iff its endpoint grid
    agrees with every composed constraint.
    """
    ga, gb = _ALLEN_ENDPOINTS[a], _ALLEN_ENDPOINTS[b]
    grid = [[None, None], [None, None]]
    for i in range(2):
        for k in range(2):
            allowed = frozenset("<=>")
            for j in range(2):
                allowed &= _POINT_COMP[(ga[i][j], gb[j][k])]
            grid[i][k] = allowed
    out = set()
    for cand, gc in _ALLEN_ENDPOINTS.items():
        if all(gc[i][k] in grid[i][k] for i in range(2) for k in range(2)):
            out.add(cand)
    return frozenset(out)


def relation_from_intervals(x: Tuple[int, int], y: Tuple[int, int]) -> Optional[RelType]:
    """Canonical TimeML label holding between two concrete intervals.

    Returns None when the intervals overlap in the one configuration TimeML
    cannot express (Allen overlaps / overlapped-by).
    """
    if not (x[0] < x[1] and y[0] < y[1]):
        raise ValueError("intervals must have positive extent")

    def cmp(u, v):
        return "<" if u < v else (">" if u > v else "=")

    grid = ((cmp(x[0], y[0]), cmp(x[0], y[1])), (cmp(x[1], y[0]), cmp(x[1], y[1])))
    for name, g in _ALLEN_ENDPOINTS.items():
        if g == grid:
            return _ALLEN_TO_TIMEML.get(name)
    raise AssertionError("unreachable: endpoint grid matches no basic relation")


# --- relation sets ----------------------------------------------------------

_BIT = {r: 1 << (r.value - 1) for r in NON_NONE}
_FULL_MASK = (1 << 14) - 1
_CANONICAL_MASK = 0
for _r in CANONICAL_LABELS:
    _CANONICAL_MASK |= _BIT[_r]


@dataclass(frozen=True)
class RelSet:
    """Subset of the 14 non-NONE labels as a 14-bit mask (bit = ordinal - 1)."""

    mask: int = 0

    def __post_init__(self):
        if not 0 <= self.mask <= _FULL_MASK:
            raise ValueError(f"mask out of range: {self.mask:#x}")

    @classmethod
    def of(cls, *rels: RelType) -> "RelSet":
        m = 0
        for r in rels:
            if r is RelType.NONE:
                raise ValueError("RelSet never contains NONE")
            m |= _BIT[r]
        return cls(m)

    @classmethod
    def full(cls) -> "RelSet":
        return cls(_FULL_MASK)

    @classmethod
    def canonical_full(cls) -> "RelSet":
        return cls(_CANONICAL_MASK)

    def __contains__(self, r: RelType) -> bool:
        return r is not RelType.NONE and bool(self.mask & _BIT[r])

    def __iter__(self) -> Iterator[RelType]:
        for r in NON_NONE:
            if self.mask & _BIT[r]:
                yield r

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __and__(self, other: "RelSet") -> "RelSet":
        return RelSet(self.mask & other.mask)

    def __or__(self, other: "RelSet") -> "RelSet":
        return RelSet(self.mask | other.mask)

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    def invert(self) -> "RelSet":
        return RelSet(_invert_mask(self.mask))

    def collapse(self) -> "RelSet":
        return RelSet(_collapse_mask(self.mask))

    def __repr__(self):
        return "{" + ",".join(r.name for r in self) + "}"


@lru_cache(maxsize=None)
def _invert_mask(mask: int) -> int:
    out = 0
    for r in NON_NONE:
        if mask & _BIT[r]:
            out |= _BIT[_INVERSE[r]]
    return out


@lru_cache(maxsize=None)
def _collapse_mask(mask: int) -> int:
    out = 0
    for r in NON_NONE:
        if mask & _BIT[r]:
            out |= _BIT[collapse(r)]
    return out


# --- composition table ------------------------------------------------------


class CompositionTable:
    """Total composition map over the 14x14 non-NONE label pairs.

    Entries hold canonical labels only; synonym arguments share the entry of
    their canonical label.
    """

    def __init__(self, entries: Dict[Tuple[RelType, RelType], RelSet]):
        self._entries = entries

    @classmethod
    def build(cls) -> "CompositionTable":
        entries = {}
        for a, b in product(NON_NONE, NON_NONE):
            allen = _allen_compose(_TIMEML_TO_ALLEN[a], _TIMEML_TO_ALLEN[b])
            rs = RelSet.of(*(
                _ALLEN_TO_TIMEML[name] for name in allen if name in _ALLEN_TO_TIMEML
            ))
            entries[(a, b)] = rs
        return cls(entries)

    def compose(self, a: RelType, b: RelType) -> RelSet:
        if a is RelType.NONE or b is RelType.NONE:
            raise ValueError("composition with NONE is undefined")
        return self._entries[(a, b)]

    def dump(self) -> str:
        """Hand-auditable 14x14 grid, rows/cols in ordinal order.

        Cells are comma-separated label names; '-' marks an empty cell.
        """
        lines = ["\t".join(["."] + [r.name for r in NON_NONE])]
        for a in NON_NONE:
            cells = []
            for b in NON_NONE:
                rs = self._entries[(a, b)]
                cells.append(",".join(r.name for r in rs) if not rs.is_empty else "-")
            lines.append("\t".join([a.name] + cells))
        return "\n".join(lines) + "\n"


TABLE = CompositionTable.build()


def compose(a: RelType, b: RelType) -> RelSet:
    """Set of labels consistent with a(p,q) and b(q,r); canonical labels only."""
    return TABLE.compose(a, b)


@lru_cache(maxsize=None)
def _compose_masks(mask_a: int, mask_b: int) -> int:
    out = 0
    for a in NON_NONE:
        if not mask_a & _BIT[a]:
            continue
        for b in NON_NONE:
            if mask_b & _BIT[b]:
                out |= TABLE.compose(a, b).mask
    return out


def compose_sets(sa: RelSet, sb: RelSet) -> RelSet:
    """Union of compose(a, b) over all a in sa, b in sb."""
    from .errors import InconsistentNetworkError

    if sa.is_empty or sb.is_empty:
        raise InconsistentNetworkError("composition over an empty relation set")
    return RelSet(_compose_masks(sa.mask, sb.mask))


# --- event graphs -----------------------------------------------------------


class _Inconsistent:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INCONSISTENT"

    def __bool__(self):
        return False


INCONSISTENT = _Inconsistent()

EdgeLabel = Union[RelType, RelSet]


class EventGraph:
    """Undirected storage of labeled entity pairs, one edge per unordered pair.

    Edges are stored with endpoints in lexicographic order; reading an edge
    against its stored direction yields the inverted label.  No self-loops.
    """

    def __init__(self, nodes: Iterable[str] = ()):
        self.nodes = set(nodes)
        self._edges: Dict[Tuple[str, str], EdgeLabel] = {}

    def add_node(self, node: str) -> None:
        self.nodes.add(node)

    def set_relation(self, p: str, q: str, rel: EdgeLabel) -> None:
        if p == q:
            raise ValueError(f"self-loop on {p!r}")
        self.nodes.add(p)
        self.nodes.add(q)
        if p < q:
            self._edges[(p, q)] = rel
        else:
            self._edges[(q, p)] = rel.invert() if isinstance(rel, RelSet) else invert(rel)

    def get(self, p: str, q: str) -> Optional[EdgeLabel]:
        """Label read in direction p -> q, or None if the pair is unlabeled."""
        if p < q:
            return self._edges.get((p, q))
        rel = self._edges.get((q, p))
        if rel is None:
            return None
        return rel.invert() if isinstance(rel, RelSet) else invert(rel)

    def edges(self) -> Iterator[Tuple[str, str, EdgeLabel]]:
        for (p, q), rel in sorted(self._edges.items()):
            yield p, q, rel

    def __len__(self) -> int:
        return len(self._edges)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EventGraph)
            and self.nodes == other.nodes
            and self._edges == other._edges
        )

    def copy(self) -> "EventGraph":
        g = EventGraph(self.nodes)
        g._edges = dict(self._edges)
        return g

    def to_dot(self, name: str = "events") -> str:
        lines = [f"digraph {name} {{"]
        for node in sorted(self.nodes):
            lines.append(f'  "{node}";')
        for p, q, rel in self.edges():
            label = rel.name if isinstance(rel, RelType) else ",".join(r.name for r in rel)
            lines.append(f'  "{p}" -> "{q}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _seed_mask(label: EdgeLabel) -> Optional[int]:
    if isinstance(label, RelSet):
        return _collapse_mask(label.mask)
    if label is RelType.NONE:
        return None
    return _BIT[collapse(label)]


def closure(g: EventGraph) -> Union[EventGraph, _Inconsistent]:
    """Path-consistent refinement of g, or INCONSISTENT.

    Unknown pairs start at the full canonical set; every pair is repeatedly
    intersected with the composition along each two-edge path until fixpoint.
    Naive triple iteration; documents here have at most a few hundred nodes.
    """
    nodes = sorted(g.nodes)
    n = len(nodes)
    eq_bit = _BIT[RelType.SIMULTANEOUS]
    m = [[_CANONICAL_MASK] * n for _ in range(n)]
    for i in range(n):
        m[i][i] = eq_bit
    index = {node: i for i, node in enumerate(nodes)}
    for p, q, rel in g.edges():
        seed = _seed_mask(rel)
        if seed is None:
            continue
        i, j = index[p], index[q]
        m[i][j] &= seed
        m[j][i] = _invert_mask(m[i][j])
        if m[i][j] == 0:
            return INCONSISTENT

    changed = True
    while changed:
        changed = False
        for i in range(n):
            mi = m[i]
            for j in range(i + 1, n):
                cur = mi[j]
                for k in range(n):
                    if k == i or k == j:
                        continue
                    cur &= _compose_masks(mi[k], m[k][j])
                    if cur == 0:
                        return INCONSISTENT
                if cur != mi[j]:
                    mi[j] = cur
                    m[j][i] = _invert_mask(cur)
                    changed = True

    out = EventGraph(g.nodes)
    for i in range(n):
        for j in range(i + 1, n):
            if m[i][j] != _CANONICAL_MASK:
                out.set_relation(nodes[i], nodes[j], RelSet(m[i][j]))
    return out


def is_consistent_labeling(g: EventGraph) -> bool:
    """True iff every fully labeled triangle satisfies the composition table.

    Edges must carry single labels; NONE-labeled edges (and triangles touching
    them) are exempt.  IDENTITY/SIMULTANEOUS and DURING synonyms are collapsed
    before the membership test.
    """
    adj: Dict[str, set] = {}
    for p, q, rel in g.edges():
        if not isinstance(rel, RelType):
            raise ValueError("is_consistent_labeling requires single-label edges")
        if rel is RelType.NONE:
            continue
        adj.setdefault(p, set()).add(q)
        adj.setdefault(q, set()).add(p)

    for p in sorted(adj):
        for q in sorted(adj[p]):
            if q <= p:
                continue
            for r in sorted(adj[p] & adj[q]):
                if r <= q:
                    continue
                lab_pq = g.get(p, q)
                lab_qr = g.get(q, r)
                lab_pr = g.get(p, r)
                if RelType.NONE in (lab_pq, lab_qr, lab_pr):
                    continue
                if collapse(lab_pr) not in compose(lab_pq, lab_qr):
                    return False
    return True
