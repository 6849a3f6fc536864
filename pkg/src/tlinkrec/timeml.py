"""Parsing of TimeML-subset documents and classifier run directories.

Only the elements needed for TLINK reconciliation are read: TIMEX3,
MAKEINSTANCE, and TLINK.  Everything else (SIGNAL, SLINK/ALINK, event
attributes) is ignored.  Input is UTF-8.
"""

from __future__ import annotations

import enum
import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, TextIO, Tuple, Union

from .errors import ConfigurationError, TimeMLParseError
from .relations import RelType, invert

log = logging.getLogger(__name__)


class EntityKind(enum.IntEnum):
    # Values double as the kind rank in the entity total order.
    DCT = 0
    TIMEX = 1
    EVENT_INSTANCE = 2


@dataclass(frozen=True)
class EntityRef:
    kind: EntityKind
    id: str
    document: str = ""

    @property
    def key(self) -> Tuple[int, str]:
        """Sort key of the entity total order: kind rank, then id string."""
        return (int(self.kind), self.id)


@dataclass(frozen=True)
class TLink:
    source: EntityRef
    target: EntityRef
    rel: RelType
    lid: str = ""


@dataclass(frozen=True)
class CanonicalArc:
    """One unordered entity pair, endpoints ordered by the entity total order."""

    lo: EntityRef
    hi: EntityRef

    @property
    def document(self) -> str:
        return self.lo.document

    @property
    def key(self):
        return (self.lo.key, self.hi.key)


def canonicalize(link: TLink) -> Tuple[CanonicalArc, RelType]:
    """Orient a TLink canonically, inverting the label if endpoints swap."""
    if link.source.key < link.target.key:
        return CanonicalArc(link.source, link.target), link.rel
    if link.source.key > link.target.key:
        return CanonicalArc(link.target, link.source), invert(link.rel)
    raise ValueError(f"degenerate TLink on {link.source}")


@dataclass(frozen=True)
class SkippedItem:
    document: str
    ref: str  # lid, or #<element index> when the TLINK carries no lid
    reason: str


@dataclass
class ParsedDocument:
    document: str
    entities: List[EntityRef]
    links: List[TLink]
    skipped: List[SkippedItem]
    tlink_count: int = 0


_INPUT_LABELS = {r.name: r for r in RelType if r is not RelType.NONE}


def parse_timeml(data: Union[bytes, str], document: str = "") -> ParsedDocument:
    """Parse one TimeML document into entities and TLinks.

    TLINKs with an unknown relType or an unresolvable endpoint are recorded in
    the skipped list rather than failing the parse; malformed XML raises
    TimeMLParseError with line/column.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise TimeMLParseError(
            f"{document or '<input>'}: line {line}, column {col}: {exc.msg}"
        ) from exc

    timexes: Dict[str, EntityRef] = {}
    events: Dict[str, EntityRef] = {}
    for elem in root.iter():
        if elem.tag == "TIMEX3":
            tid = elem.get("tid", "")
            if not tid:
                continue
            kind = (
                EntityKind.DCT
                if elem.get("functionInDocument") == "CREATION_TIME"
                else EntityKind.TIMEX
            )
            timexes[tid] = EntityRef(kind, tid, document)
        elif elem.tag == "MAKEINSTANCE":
            eiid = elem.get("eiid", "")
            if eiid:
                events[eiid] = EntityRef(EntityKind.EVENT_INSTANCE, eiid, document)

    def resolve(elem, attrs) -> Optional[EntityRef]:
        for attr, table in attrs:
            value = elem.get(attr)
            if value is not None:
                return table.get(value)
        return None

    links: List[TLink] = []
    skipped: List[SkippedItem] = []
    tlink_count = 0
    for elem in root.iter("TLINK"):
        tlink_count += 1
        ref = elem.get("lid") or f"#{tlink_count}"

        def skip(reason):
            skipped.append(SkippedItem(document, ref, reason))

        rel_name = (elem.get("relType") or "").upper()
        if not rel_name:
            skip("missing relType")
            continue
        rel = _INPUT_LABELS.get(rel_name)
        if rel is None:
            skip(f"unknown relType {rel_name}")
            continue
        source = resolve(
            elem, [("eventInstanceID", events), ("timeID", timexes)]
        )
        target = resolve(
            elem, [("relatedToEventInstance", events), ("relatedToTime", timexes)]
        )
        if source is None or target is None:
            skip("unresolved endpoint id")
            continue
        if source == target:
            skip("self-loop")
            continue
        links.append(TLink(source, target, rel, elem.get("lid", "")))

    entities = sorted(timexes.values(), key=lambda e: e.key)
    entities += sorted(events.values(), key=lambda e: e.key)
    return ParsedDocument(document, entities, links, skipped, tlink_count)


@dataclass
class ClassifierRun:
    name: str
    f1_weight: float
    documents: Dict[str, List[TLink]] = field(default_factory=dict)


def canonical_votes(links: Iterable[TLink]) -> Dict[CanonicalArc, RelType]:
    """One prediction per arc; duplicates keep the last occurrence."""
    votes: Dict[CanonicalArc, RelType] = {}
    for link in links:
        arc, rel = canonicalize(link)
        if arc in votes and votes[arc] is not rel:
            log.warning(
                "%s: duplicate prediction on %s-%s, keeping %s",
                arc.document, arc.lo.id, arc.hi.id, rel.name,
            )
        votes[arc] = rel
    return votes


def read_weights(path: Union[str, Path]) -> Dict[str, float]:
    """Weights file: `<classifier-name> <f1-as-decimal>` per line, '#' comments."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"weights file not found: {path}")
    weights: Dict[str, float] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ConfigurationError(f"{path}:{lineno}: expected '<name> <weight>'")
        try:
            weights[parts[0]] = float(parts[1])
        except ValueError:
            raise ConfigurationError(f"{path}:{lineno}: bad weight {parts[1]!r}")
    return weights


@dataclass
class Corpus:
    root: Path
    runs: Dict[str, ClassifierRun]
    reference: ClassifierRun
    skipped: List[SkippedItem] = field(default_factory=list)

    @property
    def documents(self) -> List[str]:
        return sorted(self.reference.documents)


def _load_run_dir(directory: Path, name: str, weight: float,
                  skipped: List[SkippedItem]) -> ClassifierRun:
    run = ClassifierRun(name, weight)
    for path in sorted(directory.glob("*.tml")):
        parsed = parse_timeml(path.read_bytes(), path.stem)
        run.documents[path.stem] = parsed.links
        skipped.extend(parsed.skipped)
    return run


def load_corpus(root: Union[str, Path],
                weights_path: Union[str, Path, None] = None) -> Corpus:
    """Load `runs/<name>/<doc>.tml`, `reference/<doc>.tml`, and the weights file.

    Every run directory must have a weights entry; documents missing from a
    run are permitted (the run simply votes on no arcs there).
    """
    root = Path(root)
    ref_dir = root / "reference"
    runs_dir = root / "runs"
    if not ref_dir.is_dir():
        raise ConfigurationError(f"missing reference directory: {ref_dir}")
    weights = read_weights(weights_path or root / "weights.txt")

    skipped: List[SkippedItem] = []
    reference = _load_run_dir(ref_dir, "reference", 1.0, skipped)
    runs: Dict[str, ClassifierRun] = {}
    if runs_dir.is_dir():
        for sub in sorted(p for p in runs_dir.iterdir() if p.is_dir()):
            if sub.name not in weights:
                raise ConfigurationError(f"no weights entry for classifier {sub.name!r}")
            runs[sub.name] = _load_run_dir(sub, sub.name, weights[sub.name], skipped)

    ref_docs = set(reference.documents)
    for run in runs.values():
        for doc in sorted(ref_docs - set(run.documents)):
            log.warning("classifier %s has no output for document %s", run.name, doc)
    return Corpus(root, runs, reference, skipped)


def write_skipped_report(skipped: Iterable[SkippedItem], sink: TextIO) -> None:
    for item in skipped:
        sink.write(f"{item.document} {item.ref} {item.reason}\n")


def write_timeml(entities: Iterable[EntityRef], links: Iterable[TLink],
                 path: Union[str, Path]) -> None:
    """Write a minimal TimeML-subset document that parse_timeml round-trips."""
    root = ET.Element("TimeML")
    seen = set()
    for ent in sorted(entities, key=lambda e: e.key):
        if ent.id in seen:
            continue
        seen.add(ent.id)
        if ent.kind is EntityKind.EVENT_INSTANCE:
            eid = "e" + ent.id[2:] if ent.id.startswith("ei") else ent.id
            ET.SubElement(root, "MAKEINSTANCE", eiid=ent.id, eventID=eid)
        else:
            attrs = {"tid": ent.id, "type": "DATE", "value": ""}
            if ent.kind is EntityKind.DCT:
                attrs["functionInDocument"] = "CREATION_TIME"
            ET.SubElement(root, "TIMEX3", attrs)
    for i, link in enumerate(links, 1):
        attrs = {"lid": link.lid or f"l{i}", "relType": link.rel.name}
        if link.source.kind is EntityKind.EVENT_INSTANCE:
            attrs["eventInstanceID"] = link.source.id
        else:
            attrs["timeID"] = link.source.id
        if link.target.kind is EntityKind.EVENT_INSTANCE:
            attrs["relatedToEventInstance"] = link.target.id
        else:
            attrs["relatedToTime"] = link.target.id
        ET.SubElement(root, "TLINK", attrs)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)
