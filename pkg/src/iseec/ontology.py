"""Concept graphs, subsumption reasoning and cross-ontology translation.

Three warehouse kinds share one representation: a DAG of concepts (the
domain/application vocabulary) plus typed rules (negotiation and
local-knowledge graphs).  Graphs are immutable once loaded; sharing across
agents needs no locking.

File format (one record per line, UTF-8, ``#`` comments and blank lines
ignored)::

    ontology <id> <kind>
    concept <id> "<label>" [parent,parent,...]
    rule <id> <kind> <attribute> key=value ...
    map <source-id> <target-id>
"""

from __future__ import annotations

import enum
import shlex
from dataclasses import dataclass, field

from .errors import (
    DanglingParentError,
    NoMappingError,
    OntologyParseError,
    SubsumptionCycleError,
    UnknownConceptError,
)

GRAPH_KINDS = ("domain", "application", "negotiation", "local-knowledge")
RULE_KINDS = ("reservation", "concession", "acceptance", "task-capability")


class MatchDegree(enum.IntEnum):
    """Qualitative strength of a concept match, totally ordered."""

    FAIL = 0
    SUBSUMES = 1
    PLUGIN = 2
    EXACT = 3

    @property
    def wire(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Concept:
    id: str
    label: str
    parents: tuple[str, ...] = ()


@dataclass(frozen=True)
class Rule:
    rule_id: str
    kind: str
    attribute: str
    parameters: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise OntologyParseError(f"unknown rule kind {self.kind!r}")
        if self.kind == "concession":
            if self.parameters.get("step", 0) <= 0:
                raise OntologyParseError(
                    f"concession rule {self.rule_id}: step must be > 0")
            if self.parameters.get("max-rounds", 0) < 1:
                raise OntologyParseError(
                    f"concession rule {self.rule_id}: max-rounds must be >= 1")
        if self.kind == "reservation":
            if "min" not in self.parameters or "max" not in self.parameters:
                raise OntologyParseError(
                    f"reservation rule {self.rule_id}: needs min and max")
            if self.parameters["min"] > self.parameters["max"]:
                raise OntologyParseError(
                    f"reservation rule {self.rule_id}: min > max")


class OntologyGraph:
    """Immutable concept DAG with precomputed ancestor closure."""

    def __init__(self, ontology_id: str, kind: str,
                 concepts: list[Concept], rules: list[Rule] | None = None):
        if kind not in GRAPH_KINDS:
            raise OntologyParseError(f"unknown ontology kind {kind!r}")
        self.ontology_id = ontology_id
        self.kind = kind
        self.concepts: dict[str, Concept] = {}
        for c in concepts:
            if not c.id:
                raise OntologyParseError("empty concept id")
            if c.id in self.concepts:
                raise OntologyParseError(f"duplicate concept id {c.id!r}")
            self.concepts[c.id] = c
        for c in concepts:
            for p in c.parents:
                if p not in self.concepts:
                    raise DanglingParentError(
                        f"concept {c.id!r} names unknown parent {p!r}")
        self.rules: tuple[Rule, ...] = tuple(rules or ())
        # ancestors[c] includes c itself (reflexive closure); detects cycles
        self._ancestors = self._close()

    def _close(self) -> dict[str, frozenset[str]]:
        done: dict[str, frozenset[str]] = {}
        on_path: list[str] = []
        on_path_set: set[str] = set()

        def visit(cid: str) -> frozenset[str]:
            if cid in done:
                return done[cid]
            if cid in on_path_set:
                cycle = on_path[on_path.index(cid):] + [cid]
                raise SubsumptionCycleError(cycle)
            on_path.append(cid)
            on_path_set.add(cid)
            acc = {cid}
            for p in self.concepts[cid].parents:
                acc |= visit(p)
            on_path.pop()
            on_path_set.discard(cid)
            done[cid] = frozenset(acc)
            return done[cid]

        for cid in self.concepts:
            visit(cid)
        return done

    def __contains__(self, concept_id: str) -> bool:
        return concept_id in self.concepts

    def __len__(self) -> int:
        return len(self.concepts)

    def __eq__(self, other) -> bool:
        return (isinstance(other, OntologyGraph)
                and self.ontology_id == other.ontology_id
                and self.kind == other.kind
                and self.concepts == other.concepts
                and self.rules == other.rules)

    def _check(self, concept_id: str) -> None:
        if concept_id not in self.concepts:
            raise UnknownConceptError(
                f"unknown concept {concept_id!r} in ontology {self.ontology_id!r}")

    def ancestors(self, concept_id: str) -> frozenset[str]:
        self._check(concept_id)
        return self._ancestors[concept_id]


def is_subconcept(graph: OntologyGraph, a: str, b: str) -> bool:
    """True iff ``b`` is reachable from ``a`` via parent edges, or ``a == b``."""
    graph._check(a)
    graph._check(b)
    return b in graph._ancestors[a]


def match_degree(graph: OntologyGraph, requested: str, advertised: str) -> MatchDegree:
    """Exact on identity, Plugin when the advertised concept specialises the
    requested one, Subsumes for the converse, Fail when unrelated."""
    graph._check(requested)
    graph._check(advertised)
    if requested == advertised:
        return MatchDegree.EXACT
    if requested in graph._ancestors[advertised]:
        return MatchDegree.PLUGIN
    if advertised in graph._ancestors[requested]:
        return MatchDegree.SUBSUMES
    return MatchDegree.FAIL


@dataclass(frozen=True)
class ConceptMapping:
    """Functional translation table between two ontologies."""

    source_ontology: str
    target_ontology: str
    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        seen = set()
        for src, _ in self.pairs:
            if src in seen:
                raise OntologyParseError(
                    f"mapping source {src!r} appears more than once")
            seen.add(src)

    def validate(self, source: OntologyGraph, target: OntologyGraph) -> None:
        for src, tgt in self.pairs:
            source._check(src)
            target._check(tgt)


def translate_concept(mapping: ConceptMapping, concept_id: str) -> str:
    for src, tgt in mapping.pairs:
        if src == concept_id:
            return tgt
    raise NoMappingError(
        f"no pair for concept {concept_id!r} "
        f"({mapping.source_ontology} -> {mapping.target_ontology})")


# --- document parsing / serialization ---------------------------------------

def _parse_number(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise OntologyParseError(f"{where}: bad number {text!r}") from None


def parse_ontology_document(document: bytes | str):
    """Parse one ontology document into its raw parts.

    Returns ``(ontology_id, kind, concepts, rules, map_pairs)``.  Header is
    optional; without one the graph gets id "unnamed" and kind "domain".
    """
    if isinstance(document, bytes):
        try:
            text = document.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise OntologyParseError(f"not valid UTF-8: {exc}") from None
    else:
        text = document

    ontology_id, kind = "unnamed", "domain"
    concepts: list[Concept] = []
    rules: list[Rule] = []
    map_pairs: list[tuple[str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line)
        except ValueError as exc:
            raise OntologyParseError(f"line {lineno}: {exc}") from None
        record, args = tokens[0], tokens[1:]
        if record == "ontology":
            if len(args) != 2:
                raise OntologyParseError(f"line {lineno}: ontology <id> <kind>")
            ontology_id, kind = args
        elif record == "concept":
            if len(args) < 2 or len(args) > 3:
                raise OntologyParseError(
                    f"line {lineno}: concept <id> \"<label>\" [parents]")
            parents = tuple(p for p in args[2].split(",") if p) if len(args) == 3 else ()
            concepts.append(Concept(id=args[0], label=args[1], parents=parents))
        elif record == "rule":
            if len(args) < 3:
                raise OntologyParseError(
                    f"line {lineno}: rule <id> <kind> <attribute> key=value...")
            params = {}
            for kv in args[3:]:
                if "=" not in kv:
                    raise OntologyParseError(f"line {lineno}: bad parameter {kv!r}")
                k, v = kv.split("=", 1)
                params[k] = _parse_number(v, f"line {lineno}")
            try:
                rules.append(Rule(args[0], args[1], args[2], params))
            except OntologyParseError as exc:
                raise OntologyParseError(f"line {lineno}: {exc}") from None
        elif record == "map":
            if len(args) != 2:
                raise OntologyParseError(f"line {lineno}: map <source> <target>")
            map_pairs.append((args[0], args[1]))
        else:
            raise OntologyParseError(f"line {lineno}: unknown record {record!r}")
    return ontology_id, kind, concepts, rules, map_pairs


def load_ontology(document: bytes | str) -> OntologyGraph:
    """Load and validate a concept graph from a document."""
    ontology_id, kind, concepts, rules, _ = parse_ontology_document(document)
    return OntologyGraph(ontology_id, kind, concepts, rules)


def load_mapping(document: bytes | str, source_ontology: str = "",
                 target_ontology: str = "") -> ConceptMapping:
    """Load the ``map`` records of a document as a ConceptMapping.

    Source/target ontology ids may come from an ``ontology`` header of the
    form ``ontology <source>-to-<target> domain`` or be passed explicitly.
    """
    ontology_id, _, _, _, pairs = parse_ontology_document(document)
    if not source_ontology and "-to-" in ontology_id:
        source_ontology, target_ontology = ontology_id.split("-to-", 1)
    return ConceptMapping(source_ontology, target_ontology, tuple(pairs))


def _quote(label: str) -> str:
    return '"' + label.replace('"', '\\"') + '"'


def _format_number(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))


def serialize_ontology(graph: OntologyGraph) -> str:
    """Canonical text form; reparsing yields an equal graph."""
    lines = [f"ontology {graph.ontology_id} {graph.kind}"]
    for c in graph.concepts.values():
        line = f"concept {c.id} {_quote(c.label)}"
        if c.parents:
            line += " " + ",".join(c.parents)
        lines.append(line)
    for r in graph.rules:
        line = f"rule {r.rule_id} {r.kind} {r.attribute}"
        for k, v in r.parameters.items():
            line += f" {k}={_format_number(v)}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def serialize_mapping(mapping: ConceptMapping) -> str:
    lines = []
    if mapping.source_ontology and mapping.target_ontology:
        lines.append(
            f"ontology {mapping.source_ontology}-to-{mapping.target_ontology} domain")
    lines.extend(f"map {src} {tgt}" for src, tgt in mapping.pairs)
    return "\n".join(lines) + "\n"
