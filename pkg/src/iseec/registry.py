"""Central and local registers of semantically described services.

The central register is the authoritative catalog; the local register is
the discovery agent's least-frequently-used cache of the services most
requested, with LRU-then-id tie-breaks so eviction traces replay exactly.
Descriptions persist one file per service under ``registry/central/``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateServiceNameError,
    InvalidQueryError,
    UnknownOntologyError,
    UnknownServiceError,
    ValidationError,
)
from .negotiation import UtilityModel
from .ontology import MatchDegree, OntologyGraph, match_degree

# attribute names whose values are fractions and must lie in [0,1]
FRACTION_ATTRIBUTES = {"reliability"}


@dataclass
class ServiceDescription:
    service_id: str
    provider_id: str
    name: str
    category: str
    inputs: list[tuple[str, str]]   # (parameter name, concept id)
    outputs: list[tuple[str, str]]
    attributes: dict[str, float]
    ontology_id: str

    def serialize(self) -> str:
        def pairs(items):
            return ",".join(f"{n}={c}" for n, c in items)

        lines = [
            f"service-id: {self.service_id}",
            f"provider-id: {self.provider_id}",
            f"name: {self.name}",
            f"category: {self.category}",
            f"inputs: {pairs(self.inputs)}",
            f"outputs: {pairs(self.outputs)}",
            f"ontology-id: {self.ontology_id}",
        ]
        for name in sorted(self.attributes):
            lines.append(f"attr.{name}: {self.attributes[name]:g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ServiceDescription":
        fields_: dict[str, str] = {}
        attrs: dict[str, float] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if key.startswith("attr."):
                attrs[key[5:]] = float(value)
            else:
                fields_[key] = value

        def pairs(text_: str) -> list[tuple[str, str]]:
            out = []
            for item in text_.split(","):
                if not item:
                    continue
                n, _, c = item.partition("=")
                out.append((n, c))
            return out

        return cls(
            service_id=fields_.get("service-id", ""),
            provider_id=fields_["provider-id"],
            name=fields_["name"],
            category=fields_["category"],
            inputs=pairs(fields_.get("inputs", "")),
            outputs=pairs(fields_.get("outputs", "")),
            attributes=attrs,
            ontology_id=fields_["ontology-id"],
        )


@dataclass
class ServiceQuery:
    query_id: str
    requester: str
    category: str
    required_outputs: list[str]
    provided_inputs: list[str]
    ontology_id: str
    preferences: UtilityModel | None = None

    def validate(self) -> None:
        if not self.required_outputs:
            raise InvalidQueryError("required-outputs must be non-empty")

    def canonical(self) -> str:
        """Canonical form for history/metrics: sorted lists, lowercase ids."""
        outs = ",".join(sorted(o.lower() for o in self.required_outputs))
        ins = ",".join(sorted(i.lower() for i in self.provided_inputs))
        return (f"{self.category.lower()}|out:{outs}|in:{ins}"
                f"|ont:{self.ontology_id.lower()}")

    @classmethod
    def parse(cls, text: str) -> "ServiceQuery":
        fields_: dict[str, str] = {}
        weights: dict[str, float] = {}
        directions: dict[str, str] = {}
        bounds_lo: dict[str, float] = {}
        bounds_hi: dict[str, float] = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(":")
            key, value = key.strip(), value.strip()
            if key.startswith("pref.weight."):
                weights[key[12:]] = float(value)
            elif key.startswith("pref.dir."):
                directions[key[9:]] = value
            elif key.startswith("pref.min."):
                bounds_lo[key[9:]] = float(value)
            elif key.startswith("pref.max."):
                bounds_hi[key[9:]] = float(value)
            else:
                fields_[key] = value
        preferences = None
        if weights:
            preferences = UtilityModel(
                weights=weights, directions=directions,
                bounds={a: (bounds_lo[a], bounds_hi[a]) for a in weights})

        def csl(text_: str) -> list[str]:
            return [x for x in text_.split(",") if x]

        return cls(
            query_id=fields_.get("query-id", ""),
            requester=fields_.get("requester", ""),
            category=fields_["category"],
            required_outputs=csl(fields_.get("required-outputs", "")),
            provided_inputs=csl(fields_.get("provided-inputs", "")),
            ontology_id=fields_["ontology-id"],
            preferences=preferences,
        )


@dataclass
class MatchResult:
    service: ServiceDescription
    degree: MatchDegree
    component_degrees: list[MatchDegree]


def match_service(query: ServiceQuery, service: ServiceDescription,
                  graph: OntologyGraph) -> MatchResult | None:
    """Degree of one service against one query; None when the overall
    degree is Fail or the ontologies differ."""
    if service.ontology_id != query.ontology_id:
        return None
    components: list[MatchDegree] = []
    cat = match_degree(graph, query.category, service.category)
    if cat == MatchDegree.FAIL:
        return None
    components.append(cat)
    for required in query.required_outputs:
        best = MatchDegree.FAIL
        for _, advertised in service.outputs:
            d = match_degree(graph, required, advertised)
            if d > best:
                best = d
        if best == MatchDegree.FAIL:
            return None
        components.append(best)
    return MatchResult(service=service, degree=min(components),
                       component_degrees=components)


def _sort_results(results: list[MatchResult]) -> list[MatchResult]:
    results.sort(key=lambda r: (-int(r.degree), r.service.service_id))
    return results


class CentralRegister:
    """Authoritative catalog; mutations serialized by the caller."""

    def __init__(self, directory: str | Path | None = None):
        self.services: dict[str, ServiceDescription] = {}
        self._counter = 0
        self.directory = Path(directory) if directory else None
        if self.directory:
            self._load_directory()

    def _load_directory(self) -> None:
        root = self.directory / "central"
        if not root.is_dir():
            return
        for path in sorted(root.glob("*.svc")):
            desc = ServiceDescription.parse(path.read_text(encoding="utf-8"))
            self.services[desc.service_id] = desc
            num = desc.service_id.rsplit("-", 1)[-1]
            if num.isdigit():
                self._counter = max(self._counter, int(num))

    def _persist(self, desc: ServiceDescription) -> None:
        if not self.directory:
            return
        root = self.directory / "central"
        root.mkdir(parents=True, exist_ok=True)
        (root / f"{desc.service_id}.svc").write_text(
            desc.serialize(), encoding="utf-8")

    def _validate(self, desc: ServiceDescription,
                  ontologies: dict[str, OntologyGraph]) -> None:
        graph = ontologies.get(desc.ontology_id)
        if graph is None:
            raise ValidationError(f"unknown ontology {desc.ontology_id!r}")
        for concept in ([desc.category]
                        + [c for _, c in desc.inputs]
                        + [c for _, c in desc.outputs]):
            if concept not in graph:
                raise ValidationError(
                    f"concept {concept!r} does not resolve in "
                    f"ontology {desc.ontology_id!r}")
        for name, value in desc.attributes.items():
            if name in FRACTION_ATTRIBUTES and not 0 <= value <= 1:
                raise ValidationError(
                    f"attribute {name!r} must lie in [0,1], got {value}")

    def find_by_name(self, provider_id: str, name: str) -> ServiceDescription | None:
        for desc in self.services.values():
            if desc.provider_id == provider_id and desc.name == name:
                return desc
        return None

    def publish(self, desc: ServiceDescription,
                ontologies: dict[str, OntologyGraph]) -> str:
        self._validate(desc, ontologies)
        if self.find_by_name(desc.provider_id, desc.name) is not None:
            raise DuplicateServiceNameError(
                f"provider {desc.provider_id!r} already published {desc.name!r}")
        self._counter += 1
        stored = copy.deepcopy(desc)
        stored.service_id = f"svc-{self._counter:06d}"
        self.services[stored.service_id] = stored
        self._persist(stored)
        return stored.service_id

    def update(self, desc: ServiceDescription,
               ontologies: dict[str, OntologyGraph]) -> str:
        """Replace an existing service (matched by id, else provider+name)."""
        self._validate(desc, ontologies)
        existing = (self.services.get(desc.service_id)
                    or self.find_by_name(desc.provider_id, desc.name))
        if existing is None:
            raise UnknownServiceError(
                f"no service to update for {desc.provider_id!r}/{desc.name!r}")
        stored = copy.deepcopy(desc)
        stored.service_id = existing.service_id
        self.services[stored.service_id] = stored
        self._persist(stored)
        return stored.service_id

    def delete(self, service_id: str) -> None:
        if service_id not in self.services:
            raise UnknownServiceError(f"unknown service {service_id!r}")
        del self.services[service_id]
        if self.directory:
            path = self.directory / "central" / f"{service_id}.svc"
            if path.exists():
                path.unlink()

    def discover(self, query: ServiceQuery,
                 graph: OntologyGraph) -> list[MatchResult]:
        query.validate()
        if graph.ontology_id != query.ontology_id:
            raise UnknownOntologyError(
                f"query ontology {query.ontology_id!r} does not match "
                f"graph {graph.ontology_id!r}")
        results = []
        for desc in self.services.values():
            m = match_service(query, desc, graph)
            if m is not None:
                results.append(m)
        return _sort_results(results)


@dataclass
class CacheEntry:
    description: ServiceDescription
    provider_link: str
    request_count: int
    last_used: int


@dataclass
class SyncReport:
    refreshed: list[str] = field(default_factory=list)
    removed: list[str] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.refreshed and not self.removed


class LocalRegister:
    """LFU cache of the most-requested services."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.entries: dict[str, CacheEntry] = {}
        self._tick = 0

    def _next_tick(self) -> int:
        self._tick += 1
        return self._tick

    def lookup(self, query: ServiceQuery,
               graph: OntologyGraph) -> list[MatchResult] | None:
        """Hit (result list) when at least one cached entry matches; the
        returned entries' request counts and recency advance.  None = miss."""
        tick = self._next_tick()
        results = []
        for entry in self.entries.values():
            m = match_service(query, entry.description, graph)
            if m is not None:
                results.append(m)
        if not results:
            return None
        for r in results:
            entry = self.entries[r.service.service_id]
            entry.request_count += 1
            entry.last_used = tick
        return _sort_results(results)

    def feed(self, results: list[MatchResult]) -> list[str]:
        """Insert discovery results; returns ids evicted to stay in capacity."""
        tick = self._next_tick()
        for r in results:
            sid = r.service.service_id
            existing = self.entries.get(sid)
            if existing is not None:
                existing.description = copy.deepcopy(r.service)
            else:
                self.entries[sid] = CacheEntry(
                    description=copy.deepcopy(r.service),
                    provider_link=r.service.provider_id,
                    request_count=1,
                    last_used=tick,
                )
        evicted = []
        while len(self.entries) > self.capacity:
            victim = min(
                self.entries,
                key=lambda sid: (self.entries[sid].request_count,
                                 self.entries[sid].last_used, sid))
            del self.entries[victim]
            evicted.append(victim)
        return evicted

    def sync(self, central: CentralRegister) -> SyncReport:
        """Administrator-driven coherence pass against the central register."""
        report = SyncReport()
        for sid in sorted(self.entries):
            entry = self.entries[sid]
            current = central.services.get(sid)
            if current is None:
                del self.entries[sid]
                report.removed.append(sid)
            elif current.serialize() != entry.description.serialize():
                entry.description = copy.deepcopy(current)
                report.refreshed.append(sid)
        return report
