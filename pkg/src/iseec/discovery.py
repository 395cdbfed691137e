"""Discovery agent: local-first lookup, central fallback, cache feed.

The agent owns the local register and the query history journal; both are
confined to its mailbox task.  History is consulted only for metrics,
answers always come from the registers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import runtime
from .errors import UnknownOntologyError
from .ontology import MatchDegree
from .registry import LocalRegister, MatchResult, ServiceQuery
from .runtime import AclMessage, Agent, AgentSpec, Payload


@dataclass
class DiscoveryResult:
    request_id: str
    results: list[MatchResult]
    source: str  # "local" | "central"
    hops: int


@dataclass
class HistoryRecord:
    query: str  # canonical form
    result_ids: list[str]
    source: str
    tick: int


class QueryHistory:
    """Append-only query history; metrics only, never answers."""

    def __init__(self, journal_path: str | Path | None = None):
        self.journal_path = Path(journal_path) if journal_path else None
        self.records: list[HistoryRecord] = []
        if self.journal_path and self.journal_path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self.journal_path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            self.records.append(HistoryRecord(
                rec["query"], rec["result-ids"], rec["source"], rec["tick"]))

    def append(self, record: HistoryRecord) -> None:
        self.records.append(record)
        if self.journal_path:
            with self.journal_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "query": record.query,
                    "result-ids": record.result_ids,
                    "source": record.source,
                    "tick": record.tick,
                }, sort_keys=True) + "\n")

    def cache_hit_rate(self) -> Fraction:
        if not self.records:
            return Fraction(0)
        hits = sum(1 for r in self.records if r.source == "local")
        return Fraction(hits, len(self.records))

    def __len__(self) -> int:
        return len(self.records)


class DiscoveryAgent(Agent):
    def __init__(self, platform, capacity: int,
                 history_path: str | Path | None = None,
                 strict_local_hit: bool = False):
        super().__init__(AgentSpec("discovery", "discovery"))
        self.platform = platform
        self.local = LocalRegister(capacity)
        self.history = QueryHistory(history_path)
        self.strict_local_hit = strict_local_hit
        self._pending: dict[str, dict] = {}  # conv -> {query, requester}

    def handle(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        if msg.performative == runtime.REQUEST and msg.content.kind == "query":
            self._on_query(msg)
        elif (msg.performative == runtime.REQUEST
              and msg.content.kind == "account-event"
              and msg.content.data.get("action") == "sync"):
            report = self.local.sync(self.platform.central)
            bus.send(AclMessage(
                runtime.INFORM, self.agent_id, msg.sender, msg.conversation_id,
                Payload("account-event", {"action": "sync-report",
                                          "report": report})))
        elif msg.performative == runtime.INFORM and msg.content.kind == "match-list":
            self._on_central_reply(msg)

    def _graph(self, query: ServiceQuery):
        graph = self.platform.ontologies.get(query.ontology_id)
        if graph is None:
            raise UnknownOntologyError(
                f"unknown ontology {query.ontology_id!r}")
        return graph

    def _on_query(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        query: ServiceQuery = msg.content.data["query"]
        conv = msg.conversation_id
        try:
            graph = self._graph(query)
        except UnknownOntologyError as exc:
            bus.send(AclMessage(
                runtime.INFORM, self.agent_id, msg.sender, conv,
                Payload("error", {"code": exc.code, "message": str(exc)})))
            return
        results = self.local.lookup(query, graph)
        if results is not None and self.strict_local_hit:
            if not any(r.degree == MatchDegree.EXACT for r in results):
                results = None
        if results is not None:
            self._reply(msg.sender, conv, query, results, "local")
            return
        self._pending[conv] = {"query": query, "requester": msg.sender}
        bus.send(AclMessage(
            runtime.REQUEST, self.agent_id, "central-register", conv,
            Payload("query", {"action": "discover", "query": query})))

    def _on_central_reply(self, msg: AclMessage) -> None:
        pending = self._pending.pop(msg.conversation_id, None)
        if pending is None:
            return
        query: ServiceQuery = pending["query"]
        results: list[MatchResult] = msg.content.data["results"]
        self.local.feed(results)
        self._reply(pending["requester"], msg.conversation_id,
                    query, results, "central")

    def _reply(self, requester: str, conv: str, query: ServiceQuery,
               results: list[MatchResult], source: str) -> None:
        bus = self.platform.bus
        # conversation hops include the reply being sent now
        hops = len(bus.trace.conversation(conv)) + 1
        result = DiscoveryResult(request_id=conv, results=results,
                                 source=source, hops=hops)
        self.history.append(HistoryRecord(
            query=query.canonical(),
            result_ids=[r.service.service_id for r in results],
            source=source,
            tick=bus.clock,
        ))
        bus.send(AclMessage(
            runtime.INFORM, self.agent_id, requester, conv,
            Payload("match-list", {"result": result})))
