"""Agent kernel: performative envelopes, mailboxes, deterministic scheduler.

Agents are isolated state machines; the only shared surface is the bus.
In deterministic mode a seeded scheduler picks one runnable agent at a
time and delivers exactly one message, so (scenario, seed) -> trace is a
function and golden traces stay stable.
"""

from __future__ import annotations

import hashlib
import random
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DuplicateAgentIdError,
    DuplicateCoreRoleError,
    InvalidMessageError,
    MessageBudgetExceededError,
)

REQUEST = "REQUEST"
INFORM = "INFORM"
FAILURE = "FAILURE"
CFP = "CFP"
PROPOSE = "PROPOSE"
ACCEPT_PROPOSAL = "ACCEPT_PROPOSAL"
REJECT_PROPOSAL = "REJECT_PROPOSAL"
AGREE = "AGREE"
CANCEL = "CANCEL"

PERFORMATIVES = (REQUEST, INFORM, FAILURE, CFP, PROPOSE,
                 ACCEPT_PROPOSAL, REJECT_PROPOSAL, AGREE, CANCEL)

# `result` extends the payload vocabulary for service invocation outputs.
PAYLOAD_KINDS = ("query", "match-list", "proposal", "contract",
                 "account-event", "error", "result")

_LEGAL_PAYLOADS = {
    REQUEST: {"query", "account-event", "proposal", "result"},
    INFORM: {"query", "match-list", "account-event", "error", "contract",
             "proposal", "result"},
    FAILURE: {"error"},
    CFP: {"query"},
    PROPOSE: {"proposal"},
    ACCEPT_PROPOSAL: {"proposal"},
    REJECT_PROPOSAL: {"proposal", "error"},
    AGREE: {"contract"},
    CANCEL: {"query", "error"},
}

AGENT_ROLES = ("administrator", "customer", "provider", "service",
               "discovery", "selection", "broker")
CORE_ROLES = ("administrator", "discovery", "selection", "broker")

TRACE_DIGEST = "sha256"


@dataclass(frozen=True)
class Payload:
    kind: str
    data: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PAYLOAD_KINDS:
            raise InvalidMessageError(f"unknown payload kind {self.kind!r}")


@dataclass
class AclMessage:
    performative: str
    sender: str
    receiver: str
    conversation_id: str
    content: Payload
    ontology_id: str = ""
    message_id: int | None = None  # assigned on delivery

    def validate(self) -> None:
        if self.performative not in PERFORMATIVES:
            raise InvalidMessageError(f"unknown performative {self.performative!r}")
        if not self.sender or not self.receiver:
            raise InvalidMessageError("sender and receiver are required")
        if self.sender == self.receiver:
            raise InvalidMessageError("sender must differ from receiver")
        if not self.conversation_id:
            raise InvalidMessageError("conversation-id must be non-empty")
        if self.content.kind not in _LEGAL_PAYLOADS[self.performative]:
            raise InvalidMessageError(
                f"{self.performative} cannot carry a "
                f"{self.content.kind!r} payload")


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    role: str
    owner_account: str | None = None


class Agent:
    """Base class; subclasses implement handle()."""

    def __init__(self, spec: AgentSpec):
        self.spec = spec

    @property
    def agent_id(self) -> str:
        return self.spec.agent_id

    def handle(self, msg: AclMessage) -> None:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True)
class TraceRecord:
    message_id: int
    performative: str
    sender: str
    receiver: str
    conversation_id: str
    payload_kind: str
    dead_letter: bool = False

    def line(self) -> str:
        base = (f"{self.message_id} {self.performative} {self.sender} "
                f"{self.receiver} {self.conversation_id} {self.payload_kind}")
        return f"dead-letter {base}" if self.dead_letter else base


class Trace:
    """Ordered record of delivered messages (and dead letters)."""

    def __init__(self):
        self.records: list[TraceRecord] = []

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def conversation(self, conversation_id: str) -> list[TraceRecord]:
        return [r for r in self.records if r.conversation_id == conversation_id]

    def canonical(self) -> str:
        header = f"# i-seec trace v1 digest={TRACE_DIGEST}\n"
        return header + "".join(r.line() + "\n" for r in self.records)

    def trace_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode("utf-8")).hexdigest()

    def __len__(self) -> int:
        return len(self.records)


class MessageBus:
    """Mailbox bus with seeded run-to-idle scheduling.

    Besides agents, system endpoints (the central register's communication
    interface) are addressable; they are not agents and do not count
    against core-role uniqueness.
    """

    def __init__(self, budget: int = 100_000):
        self.budget = budget
        self.agents: dict[str, Agent] = {}
        self.endpoints: dict[str, object] = {}
        self.mailboxes: dict[str, deque] = {}
        self.trace = Trace()
        self._delivery_seq = 0
        self.clock = 0  # logical tick, advanced per delivery

    # -- lifecycle ----------------------------------------------------------

    def spawn_agent(self, agent: Agent) -> str:
        spec = agent.spec
        if spec.role not in AGENT_ROLES:
            raise InvalidMessageError(f"unknown role {spec.role!r}")
        if spec.agent_id in self.agents or spec.agent_id in self.endpoints:
            raise DuplicateAgentIdError(f"agent id {spec.agent_id!r} in use")
        if spec.role in CORE_ROLES:
            if any(a.spec.role == spec.role for a in self.agents.values()):
                raise DuplicateCoreRoleError(
                    f"core role {spec.role!r} already exists")
        self.agents[spec.agent_id] = agent
        self.mailboxes[spec.agent_id] = deque()
        return spec.agent_id

    def remove_agent(self, agent_id: str) -> None:
        self.agents.pop(agent_id, None)
        self.mailboxes.pop(agent_id, None)

    def register_endpoint(self, endpoint_id: str, handler) -> None:
        if endpoint_id in self.agents or endpoint_id in self.endpoints:
            raise DuplicateAgentIdError(f"endpoint id {endpoint_id!r} in use")
        self.endpoints[endpoint_id] = handler
        self.mailboxes[endpoint_id] = deque()

    def agents_by_role(self, role: str) -> list[Agent]:
        return [a for a in self.agents.values() if a.spec.role == role]

    # -- messaging ----------------------------------------------------------

    def send(self, msg: AclMessage) -> str:
        msg.validate()
        if msg.receiver not in self.mailboxes:
            self._delivery_seq += 1
            self.trace.append(TraceRecord(
                self._delivery_seq, msg.performative, msg.sender, msg.receiver,
                msg.conversation_id, msg.content.kind, dead_letter=True))
            return "dead-letter"
        self.mailboxes[msg.receiver].append(msg)
        return "accepted"

    def _deliver(self, receiver: str) -> None:
        msg = self.mailboxes[receiver].popleft()
        self._delivery_seq += 1
        self.clock += 1
        msg.message_id = self._delivery_seq
        self.trace.append(TraceRecord(
            msg.message_id, msg.performative, msg.sender, msg.receiver,
            msg.conversation_id, msg.content.kind))
        target = self.agents.get(receiver)
        if target is not None:
            target.handle(msg)
        else:
            self.endpoints[receiver](msg)

    def run_until_idle(self, seed: int = 0) -> Trace:
        rng = random.Random(seed)
        delivered = 0
        while True:
            runnable = sorted(k for k, box in self.mailboxes.items() if box)
            if not runnable:
                break
            self._deliver(rng.choice(runnable))
            delivered += 1
            if delivered > self.budget:
                pending = {k: len(box) for k, box in self.mailboxes.items() if box}
                raise MessageBudgetExceededError(
                    f"livelock guard: {self.budget} messages delivered, "
                    f"still pending: {pending}")
        return self.trace
