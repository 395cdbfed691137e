"""Platform assembly and synchronous facade.

Spawning the core agents, wiring the registers and warehouses, and
exposing the operations that clients (CLI, gateway, scenario harness)
call.  Each facade operation injects one message into the bus, runs the
deterministic scheduler to idle, and reads the outcome off the
conversation blackboard.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from . import runtime
from .accounts import Account, AccountStore, Session
from .agents import (
    AdministratorAgent,
    BrokerAgent,
    CustomerAgent,
    ProviderAgent,
    SelectionAgent,
    ServiceAgent,
    make_register_endpoint,
)
from .discovery import DiscoveryAgent, DiscoveryResult
from .errors import (
    AllProposalsFailedError,
    DuplicateLoginError,
    ExhaustedAlternativesError,
    InvalidPolicyError,
    InvalidQueryError,
    InvalidSessionError,
    NoMappingError,
    NotACustomerError,
    NotAProviderError,
    PlatformError,
    UnbindableParameterError,
    UnknownOntologyError,
    UnknownUserError,
    ValidationError,
    WrongCredentialsError,
)
from .negotiation import (
    Contract,
    NegotiationOutcome,
    NegotiationPolicy,
    NegotiationSession,
    Proposal,
    UtilityModel,
    negotiate,
    policy_from_rules,
    utility_model_from_rules,
)
from .ontology import ConceptMapping, OntologyGraph, load_mapping, load_ontology
from .registry import CentralRegister, ServiceDescription, ServiceQuery
from .runtime import AclMessage, MessageBus, Payload

_ERROR_CLASSES = {
    "unknown-user-error": UnknownUserError,
    "wrong-credentials-error": WrongCredentialsError,
    "duplicate-login-error": DuplicateLoginError,
    "validation-error": ValidationError,
    "duplicate-name-error": ValidationError,
    "unknown-ontology-error": UnknownOntologyError,
    "invalid-query-error": InvalidQueryError,
    "all-failed-error": AllProposalsFailedError,
    "no-mapping-error": NoMappingError,
    "unbindable-parameter-error": UnbindableParameterError,
    "exhausted-alternatives-error": ExhaustedAlternativesError,
}


def _raise_for(error: dict) -> None:
    cls = _ERROR_CLASSES.get(error.get("code"), PlatformError)
    raise cls(error.get("message", error.get("code", "error")))


@dataclass
class RequestState:
    request_id: str
    customer_login: str
    query: ServiceQuery
    result: DiscoveryResult | None = None
    ranked: list[tuple[Proposal, float]] | None = None
    negotiation_ids: list[str] = field(default_factory=list)


@dataclass
class NegotiationState:
    negotiation_id: str
    request_id: str
    customer_login: str
    provider_login: str
    service_id: str
    session: NegotiationSession
    conversation_id: str
    mode: str = "auto"  # auto | manual
    contract_id: str | None = None

    @property
    def service_agent_id(self) -> str:
        return f"service-agent-{self.service_id}"


class Platform:
    """One i-SEEC deployment: bus, warehouses, registers, agents."""

    def __init__(self, seed: int = 0, data_dir: str | Path | None = None,
                 cache_capacity: int = 8, budget: int = 100_000,
                 strict_local_hit: bool = False, proposal_lifetime: int = 100,
                 retry_budget: int = 3, invocation_cap: int = 4,
                 sync_on_mutation: bool = True):
        self.seed = seed
        self.data_dir = Path(data_dir) if data_dir else None
        if self.data_dir:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        self.proposal_lifetime = proposal_lifetime
        self.retry_budget = retry_budget
        self.invocation_cap = invocation_cap
        self.sync_on_mutation = sync_on_mutation

        self.bus = MessageBus(budget=budget)
        self.ontologies: dict[str, OntologyGraph] = {}
        self.mappings: list[ConceptMapping] = []
        self.central = CentralRegister(
            self.data_dir / "registry" if self.data_dir else None)
        self.accounts = AccountStore(
            self.data_dir / "accounts.jnl" if self.data_dir else None,
            rng=random.Random(seed ^ 0x5EED))

        self.sessions: dict[str, Session] = {}
        self.conversations: dict[str, dict] = {}
        self.requests: dict[str, RequestState] = {}
        self.negotiations: dict[str, NegotiationState] = {}
        self.contracts: dict[str, Contract] = {}
        self.contract_meta: dict[str, dict] = {}
        self.invocations: dict[str, dict] = {}
        self.broker_reports: dict[str, list[dict]] = {}
        self.service_behaviors: dict[str, str] = {}
        self.service_owner: dict[str, str] = {}
        self.provider_load: dict[str, int] = {}
        self._policies: dict[str, NegotiationPolicy] = {}
        self._models: dict[str, UtilityModel] = {}
        self._counters: dict[str, int] = {}

        self.admin = AdministratorAgent(self)
        self.discovery = DiscoveryAgent(
            self, cache_capacity,
            self.data_dir / "history.jnl" if self.data_dir else None,
            strict_local_hit=strict_local_hit)
        self.selection = SelectionAgent(self)
        self.broker = BrokerAgent(self)
        for agent in (self.admin, self.discovery, self.selection, self.broker):
            self.bus.spawn_agent(agent)
        self.bus.register_endpoint("central-register",
                                   make_register_endpoint(self))
        self._restore_service_agents()

    # -- plumbing ------------------------------------------------------------

    def _next_id(self, prefix: str) -> str:
        self._counters[prefix] = self._counters.get(prefix, 0) + 1
        return f"{prefix}-{self._counters[prefix]:06d}"

    def run(self):
        return self.bus.run_until_idle(self.seed)

    def _finish(self, conversation_id: str) -> dict:
        self.run()
        outcome = self.conversations.pop(conversation_id, None)
        if outcome is None:
            raise PlatformError(
                f"conversation {conversation_id!r} produced no outcome")
        if "error" in outcome:
            _raise_for(outcome["error"])
        return outcome

    def _restore_service_agents(self) -> None:
        for sid, desc in sorted(self.central.services.items()):
            self.service_owner[sid] = desc.provider_id
            self.bus.spawn_agent(ServiceAgent(self, sid, desc.provider_id))

    # -- warehouses -----------------------------------------------------------

    def add_ontology(self, graph: OntologyGraph) -> None:
        self.ontologies[graph.ontology_id] = graph

    def load_ontology_file(self, path: str | Path) -> OntologyGraph:
        graph = load_ontology(Path(path).read_bytes())
        self.add_ontology(graph)
        return graph

    def add_mapping(self, mapping: ConceptMapping) -> None:
        self.mappings.append(mapping)

    def load_mapping_file(self, path: str | Path) -> ConceptMapping:
        mapping = load_mapping(Path(path).read_bytes())
        self.add_mapping(mapping)
        return mapping

    def find_mapping(self, source: str, target: str) -> ConceptMapping | None:
        for m in self.mappings:
            if m.source_ontology == source and m.target_ontology == target:
                return m
        return None

    def set_policy(self, login: str, policy: NegotiationPolicy,
                   model: UtilityModel | None = None) -> None:
        self._policies[login] = policy
        if model is not None:
            self._models[login] = model

    def load_policy_file(self, login: str, path: str | Path) -> None:
        graph = load_ontology(Path(path).read_bytes())
        rules = list(graph.rules)
        policy = policy_from_rules(rules)
        try:
            model = utility_model_from_rules(rules)
        except InvalidPolicyError:
            model = None
        self.set_policy(login, policy, model)

    def provider_policy(self, login: str) -> NegotiationPolicy:
        policy = self._policies.get(login)
        if policy is None:
            raise InvalidPolicyError(f"no negotiation policy for {login!r}")
        return policy

    def customer_policy(self, login: str) -> NegotiationPolicy:
        return self.provider_policy(login)

    def customer_model(self, login: str,
                       query: ServiceQuery | None = None) -> UtilityModel:
        if query is not None and query.preferences is not None:
            return query.preferences
        model = self._models.get(login)
        if model is None:
            raise InvalidPolicyError(f"no utility model for {login!r}")
        return model

    # -- agents & sessions ----------------------------------------------------

    def _assistant_id(self, login: str, role: str) -> str:
        return f"{role}-agent-{login}"

    def ensure_assistant(self, login: str, role: str) -> tuple[str, bool]:
        """Idempotent spawn of the account's assistant; returns (id, created)."""
        agent_id = self._assistant_id(login, role)
        if agent_id in self.bus.agents:
            return agent_id, False
        account = self.accounts.by_login.get(login)
        cls = CustomerAgent if role == "customer" else ProviderAgent
        self.bus.spawn_agent(cls(self, login, account))
        return agent_id, True

    def _open_session(self, account: Account) -> Session:
        for sid, sess in list(self.sessions.items()):
            if sess.account_id == account.account_id:
                del self.sessions[sid]  # one live session per account
        session = Session(self._next_id("sess"), account.account_id,
                          self.bus.clock)
        self.sessions[session.session_id] = session
        return session

    def _require_session(self, session_id: str,
                         role: str | None = None) -> Account:
        session = self.sessions.get(session_id)
        if session is None:
            raise InvalidSessionError(f"no live session {session_id!r}")
        account = self.accounts._by_id(session.account_id)
        if role is not None and account.role != role:
            if role == "customer":
                raise NotACustomerError(
                    f"{account.login!r} is not a customer")
            raise NotAProviderError(f"{account.login!r} is not a provider")
        return account

    # -- user management --------------------------------------------------------

    def authenticate(self, login: str, password: str, role: str) -> Session:
        agent_id, created = self.ensure_assistant(login, role)
        conv = self._next_id("conv")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "admin", conv,
            Payload("account-event", {"action": "login", "login": login,
                                      "password": password, "role": role})))
        try:
            outcome = self._finish(conv)
        except UnknownUserError:
            raise  # assistant persists: the registration path reuses it
        return self.sessions[outcome["session-id"]]

    def register_account(self, login: str, password: str, role: str,
                         profile: dict[str, str] | None = None) -> str:
        agent_id, created = self.ensure_assistant(login, role)
        conv = self._next_id("conv")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "admin", conv,
            Payload("account-event", {"action": "register", "login": login,
                                      "password": password, "role": role,
                                      "profile": profile or {}})))
        try:
            outcome = self._finish(conv)
        except DuplicateLoginError:
            if created:
                self.bus.remove_agent(agent_id)
            raise
        return outcome["account-id"]

    # -- provider operations ---------------------------------------------------

    def publish_service(self, session_id: str,
                        desc: ServiceDescription) -> str:
        account = self._require_session(session_id, "provider")
        desc.provider_id = account.login
        agent_id = self._assistant_id(account.login, "provider")
        conv = self._next_id("conv")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "central-register", conv,
            Payload("query", {"action": "publish", "description": desc})))
        outcome = self._finish(conv)
        service_id = outcome["service-id"]
        self.service_owner[service_id] = account.login
        service_agent = f"service-agent-{service_id}"
        if service_agent not in self.bus.agents:
            self.bus.spawn_agent(ServiceAgent(self, service_id, account.login))
        if self.sync_on_mutation:
            self.sync_registers()
        return service_id

    def delete_service(self, session_id: str, service_id: str) -> None:
        account = self._require_session(session_id, "provider")
        desc = self.central.services.get(service_id)
        if desc is None or desc.provider_id != account.login:
            raise ValidationError(
                f"{account.login!r} does not own service {service_id!r}")
        self.central.delete(service_id)
        self.bus.remove_agent(f"service-agent-{service_id}")
        if self.sync_on_mutation:
            self.sync_registers()

    # -- coherence --------------------------------------------------------------

    def sync_registers(self):
        conv = self._next_id("conv")
        self.bus.send(AclMessage(
            runtime.REQUEST, "admin", "discovery", conv,
            Payload("account-event", {"action": "sync"})))
        return self._finish(conv)["report"]

    # -- customer operations -----------------------------------------------------

    def submit_request(self, session_id: str, query: ServiceQuery) -> str:
        account = self._require_session(session_id, "customer")
        query.validate()
        query.requester = account.login
        request_id = self._next_id("req")
        query.query_id = query.query_id or request_id
        self.requests[request_id] = RequestState(
            request_id=request_id, customer_login=account.login, query=query)
        agent_id = self._assistant_id(account.login, "customer")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "discovery", request_id,
            Payload("query", {"query": query}),
            ontology_id=query.ontology_id))
        outcome = self._finish(request_id)
        self.requests[request_id].result = outcome["result"]
        return request_id

    def get_result(self, request_id: str) -> DiscoveryResult:
        state = self.requests.get(request_id)
        if state is None or state.result is None:
            raise InvalidQueryError(f"no result for request {request_id!r}")
        return state.result

    def request_proposals(self, session_id: str,
                          request_id: str) -> list[tuple[Proposal, float]]:
        account = self._require_session(session_id, "customer")
        state = self.requests[request_id]
        if state.ranked is not None:
            return state.ranked
        result = self.get_result(request_id)
        if not result.results:
            state.ranked = []
            return []
        model = self.customer_model(account.login, state.query)
        agent_id = self._assistant_id(account.login, "customer")
        conv = self._next_id("cfp")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "selection", conv,
            Payload("query", {"action": "proposals",
                              "request-id": request_id,
                              "matches": result.results,
                              "model": model})))
        outcome = self._finish(conv)
        state.ranked = outcome["ranked"]
        return state.ranked

    def choose_service(self, session_id: str, request_id: str,
                       service_id: str, mode: str = "auto") -> str:
        account = self._require_session(session_id, "customer")
        state = self.requests[request_id]
        if state.ranked is None:
            self.request_proposals(session_id, request_id)
        chosen = next((p for p, _ in state.ranked
                       if p.service_id == service_id), None)
        if chosen is None:
            raise InvalidQueryError(
                f"service {service_id!r} not in the ranked list")
        model = self.customer_model(account.login, state.query)
        session = NegotiationSession(
            self.customer_policy(account.login),
            self.provider_policy(chosen.provider_id),
            model, chosen)
        nid = self._next_id("neg")
        conv = f"negotiation-{nid}"
        self.negotiations[nid] = NegotiationState(
            negotiation_id=nid, request_id=request_id,
            customer_login=account.login, provider_login=chosen.provider_id,
            service_id=service_id, session=session,
            conversation_id=conv, mode=mode)
        state.negotiation_ids.append(nid)
        agent_id = self._assistant_id(account.login, "customer")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id, "selection", conv,
            Payload("proposal", {"action": "connect",
                                 "negotiation-id": nid})))
        self.run()
        return nid

    # -- negotiation --------------------------------------------------------------

    def negotiate_auto(self, negotiation_id: str) -> dict:
        """Outcome of an auto-mode negotiation started by choose_service."""
        state = self.negotiations[negotiation_id]
        outcome = self.conversations.pop(state.conversation_id, None)
        if outcome is None:
            raise PlatformError(
                f"negotiation {negotiation_id!r} still open")
        return outcome

    def negotiation_view(self, negotiation_id: str) -> dict:
        state = self.negotiations[negotiation_id]
        session = state.session
        return {
            "negotiation-id": negotiation_id,
            "state": session.state,
            "round": session.round,
            "max-rounds": session.max_rounds,
            "provider-offer": dict(session.provider_offer),
            "customer-offer": dict(session.customer_offer or {}),
            "transcript": [
                {"side": side, "round": rnd, "offer": offer}
                for side, rnd, offer in session.transcript],
            "contract-id": state.contract_id,
            "service-id": state.service_id,
        }

    def negotiation_step(self, negotiation_id: str,
                         values: dict[str, float] | None = None) -> dict:
        """Manual mode: one customer counter (policy-driven or explicit),
        then the provider's automatic response."""
        state = self.negotiations[negotiation_id]
        session = state.session
        if session.state != "open":
            return self.negotiation_view(negotiation_id)
        if values is None:
            # policy-driven step: apply the customer acceptance rule first,
            # exactly as the automatic mode does
            if session.customer_would_accept():
                self.negotiation_accept(negotiation_id)
                return self.negotiation_view(negotiation_id)
            offer = session.customer_counter()
        else:
            offer = session.customer_counter_explicit(values)
        agent_id = self._assistant_id(state.customer_login, "customer")
        if offer is None:
            self.bus.send(AclMessage(
                runtime.REJECT_PROPOSAL, agent_id, state.service_agent_id,
                state.conversation_id,
                Payload("proposal", {"negotiation-id": negotiation_id,
                                     "reason": "no-agreement"})))
        else:
            self.bus.send(AclMessage(
                runtime.PROPOSE, agent_id, state.service_agent_id,
                state.conversation_id,
                Payload("proposal", {"negotiation-id": negotiation_id,
                                     "offer": offer,
                                     "round": session.round})))
        self.run()
        self.conversations.pop(state.conversation_id, None)
        return self.negotiation_view(negotiation_id)

    def negotiation_accept(self, negotiation_id: str) -> Contract:
        state = self.negotiations[negotiation_id]
        agent_id = self._assistant_id(state.customer_login, "customer")
        self.bus.send(AclMessage(
            runtime.ACCEPT_PROPOSAL, agent_id, state.service_agent_id,
            state.conversation_id,
            Payload("proposal", {"negotiation-id": negotiation_id,
                                 "offer": dict(state.session.provider_offer)})))
        outcome = self._finish(state.conversation_id)
        return outcome["contract"]

    def negotiation_reject(self, negotiation_id: str) -> None:
        state = self.negotiations[negotiation_id]
        agent_id = self._assistant_id(state.customer_login, "customer")
        self.bus.send(AclMessage(
            runtime.REJECT_PROPOSAL, agent_id, state.service_agent_id,
            state.conversation_id,
            Payload("proposal", {"negotiation-id": negotiation_id,
                                 "reason": "walk-away"})))
        self.run()
        self.conversations.pop(state.conversation_id, None)

    def _conclude_contract(self, state: NegotiationState) -> Contract:
        session = state.session
        contract = Contract(
            contract_id=self._next_id("ctr"),
            customer_account=state.customer_login,
            provider_account=state.provider_login,
            service_id=state.service_id,
            agreed_attributes=dict(session.agreed_attributes),
            concluded_at=self.bus.clock,
            negotiation_rounds=session.round,
        )
        state.contract_id = contract.contract_id
        self._store_contract(contract, state.request_id, state.negotiation_id)
        return contract

    def _store_contract(self, contract: Contract, request_id: str | None,
                        negotiation_id: str | None) -> None:
        self.contracts[contract.contract_id] = contract
        self.contract_meta[contract.contract_id] = {
            "request-id": request_id, "negotiation-id": negotiation_id}
        if self.data_dir:
            cdir = self.data_dir / "contracts"
            cdir.mkdir(parents=True, exist_ok=True)
            (cdir / f"{contract.contract_id}.ctr").write_text(
                contract.serialize(), encoding="utf-8")

    def _contract_for_service(self, request_id: str | None, customer: str,
                              proposal: Proposal) -> Contract | None:
        """Existing contract for this request+service, or a fresh one from
        an automated negotiation (the broker's fail-over path)."""
        for cid, meta in self.contract_meta.items():
            contract = self.contracts[cid]
            if (meta.get("request-id") == request_id
                    and contract.service_id == proposal.service_id
                    and contract.customer_account == customer):
                return contract
        request = self.requests.get(request_id) if request_id else None
        model = self.customer_model(
            customer, request.query if request else None)
        outcome = negotiate(
            self.customer_policy(customer),
            self.provider_policy(proposal.provider_id),
            model, proposal, now=self.bus.clock)
        if not outcome.agreed:
            return None
        contract = Contract(
            contract_id=self._next_id("ctr"),
            customer_account=customer,
            provider_account=proposal.provider_id,
            service_id=proposal.service_id,
            agreed_attributes=dict(outcome.attributes),
            concluded_at=self.bus.clock,
            negotiation_rounds=outcome.rounds,
        )
        self._store_contract(contract, request_id, None)
        return contract

    # -- invocation -----------------------------------------------------------------

    def invoke(self, session_id: str, contract_id: str,
               inputs: dict[str, tuple[str, object]],
               inputs_ontology: str | None = None) -> tuple[dict, list[dict]]:
        """Run the contracted service; returns (result, broker report)."""
        account = self._require_session(session_id, "customer")
        contract = self.contracts[contract_id]
        conv = self._next_id("inv")
        desc = self.central.services[contract.service_id]
        inputs_ontology = inputs_ontology or desc.ontology_id
        self.invocations[conv] = {
            "contract-id": contract_id,
            "inputs": inputs,
            "inputs-ontology": inputs_ontology,
        }
        agent_id = self._assistant_id(account.login, "customer")
        self.bus.send(AclMessage(
            runtime.REQUEST, agent_id,
            f"service-agent-{contract.service_id}", conv,
            Payload("query", {"action": "invoke", "contract-id": contract_id,
                              "inputs": inputs,
                              "inputs-ontology": inputs_ontology})))
        outcome = self._finish(conv)
        return outcome, self.broker_reports.get(conv, [])

    # -- introspection -----------------------------------------------------------

    def agent_ids(self) -> list[str]:
        return sorted(self.bus.agents)

    def trace(self):
        return self.bus.trace
