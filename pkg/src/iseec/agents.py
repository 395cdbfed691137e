"""Administrator, assistant, service, selection and broker agents.

Handlers only react to messages; synchronous callers (the platform
facade, the gateway) inject a first message, run the bus to idle and read
the outcome off the platform's conversation blackboard.
"""

from __future__ import annotations

from . import runtime
from .accounts import Account
from .errors import (
    AllProposalsFailedError,
    DuplicateLoginError,
    NoMappingError,
    UnbindableParameterError,
    UnknownUserError,
    WrongCredentialsError,
)
from .negotiation import (
    Proposal,
    bind_parameters,
    negotiate,
    opening_offer,
    rank_services,
)
from .ontology import translate_concept
from .runtime import AclMessage, Agent, AgentSpec, Payload


def _error_payload(code: str, message: str) -> Payload:
    return Payload("error", {"code": code, "message": message})


class AdministratorAgent(Agent):
    """Account management, authentication, register coherence."""

    def __init__(self, platform):
        super().__init__(AgentSpec("admin", "administrator"))
        self.platform = platform

    def handle(self, msg: AclMessage) -> None:
        data = msg.content.data
        if msg.performative == runtime.REQUEST and msg.content.kind == "account-event":
            action = data.get("action")
            if action == "login":
                self._login(msg)
            elif action == "register":
                self._register(msg)
        elif (msg.performative == runtime.INFORM
              and msg.content.kind == "account-event"
              and data.get("action") == "sync-report"):
            self.platform.conversations[msg.conversation_id] = {
                "report": data["report"]}

    def _reply(self, msg: AclMessage, payload: Payload) -> None:
        self.platform.bus.send(AclMessage(
            runtime.INFORM, self.agent_id, msg.sender,
            msg.conversation_id, payload))

    def _login(self, msg: AclMessage) -> None:
        data = msg.content.data
        try:
            account = self.platform.accounts.verify(
                data["login"], data["password"], data["role"])
        except UnknownUserError as exc:
            self._reply(msg, _error_payload(exc.code, str(exc)))
            return
        except WrongCredentialsError as exc:
            self._reply(msg, _error_payload(
                exc.code, "the seized data are erroneous"))
            return
        account.agent_id = msg.sender
        session = self.platform._open_session(account)
        self._reply(msg, Payload("account-event", {
            "action": "access-granted",
            "session-id": session.session_id,
            "account-id": account.account_id,
        }))

    def _register(self, msg: AclMessage) -> None:
        data = msg.content.data
        try:
            account = self.platform.accounts.create(
                data["login"], data["password"], data["role"],
                data.get("profile"))
        except DuplicateLoginError as exc:
            self._reply(msg, _error_payload(exc.code, str(exc)))
            return
        account.agent_id = msg.sender
        self._reply(msg, Payload("account-event", {
            "action": "registered",
            "account-id": account.account_id,
        }))


class AssistantAgent(Agent):
    """Shared behaviour of the customer and provider assistants: relay
    administrator/registry outcomes onto the conversation blackboard."""

    def __init__(self, platform, agent_id: str, role: str,
                 owner_account: str | None = None):
        super().__init__(AgentSpec(agent_id, role, owner_account))
        self.platform = platform

    def _record(self, conv: str, outcome: dict) -> None:
        self.platform.conversations[conv] = outcome

    def handle(self, msg: AclMessage) -> None:
        if msg.performative == runtime.INFORM:
            if msg.content.kind == "error":
                self._record(msg.conversation_id, {"error": msg.content.data})
            elif msg.content.kind == "account-event":
                self._record(msg.conversation_id, dict(msg.content.data))
            elif msg.content.kind == "result":
                self._record(msg.conversation_id, dict(msg.content.data))


class ProviderAgent(AssistantAgent):
    def __init__(self, platform, login: str, account: Account | None = None):
        super().__init__(platform, f"provider-agent-{login}", "provider",
                         account.account_id if account else None)


class CustomerAgent(AssistantAgent):
    """Entry of requests, display of results, negotiation counterpart."""

    def __init__(self, platform, login: str, account: Account | None = None):
        super().__init__(platform, f"customer-agent-{login}", "customer",
                         account.account_id if account else None)

    def handle(self, msg: AclMessage) -> None:
        data = msg.content.data
        if msg.performative == runtime.INFORM and msg.content.kind == "match-list":
            if "result" in data:  # discovery outcome
                self._record(msg.conversation_id, {"result": data["result"]})
            elif "ranked" in data:  # ranked proposals from selection
                self._record(msg.conversation_id, {"ranked": data["ranked"]})
            return
        if (msg.performative == runtime.INFORM and msg.content.kind == "proposal"
                and data.get("action") == "connected"):
            state = self.platform.negotiations[data["negotiation-id"]]
            if state.mode == "auto":
                self._drive(state)
            return
        if msg.performative == runtime.PROPOSE:
            state = self.platform.negotiations[data["negotiation-id"]]
            if state.mode == "auto":
                self._drive(state)
            return
        if msg.performative == runtime.AGREE:
            state = self.platform.negotiations[data["negotiation-id"]]
            self._record(state.conversation_id,
                         {"contract": data["contract"]})
            return
        if msg.performative == runtime.REJECT_PROPOSAL:
            state = self.platform.negotiations[data["negotiation-id"]]
            self._record(state.conversation_id,
                         {"no-agreement": state.session.outcome()})
            return
        if msg.performative == runtime.FAILURE:
            self._on_invocation_failure(msg)
            return
        super().handle(msg)

    # -- negotiation --------------------------------------------------------

    def _drive(self, state) -> None:
        """One customer decision in automatic mode."""
        bus = self.platform.bus
        session = state.session
        peer = state.service_agent_id
        if session.customer_would_accept():
            bus.send(AclMessage(
                runtime.ACCEPT_PROPOSAL, self.agent_id, peer,
                state.conversation_id,
                Payload("proposal", {"negotiation-id": state.negotiation_id,
                                     "offer": dict(session.provider_offer)})))
            return
        offer = session.customer_counter()
        if offer is None:
            bus.send(AclMessage(
                runtime.REJECT_PROPOSAL, self.agent_id, peer,
                state.conversation_id,
                Payload("proposal", {"negotiation-id": state.negotiation_id,
                                     "reason": "no-agreement"})))
            self._record(state.conversation_id,
                         {"no-agreement": session.outcome()})
            return
        bus.send(AclMessage(
            runtime.PROPOSE, self.agent_id, peer, state.conversation_id,
            Payload("proposal", {"negotiation-id": state.negotiation_id,
                                 "offer": offer, "round": session.round})))

    # -- invocation ---------------------------------------------------------

    _RETRYABLE = {"execution-failure", "provider-busy", "timeout"}

    def _on_invocation_failure(self, msg: AclMessage) -> None:
        conv = msg.conversation_id
        context = self.platform.invocations.get(conv)
        retryable = msg.content.data.get("code") in self._RETRYABLE
        if context is None or not retryable:
            self._record(conv, {"error": msg.content.data})
            return
        # delegate the stuck goal to the broker
        self.platform.bus.send(AclMessage(
            runtime.REQUEST, self.agent_id, "broker", conv,
            Payload("query", {
                "action": "mediate",
                "contract-id": context["contract-id"],
                "inputs": context["inputs"],
                "inputs-ontology": context["inputs-ontology"],
                "failed": msg.content.data,
            })))


class ServiceAgent(Agent):
    """One representative per published service: proposals, negotiation
    rounds, contract conclusion, invocation."""

    def __init__(self, platform, service_id: str, owner_login: str):
        super().__init__(AgentSpec(f"service-agent-{service_id}", "service",
                                   owner_login))
        self.platform = platform
        self.service_id = service_id
        self.owner_login = owner_login
        self._failures_seen = 0

    def handle(self, msg: AclMessage) -> None:
        if msg.performative == runtime.CFP:
            self._on_cfp(msg)
        elif msg.performative == runtime.PROPOSE:
            self._on_counter(msg)
        elif msg.performative == runtime.ACCEPT_PROPOSAL:
            self._on_accept(msg)
        elif msg.performative == runtime.REJECT_PROPOSAL:
            state = self.platform.negotiations[msg.content.data["negotiation-id"]]
            state.session.state = "failed"
        elif (msg.performative == runtime.REQUEST
              and msg.content.data.get("action") == "invoke"):
            self._on_invoke(msg)

    # -- CFP round ----------------------------------------------------------

    def _on_cfp(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        behavior = self.platform.service_behaviors.get(self.service_id)
        if behavior == "mute":
            # represents a missed reply deadline: recorded as FAILURE
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, msg.sender, msg.conversation_id,
                _error_payload("timeout", "no proposal before deadline")))
            return
        desc = self.platform.central.services[self.service_id]
        policy = self.platform.provider_policy(self.owner_login)
        model = msg.content.data["model"]
        offer = opening_offer(desc.attributes, policy, model)
        proposal = Proposal(
            proposal_id=self.platform._next_id("prop"),
            service_id=self.service_id,
            offered_attributes=offer,
            valid_until=bus.clock + self.platform.proposal_lifetime,
            round=0,
            provider_id=self.owner_login,
        )
        bus.send(AclMessage(
            runtime.PROPOSE, self.agent_id, msg.sender, msg.conversation_id,
            Payload("proposal", {"proposal": proposal})))

    # -- negotiation rounds --------------------------------------------------

    def _on_counter(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        state = self.platform.negotiations[msg.content.data["negotiation-id"]]
        response = state.session.provider_respond()
        if response == "accept":
            contract = self.platform._conclude_contract(state)
            bus.send(AclMessage(
                runtime.AGREE, self.agent_id, msg.sender, msg.conversation_id,
                Payload("contract", {"negotiation-id": state.negotiation_id,
                                     "contract": contract})))
        elif response == "counter":
            bus.send(AclMessage(
                runtime.PROPOSE, self.agent_id, msg.sender, msg.conversation_id,
                Payload("proposal", {"negotiation-id": state.negotiation_id,
                                     "offer": dict(state.session.provider_offer),
                                     "round": state.session.round})))
        else:
            bus.send(AclMessage(
                runtime.REJECT_PROPOSAL, self.agent_id, msg.sender,
                msg.conversation_id,
                Payload("proposal", {"negotiation-id": state.negotiation_id,
                                     "reason": "no-agreement"})))

    def _on_accept(self, msg: AclMessage) -> None:
        state = self.platform.negotiations[msg.content.data["negotiation-id"]]
        state.session.customer_accept()
        contract = self.platform._conclude_contract(state)
        self.platform.bus.send(AclMessage(
            runtime.AGREE, self.agent_id, msg.sender, msg.conversation_id,
            Payload("contract", {"negotiation-id": state.negotiation_id,
                                 "contract": contract})))

    # -- invocation ----------------------------------------------------------

    def _on_invoke(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        data = msg.content.data
        desc = self.platform.central.services[self.service_id]
        inputs_ontology = data.get("inputs-ontology") or desc.ontology_id

        if inputs_ontology != desc.ontology_id and not data.get("translated"):
            # semantic mismatch: delegate interoperability to the broker
            bus.send(AclMessage(
                runtime.REQUEST, self.agent_id, "broker", msg.conversation_id,
                Payload("query", {
                    "action": "translate",
                    "invoke": dict(data),
                    "reply-to": msg.sender,
                    "service-agent": self.agent_id,
                    "source-ontology": inputs_ontology,
                    "target-ontology": desc.ontology_id,
                })))
            return

        load = self.platform.provider_load.get(self.owner_login, 0)
        if load >= self.platform.invocation_cap:
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, msg.sender, msg.conversation_id,
                _error_payload("provider-busy",
                               f"provider {self.owner_login} at capacity")))
            return

        behavior = self.platform.service_behaviors.get(self.service_id, "ok")
        should_fail = behavior == "fail"
        if behavior.startswith("fail:"):
            should_fail = self._failures_seen < int(behavior.split(":", 1)[1])
        if should_fail:
            self._failures_seen += 1
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, msg.sender, msg.conversation_id,
                _error_payload("execution-failure",
                               f"service {self.service_id} failed")))
            return

        try:
            bindings = bind_parameters(
                desc.inputs, data["inputs"],
                self.platform.ontologies[desc.ontology_id])
        except UnbindableParameterError as exc:
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, msg.sender, msg.conversation_id,
                _error_payload(exc.code, str(exc))))
            return

        # stubbed service body: echo the bound inputs per output parameter
        outputs = {name: {sname: b[1] for sname, b in bindings.items()}
                   for name, _ in desc.outputs}
        bus.send(AclMessage(
            runtime.INFORM, self.agent_id, msg.sender, msg.conversation_id,
            Payload("result", {
                "service-id": self.service_id,
                "contract-id": data.get("contract-id"),
                "bindings": {k: {"parameter": v[0], "value": v[1],
                                 "degree": v[2].wire}
                             for k, v in bindings.items()},
                "outputs": outputs,
            })))


class SelectionAgent(Agent):
    """CFP fan-out, utility ranking, putting customer and provider agents
    in contact."""

    def __init__(self, platform):
        super().__init__(AgentSpec("selection", "selection"))
        self.platform = platform
        self._pending: dict[str, dict] = {}

    def handle(self, msg: AclMessage) -> None:
        data = msg.content.data
        if (msg.performative == runtime.REQUEST and msg.content.kind == "query"
                and data.get("action") == "proposals"):
            self._on_proposals_request(msg)
        elif msg.performative == runtime.PROPOSE:
            self._collect(msg, proposal=data["proposal"])
        elif msg.performative == runtime.FAILURE:
            self._collect(msg, failure=data)
        elif (msg.performative == runtime.REQUEST
              and msg.content.kind == "proposal"
              and data.get("action") == "connect"):
            state = self.platform.negotiations[data["negotiation-id"]]
            self.platform.bus.send(AclMessage(
                runtime.INFORM, self.agent_id, msg.sender, msg.conversation_id,
                Payload("proposal", {"action": "connected",
                                     "negotiation-id": state.negotiation_id})))

    def _on_proposals_request(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        data = msg.content.data
        matches = data["matches"]
        model = data["model"]
        conv = msg.conversation_id
        self._pending[conv] = {
            "requester": msg.sender,
            "model": model,
            "expected": len(matches),
            "proposals": [],
            "failures": [],
            "degrees": {m.service.service_id: m.degree for m in matches},
        }
        for m in matches:
            bus.send(AclMessage(
                runtime.CFP, self.agent_id,
                f"service-agent-{m.service.service_id}", conv,
                Payload("query", {"attributes": sorted(model.weights),
                                  "model": model})))

    def _collect(self, msg: AclMessage, proposal=None, failure=None) -> None:
        pending = self._pending.get(msg.conversation_id)
        if pending is None:
            return
        if proposal is not None:
            proposal.degree = pending["degrees"].get(
                proposal.service_id, proposal.degree)
            pending["proposals"].append(proposal)
        else:
            pending["failures"].append(failure)
        if len(pending["proposals"]) + len(pending["failures"]) < pending["expected"]:
            return
        del self._pending[msg.conversation_id]
        bus = self.platform.bus
        if not pending["proposals"]:
            err = AllProposalsFailedError("no service agent proposed")
            bus.send(AclMessage(
                runtime.INFORM, self.agent_id, pending["requester"],
                msg.conversation_id, _error_payload(err.code, str(err))))
            return
        ranked = rank_services(pending["proposals"], pending["model"])
        bus.send(AclMessage(
            runtime.INFORM, self.agent_id, pending["requester"],
            msg.conversation_id, Payload("match-list", {"ranked": ranked})))


class BrokerAgent(Agent):
    """Monitoring, fail-over across the ranked list, concept translation."""

    def __init__(self, platform):
        super().__init__(AgentSpec("broker", "broker"))
        self.platform = platform
        self._mediations: dict[str, dict] = {}

    def report(self, conversation_id: str) -> list[dict]:
        return self.platform.broker_reports.get(conversation_id, [])

    def _note(self, conv: str, action: dict) -> None:
        self.platform.broker_reports.setdefault(conv, []).append(action)

    def handle(self, msg: AclMessage) -> None:
        data = msg.content.data
        if msg.performative == runtime.REQUEST:
            if data.get("action") == "translate":
                self._on_translate(msg)
            elif data.get("action") == "mediate":
                self._on_mediate(msg)
        elif msg.performative == runtime.INFORM and msg.content.kind == "result":
            self._on_retry_result(msg)
        elif msg.performative == runtime.FAILURE:
            self._on_retry_failure(msg)

    # -- translation ---------------------------------------------------------

    def _on_translate(self, msg: AclMessage) -> None:
        bus = self.platform.bus
        data = msg.content.data
        conv = msg.conversation_id
        mapping = self.platform.find_mapping(
            data["source-ontology"], data["target-ontology"])
        invoke = dict(data["invoke"])
        if mapping is None:
            self._note(conv, {"action": "translation-failed",
                              "source": data["source-ontology"],
                              "target": data["target-ontology"]})
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, data["reply-to"], conv,
                _error_payload("no-mapping-error",
                               "no concept mapping configured")))
            return
        try:
            translated = {
                name: (translate_concept(mapping, concept), value)
                for name, (concept, value) in invoke["inputs"].items()}
        except NoMappingError as exc:
            self._note(conv, {"action": "translation-failed",
                              "detail": str(exc)})
            bus.send(AclMessage(
                runtime.FAILURE, self.agent_id, data["reply-to"], conv,
                _error_payload(exc.code, str(exc))))
            return
        self._note(conv, {"action": "translated",
                          "source": data["source-ontology"],
                          "target": data["target-ontology"]})
        invoke.update({
            "inputs": translated,
            "inputs-ontology": data["target-ontology"],
            "translated": True,
        })
        # re-issue the invocation on the original requester's behalf
        bus.send(AclMessage(
            runtime.REQUEST, data["reply-to"], data["service-agent"], conv,
            Payload("query", invoke)))

    # -- fail-over -----------------------------------------------------------

    def _on_mediate(self, msg: AclMessage) -> None:
        data = msg.content.data
        conv = msg.conversation_id
        contract = self.platform.contracts[data["contract-id"]]
        meta = self.platform.contract_meta.get(data["contract-id"], {})
        request = self.platform.requests.get(meta.get("request-id"))
        ranked = request.ranked if request else []
        alternatives = [p for p, _ in ranked
                        if p.service_id != contract.service_id]
        self._mediations[conv] = {
            "customer-agent": msg.sender,
            "customer": contract.customer_account,
            "request-id": meta.get("request-id"),
            "inputs": data["inputs"],
            "inputs-ontology": data["inputs-ontology"],
            "alternatives": alternatives,
            "retries": 0,
        }
        self._note(conv, {"action": "failure-observed",
                          "service-id": contract.service_id,
                          "detail": data.get("failed", {})})
        self._try_next(conv)

    def _try_next(self, conv: str) -> None:
        bus = self.platform.bus
        med = self._mediations[conv]
        while med["alternatives"] and med["retries"] < self.platform.retry_budget:
            candidate = med["alternatives"].pop(0)
            med["retries"] += 1
            contract = self.platform._contract_for_service(
                med["request-id"], med["customer"], candidate)
            if contract is None:
                self._note(conv, {"action": "negotiation-failed",
                                  "service-id": candidate.service_id})
                continue
            self._note(conv, {"action": "retry",
                              "service-id": candidate.service_id,
                              "contract-id": contract.contract_id})
            med["current-contract"] = contract.contract_id
            bus.send(AclMessage(
                runtime.REQUEST, self.agent_id,
                f"service-agent-{candidate.service_id}", conv,
                Payload("query", {
                    "action": "invoke",
                    "contract-id": contract.contract_id,
                    "inputs": med["inputs"],
                    "inputs-ontology": med["inputs-ontology"],
                })))
            return
        del self._mediations[conv]
        self._note(conv, {"action": "exhausted"})
        bus.send(AclMessage(
            runtime.INFORM, self.agent_id, med["customer-agent"], conv,
            _error_payload("exhausted-alternatives-error",
                           "no alternative service succeeded")))

    def _on_retry_result(self, msg: AclMessage) -> None:
        med = self._mediations.pop(msg.conversation_id, None)
        if med is None:
            return
        self._note(msg.conversation_id,
                   {"action": "recovered",
                    "service-id": msg.content.data.get("service-id")})
        self.platform.bus.send(AclMessage(
            runtime.INFORM, self.agent_id, med["customer-agent"],
            msg.conversation_id, Payload("result", dict(msg.content.data))))

    def _on_retry_failure(self, msg: AclMessage) -> None:
        if msg.conversation_id not in self._mediations:
            return
        self._note(msg.conversation_id,
                   {"action": "retry-failed", "detail": msg.content.data})
        self._try_next(msg.conversation_id)


def make_register_endpoint(platform):
    """The central register's communication interface (publication and
    discovery services); addressable on the bus but not an agent."""

    def handler(msg: AclMessage) -> None:
        bus = platform.bus
        data = msg.content.data
        action = data.get("action")
        if action == "discover":
            query = data["query"]
            graph = platform.ontologies.get(query.ontology_id)
            results = platform.central.discover(query, graph)
            bus.send(AclMessage(
                runtime.INFORM, "central-register", msg.sender,
                msg.conversation_id, Payload("match-list", {"results": results})))
        elif action in ("publish", "update"):
            desc = data["description"]
            try:
                existing = platform.central.find_by_name(
                    desc.provider_id, desc.name)
                if existing is not None or action == "update":
                    service_id = platform.central.update(
                        desc, platform.ontologies)
                    updated = True
                else:
                    service_id = platform.central.publish(
                        desc, platform.ontologies)
                    updated = False
            except Exception as exc:  # relay domain errors to the caller
                code = getattr(exc, "code", "registry-error")
                bus.send(AclMessage(
                    runtime.INFORM, "central-register", msg.sender,
                    msg.conversation_id, _error_payload(code, str(exc))))
                return
            bus.send(AclMessage(
                runtime.INFORM, "central-register", msg.sender,
                msg.conversation_id,
                Payload("result", {"service-id": service_id,
                                   "updated": updated})))

    return handler
