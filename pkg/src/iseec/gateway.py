"""Wire gateway: newline-delimited JSON requests over a plain socket.

One JSON object per line, one request per response.  Every request maps
onto exactly one platform facade operation, so the wire path and the
in-process path produce identical contracts under the same seed.  The
request and response schemas are documented in PROTOCOL.md.
"""

from __future__ import annotations

import json
import socketserver
import threading

from .errors import MalformedRequestError, PlatformError
from .negotiation import Contract, Proposal
from .platform import Platform
from .registry import ServiceDescription, ServiceQuery

PROTOCOL_VERSION = 1


# -- serialization helpers ----------------------------------------------------

def service_to_wire(desc: ServiceDescription) -> dict:
    return {
        "service-id": desc.service_id,
        "provider-id": desc.provider_id,
        "name": desc.name,
        "category": desc.category,
        "inputs": [[n, c] for n, c in desc.inputs],
        "outputs": [[n, c] for n, c in desc.outputs],
        "attributes": dict(desc.attributes),
        "ontology-id": desc.ontology_id,
    }


def service_from_wire(data: dict) -> ServiceDescription:
    return ServiceDescription(
        service_id=data.get("service-id", ""),
        provider_id=data.get("provider-id", ""),
        name=data["name"],
        category=data["category"],
        inputs=[tuple(p) for p in data.get("inputs", [])],
        outputs=[tuple(p) for p in data.get("outputs", [])],
        attributes=dict(data.get("attributes", {})),
        ontology_id=data["ontology-id"],
    )


def query_from_wire(data: dict) -> ServiceQuery:
    from .negotiation import UtilityModel
    preferences = None
    prefs = data.get("preferences")
    if prefs:
        preferences = UtilityModel(
            weights=dict(prefs["weights"]),
            directions=dict(prefs["directions"]),
            bounds={a: tuple(b) for a, b in prefs["bounds"].items()})
    return ServiceQuery(
        query_id=data.get("query-id", ""),
        requester=data.get("requester", ""),
        category=data["category"],
        required_outputs=list(data.get("required-outputs", [])),
        provided_inputs=list(data.get("provided-inputs", [])),
        ontology_id=data["ontology-id"],
        preferences=preferences,
    )


def proposal_to_wire(proposal: Proposal, score: float | None = None) -> dict:
    out = {
        "proposal-id": proposal.proposal_id,
        "service-id": proposal.service_id,
        "provider-id": proposal.provider_id,
        "offered-attributes": dict(proposal.offered_attributes),
        "valid-until": proposal.valid_until,
        "round": proposal.round,
        "degree": proposal.degree.wire if proposal.degree else None,
    }
    if score is not None:
        out["score"] = score
    return out


def contract_to_wire(contract: Contract) -> dict:
    return {
        "contract-id": contract.contract_id,
        "customer-account": contract.customer_account,
        "provider-account": contract.provider_account,
        "service-id": contract.service_id,
        "agreed-attributes": dict(contract.agreed_attributes),
        "concluded-at": contract.concluded_at,
        "negotiation-rounds": contract.negotiation_rounds,
    }


def result_row_to_wire(platform: Platform, match) -> dict:
    return {
        "service": service_to_wire(match.service),
        "degree": match.degree.wire,
        "component-degrees": [d.wire for d in match.component_degrees],
    }


class Gateway:
    """Transport-independent dispatcher over one platform instance.

    Requests are serialized through a lock: each one is injected into the
    agent runtime and run to idle before the next starts, so the
    deterministic trace guarantees carry over to the wire path.
    """

    def __init__(self, platform: Platform):
        self.platform = platform
        self._lock = threading.Lock()

    # -- envelope -------------------------------------------------------------

    def handle_line(self, line: str) -> str:
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise MalformedRequestError("request must be a JSON object")
        except (json.JSONDecodeError, MalformedRequestError):
            return json.dumps({"ok": False, "error": "malformed-request",
                               "message": "body is not a JSON object"},
                              sort_keys=True)
        return json.dumps(self.handle_request(request), sort_keys=True)

    def handle_request(self, request: dict) -> dict:
        op = request.get("op")
        handler = getattr(self, "_op_" + str(op).replace("-", "_"), None)
        if handler is None:
            return {"ok": False, "error": "malformed-request",
                    "message": f"unknown op {op!r}"}
        with self._lock:
            try:
                return {"ok": True, **handler(request)}
            except KeyError as exc:
                return {"ok": False, "error": "malformed-request",
                        "message": f"missing field {exc.args[0]!r}"}
            except PlatformError as exc:
                return {"ok": False, "error": exc.code, "message": str(exc)}

    # -- operations -----------------------------------------------------------

    def _op_protocol(self, request: dict) -> dict:
        return {"version": PROTOCOL_VERSION}

    def _op_authenticate(self, request: dict) -> dict:
        session = self.platform.authenticate(
            request["login"], request["password"], request["role"])
        return {"session-id": session.session_id,
                "account-id": session.account_id}

    def _op_register(self, request: dict) -> dict:
        account_id = self.platform.register_account(
            request["login"], request["password"], request["role"],
            request.get("profile"))
        return {"account-id": account_id}

    def _op_publish(self, request: dict) -> dict:
        desc = service_from_wire(request["service"])
        service_id = self.platform.publish_service(
            request["session-id"], desc)
        return {"service-id": service_id}

    def _op_submit_request(self, request: dict) -> dict:
        query = query_from_wire(request["query"])
        request_id = self.platform.submit_request(
            request["session-id"], query)
        result = self.platform.get_result(request_id)
        return {"request-id": request_id, "source": result.source,
                "hops": result.hops}

    def _op_list_results(self, request: dict) -> dict:
        result = self.platform.get_result(request["request-id"])
        return {"source": result.source, "hops": result.hops,
                "results": [result_row_to_wire(self.platform, m)
                            for m in result.results]}

    def _op_list_proposals(self, request: dict) -> dict:
        ranked = self.platform.request_proposals(
            request["session-id"], request["request-id"])
        return {"ranked": [proposal_to_wire(p, score)
                           for p, score in ranked]}

    def _op_choose_service(self, request: dict) -> dict:
        nid = self.platform.choose_service(
            request["session-id"], request["request-id"],
            request["service-id"], mode=request.get("mode", "manual"))
        view = self.platform.negotiation_view(nid)
        if view["state"] == "open" or request.get("mode") == "manual":
            return {"negotiation-id": nid, "negotiation": view}
        outcome = self.platform.negotiate_auto(nid)
        view = self.platform.negotiation_view(nid)
        payload = {"negotiation-id": nid, "negotiation": view}
        if "contract" in outcome:
            payload["contract"] = contract_to_wire(outcome["contract"])
        return payload

    def _op_negotiation_status(self, request: dict) -> dict:
        view = self.platform.negotiation_view(request["negotiation-id"])
        return {"negotiation": view}

    def _op_negotiate_step(self, request: dict) -> dict:
        view = self.platform.negotiation_step(
            request["negotiation-id"], request.get("values"))
        payload = {"negotiation": view}
        if view["contract-id"]:
            payload["contract"] = contract_to_wire(
                self.platform.contracts[view["contract-id"]])
        return payload

    def _op_accept(self, request: dict) -> dict:
        contract = self.platform.negotiation_accept(
            request["negotiation-id"])
        return {"contract": contract_to_wire(contract)}

    def _op_reject(self, request: dict) -> dict:
        self.platform.negotiation_reject(request["negotiation-id"])
        return {"negotiation":
                self.platform.negotiation_view(request["negotiation-id"])}

    def _op_contract_status(self, request: dict) -> dict:
        contract = self.platform.contracts.get(request["contract-id"])
        if contract is None:
            return {"found": False}
        return {"found": True, "contract": contract_to_wire(contract)}


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        while True:
            line = self.rfile.readline()
            if not line:
                return
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            response = self.server.gateway.handle_line(text)
            self.wfile.write(response.encode("utf-8") + b"\n")
            self.wfile.flush()


class GatewayServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, gateway: Gateway, host: str = "127.0.0.1",
                 port: int = 0):
        super().__init__((host, port), _Handler)
        self.gateway = gateway

    @property
    def address(self) -> tuple[str, int]:
        return self.socket.getsockname()


def serve(platform: Platform, host: str = "127.0.0.1",
          port: int = 7410) -> GatewayServer:
    """Bind and return the server; the caller runs serve_forever()."""
    return GatewayServer(Gateway(platform), host, port)
