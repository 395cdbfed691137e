"""Utility scoring, proposal ranking and the bilateral negotiation protocol.

The protocol is alternating offers driven by rules loaded from the
negotiation ontology: each side concedes a fixed step per attribute per
round toward the opponent's last offer, never crossing its own
reservation bound, and accepts as soon as the standing offer scores at or
above its acceptance threshold (and sits inside its own reservation
intervals, so every contract honours both parties' reservations).
The provider side scores offers with the customer's model direction-flipped;
the two utilities therefore sum to 1, which guarantees an agreement
whenever the reservation intervals overlap at a mutually acceptable point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import (
    ExpiredProposalError,
    InvalidPolicyError,
    MissingAttributeError,
    UnbindableParameterError,
)
from .ontology import MatchDegree, OntologyGraph, Rule, match_degree

DEFAULT_PROPOSAL_LIFETIME = 100  # ticks


@dataclass(frozen=True)
class UtilityModel:
    """Weighted min-max-normalized linear preferences."""

    weights: dict[str, float]
    directions: dict[str, str]  # attribute -> "benefit" | "cost"
    bounds: dict[str, tuple[float, float]]

    def __post_init__(self):
        if not self.weights:
            raise InvalidPolicyError("utility model needs at least one weight")
        total = sum(self.weights.values())
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise InvalidPolicyError(f"weights sum to {total}, expected 1")
        for attr, w in self.weights.items():
            if w < 0 or w > 1:
                raise InvalidPolicyError(f"weight for {attr!r} outside [0,1]")
            if self.directions.get(attr) not in ("benefit", "cost"):
                raise InvalidPolicyError(f"missing direction for {attr!r}")
            lo, hi = self.bounds.get(attr, (None, None))
            if lo is None or not lo < hi:
                raise InvalidPolicyError(f"bad bounds for {attr!r}")

    def flipped(self) -> "UtilityModel":
        """The opposing party's view: benefit and cost swapped."""
        return UtilityModel(
            weights=self.weights,
            directions={a: "cost" if d == "benefit" else "benefit"
                        for a, d in self.directions.items()},
            bounds=self.bounds,
        )


def score_utility(offer: dict[str, float], model: UtilityModel) -> float:
    """Score an offer in [0,1]; values are clamped to bounds first."""
    total = 0.0
    for attr, w in model.weights.items():
        if attr not in offer:
            raise MissingAttributeError(f"offer lacks attribute {attr!r}")
        lo, hi = model.bounds[attr]
        v = min(max(offer[attr], lo), hi)
        n = (v - lo) / (hi - lo)
        if model.directions[attr] == "cost":
            n = 1.0 - n
        total += w * n
    return total


@dataclass
class Proposal:
    proposal_id: str
    service_id: str
    offered_attributes: dict[str, float]
    valid_until: int
    round: int = 0
    provider_id: str = ""
    degree: MatchDegree = MatchDegree.EXACT


@dataclass
class Contract:
    contract_id: str
    customer_account: str
    provider_account: str
    service_id: str
    agreed_attributes: dict[str, float]
    concluded_at: int
    negotiation_rounds: int

    def serialize(self) -> str:
        lines = [
            f"contract-id: {self.contract_id}",
            f"customer-account: {self.customer_account}",
            f"provider-account: {self.provider_account}",
            f"service-id: {self.service_id}",
            f"concluded-at: {self.concluded_at}",
            f"negotiation-rounds: {self.negotiation_rounds}",
        ]
        for name in sorted(self.agreed_attributes):
            lines.append(f"attr.{name}: {self.agreed_attributes[name]:g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "Contract":
        fields: dict[str, str] = {}
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
                fields[key] = value
        return cls(
            contract_id=fields["contract-id"],
            customer_account=fields["customer-account"],
            provider_account=fields["provider-account"],
            service_id=fields["service-id"],
            agreed_attributes=attrs,
            concluded_at=int(fields["concluded-at"]),
            negotiation_rounds=int(fields["negotiation-rounds"]),
        )


@dataclass(frozen=True)
class NegotiationPolicy:
    reservation: dict[str, tuple[float, float]]
    concession_step: dict[str, float]
    acceptance_threshold: float
    max_rounds: int

    def __post_init__(self):
        if not 0 <= self.acceptance_threshold <= 1:
            raise InvalidPolicyError("acceptance threshold outside [0,1]")
        if self.max_rounds < 1:
            raise InvalidPolicyError("max-rounds must be >= 1")
        for attr, (lo, hi) in self.reservation.items():
            if lo > hi:
                raise InvalidPolicyError(f"reservation min > max for {attr!r}")
        for attr, step in self.concession_step.items():
            if step <= 0:
                raise InvalidPolicyError(f"concession step <= 0 for {attr!r}")


def policy_from_rules(rules: list[Rule]) -> NegotiationPolicy:
    """Build a policy from negotiation-ontology rule records."""
    reservation: dict[str, tuple[float, float]] = {}
    steps: dict[str, float] = {}
    threshold = 0.5
    max_rounds = 20
    for r in rules:
        if r.kind == "reservation":
            reservation[r.attribute] = (r.parameters["min"], r.parameters["max"])
        elif r.kind == "concession":
            steps[r.attribute] = r.parameters["step"]
            max_rounds = int(r.parameters.get("max-rounds", max_rounds))
        elif r.kind == "acceptance":
            threshold = r.parameters.get("threshold", threshold)
    if not reservation:
        raise InvalidPolicyError("no reservation rules found")
    return NegotiationPolicy(reservation, steps, threshold, max_rounds)


def utility_model_from_rules(rules: list[Rule]) -> UtilityModel:
    """Reservation rules may carry weight / benefit / norm-min / norm-max
    parameters describing the owner's utility model."""
    weights, directions, bounds = {}, {}, {}
    for r in rules:
        if r.kind != "reservation" or "weight" not in r.parameters:
            continue
        weights[r.attribute] = r.parameters["weight"]
        directions[r.attribute] = (
            "benefit" if r.parameters.get("benefit", 0) else "cost")
        bounds[r.attribute] = (r.parameters["norm-min"], r.parameters["norm-max"])
    return UtilityModel(weights, directions, bounds)


def best_value(attr: str, interval: tuple[float, float],
               model: UtilityModel, party: str) -> float:
    """The end of a reservation interval a party would open with.

    `model` is always the customer's view; the provider prefers the
    opposite end of every interval.
    """
    direction = model.directions.get(attr, "benefit")
    customer_best = interval[1] if direction == "benefit" else interval[0]
    provider_best = interval[0] if direction == "benefit" else interval[1]
    return customer_best if party == "customer" else provider_best


def opening_offer(advertised: dict[str, float], policy: NegotiationPolicy,
                  model: UtilityModel) -> dict[str, float]:
    """Provider's round-0 offer: provider-best reservation ends, advertised
    values for attributes the provider does not negotiate."""
    offer = dict(advertised)
    for attr, interval in policy.reservation.items():
        offer[attr] = best_value(attr, interval, model, "provider")
    return offer


def _step_toward(current: float, target: float, step: float,
                 lo: float, hi: float) -> float:
    if abs(target - current) <= step:
        new = target
    else:
        new = current + math.copysign(step, target - current)
    return min(max(new, lo), hi)


@dataclass
class NegotiationOutcome:
    agreed: bool
    attributes: dict[str, float]
    rounds: int
    accepted_by: str | None = None
    transcript: list[tuple[str, int, dict[str, float]]] = field(default_factory=list)
    final_offers: dict[str, dict[str, float]] = field(default_factory=dict)


class NegotiationSession:
    """Turn-by-turn state machine; both the automated protocol and the
    console's manual accept/counter controls drive the same object."""

    def __init__(self, customer_policy: NegotiationPolicy,
                 provider_policy: NegotiationPolicy,
                 model: UtilityModel, opening: Proposal):
        self.customer_policy = customer_policy
        self.provider_policy = provider_policy
        self.customer_model = model
        self.provider_model = model.flipped()
        self.max_rounds = min(customer_policy.max_rounds,
                              provider_policy.max_rounds)
        # attributes both sides actively negotiate; others stay fixed
        self.negotiable = sorted(
            set(customer_policy.reservation) & set(provider_policy.reservation)
            & set(opening.offered_attributes))
        self.round = opening.round
        self.provider_offer = dict(opening.offered_attributes)
        self.customer_offer: dict[str, float] | None = None
        self._customer_stance = {
            a: best_value(a, customer_policy.reservation[a], model, "customer")
            for a in self.negotiable}
        self._provider_stance = {a: self.provider_offer[a]
                                 for a in self.negotiable}
        self.state = "open"  # open | agreed | failed
        self.accepted_by: str | None = None
        self.agreed_attributes: dict[str, float] = {}
        self.transcript: list[tuple[str, int, dict[str, float]]] = [
            ("provider", self.round, dict(self.provider_offer))]

    # -- acceptance checks --------------------------------------------------

    def _within_reservation(self, offer: dict[str, float],
                            policy: NegotiationPolicy) -> bool:
        eps = 1e-9
        for attr, (lo, hi) in policy.reservation.items():
            if attr in offer and not (lo - eps <= offer[attr] <= hi + eps):
                return False
        return True

    def customer_would_accept(self) -> bool:
        if self.state != "open":
            return False
        return (self._within_reservation(self.provider_offer, self.customer_policy)
                and score_utility(self.provider_offer, self.customer_model)
                >= self.customer_policy.acceptance_threshold)

    def provider_would_accept(self) -> bool:
        if self.state != "open" or self.customer_offer is None:
            return False
        return (self._within_reservation(self.customer_offer, self.provider_policy)
                and score_utility(self.customer_offer, self.provider_model)
                >= self.provider_policy.acceptance_threshold)

    # -- moves ----------------------------------------------------------------

    def _accept(self, side: str, offer: dict[str, float]) -> None:
        self.state = "agreed"
        self.accepted_by = side
        self.agreed_attributes = dict(offer)

    def customer_accept(self) -> None:
        self._accept("customer", self.provider_offer)

    def _counter(self, side: str) -> dict[str, float] | None:
        if self.round + 1 > self.max_rounds:
            self.state = "failed"
            return None
        self.round += 1
        if side == "customer":
            stance, policy = self._customer_stance, self.customer_policy
            target = self._provider_stance
        else:
            stance, policy = self._provider_stance, self.provider_policy
            target = self._customer_stance
        for attr in self.negotiable:
            lo, hi = policy.reservation[attr]
            step = policy.concession_step.get(attr)
            if step is None:
                continue  # no concession rule: hold position
            stance[attr] = _step_toward(stance[attr], target[attr], step, lo, hi)
        offer = dict(self.provider_offer)
        offer.update(stance)
        self.transcript.append((side, self.round, dict(offer)))
        return offer

    def customer_counter(self) -> dict[str, float] | None:
        """Customer's next offer per its policy; None means round budget hit."""
        offer = self._counter("customer")
        if offer is not None:
            self.customer_offer = offer
        return offer

    def customer_counter_explicit(self, values: dict[str, float]) -> dict[str, float] | None:
        """Console-driven counter; values are clamped to the customer's
        reservation intervals."""
        if self.round + 1 > self.max_rounds:
            self.state = "failed"
            return None
        self.round += 1
        for attr in self.negotiable:
            lo, hi = self.customer_policy.reservation[attr]
            if attr in values:
                self._customer_stance[attr] = min(max(values[attr], lo), hi)
        offer = dict(self.provider_offer)
        offer.update(self._customer_stance)
        self.customer_offer = offer
        self.transcript.append(("customer", self.round, dict(offer)))
        return offer

    def provider_respond(self) -> str:
        """Provider reacts to the customer's standing offer.
        Returns "accept", "counter" or "failed"."""
        if self.provider_would_accept():
            self._accept("provider", self.customer_offer)
            return "accept"
        offer = self._counter("provider")
        if offer is None:
            return "failed"
        self.provider_offer = offer
        return "counter"

    def outcome(self) -> NegotiationOutcome:
        return NegotiationOutcome(
            agreed=self.state == "agreed",
            attributes=dict(self.agreed_attributes),
            rounds=self.round if self.state != "failed" else self.max_rounds,
            accepted_by=self.accepted_by,
            transcript=list(self.transcript),
            final_offers={
                "customer": dict(self.customer_offer or {}),
                "provider": dict(self.provider_offer),
            },
        )


def negotiate(customer_policy: NegotiationPolicy,
              provider_policy: NegotiationPolicy,
              model: UtilityModel, chosen: Proposal,
              now: int = 0) -> NegotiationOutcome:
    """Run the automated protocol to completion."""
    if chosen.valid_until < now:
        raise ExpiredProposalError(
            f"proposal {chosen.proposal_id} expired at tick {chosen.valid_until}")
    session = NegotiationSession(customer_policy, provider_policy, model, chosen)
    while session.state == "open":
        if session.customer_would_accept():
            session.customer_accept()
            break
        if session.customer_counter() is None:
            break
        session.provider_respond()
    return session.outcome()


def rank_services(proposals: list[Proposal],
                  model: UtilityModel) -> list[tuple[Proposal, float]]:
    """Sort by utility desc, then match degree desc, then service-id asc."""
    scored = [(p, score_utility(p.offered_attributes, model)) for p in proposals]
    scored.sort(key=lambda ps: (-ps[1], -int(ps[0].degree), ps[0].service_id))
    return scored


def bind_parameters(service_inputs: list[tuple[str, str]],
                    customer_inputs: dict[str, tuple[str, object]],
                    graph: OntologyGraph) -> dict[str, tuple[str, object, MatchDegree]]:
    """Bind each service input to the best-matching customer input.

    customer_inputs maps parameter name -> (concept id, value).  Ties are
    broken by customer parameter name order.
    """
    bindings: dict[str, tuple[str, object, MatchDegree]] = {}
    for sname, sconcept in service_inputs:
        best: tuple[int, str] | None = None
        for cname in sorted(customer_inputs):
            cconcept, _ = customer_inputs[cname]
            degree = match_degree(graph, sconcept, cconcept)
            if degree == MatchDegree.FAIL:
                continue
            if best is None or int(degree) > best[0]:
                best = (int(degree), cname)
        if best is None:
            raise UnbindableParameterError(
                f"no customer input matches service parameter {sname!r} "
                f"({sconcept})")
        cname = best[1]
        cconcept, value = customer_inputs[cname]
        bindings[sname] = (cname, value, MatchDegree(best[0]))
    return bindings
