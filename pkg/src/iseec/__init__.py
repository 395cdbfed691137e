"""i-SEEC: multi-agent cooperation platform for extended-enterprise
supply chains: semantic service registries, utility-ranked selection and
ontology-rule negotiation over a deterministic agent bus."""

from .negotiation import (
    Contract,
    NegotiationPolicy,
    Proposal,
    UtilityModel,
    negotiate,
    rank_services,
    score_utility,
)
from .gateway import Gateway, GatewayServer, serve
from .ontology import (
    ConceptMapping,
    MatchDegree,
    OntologyGraph,
    is_subconcept,
    load_ontology,
    match_degree,
    translate_concept,
)
from .platform import Platform
from .registry import (
    CentralRegister,
    LocalRegister,
    MatchResult,
    ServiceDescription,
    ServiceQuery,
)
from .scenario import MetricsReport, Scenario, load_scenario, run_scenario

__version__ = "0.1.0"

__all__ = [
    "CentralRegister",
    "ConceptMapping",
    "Contract",
    "Gateway",
    "GatewayServer",
    "LocalRegister",
    "MatchDegree",
    "MatchResult",
    "MetricsReport",
    "NegotiationPolicy",
    "OntologyGraph",
    "Platform",
    "Proposal",
    "Scenario",
    "ServiceDescription",
    "ServiceQuery",
    "UtilityModel",
    "is_subconcept",
    "load_ontology",
    "load_scenario",
    "match_degree",
    "negotiate",
    "rank_services",
    "run_scenario",
    "score_utility",
    "serve",
    "translate_concept",
]
