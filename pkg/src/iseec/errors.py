"""Exception hierarchy for the platform.

Every domain failure maps onto one of these; the gateway translates them
into structured error responses, agents relay them as error payloads.
"""


class PlatformError(Exception):
    """Base class for all domain errors."""

    code = "platform-error"


# --- ontology ---------------------------------------------------------------

class OntologyError(PlatformError):
    code = "ontology-error"


class OntologyParseError(OntologyError):
    code = "parse-error"


class SubsumptionCycleError(OntologyError):
    """Raised at load time; carries one offending cycle."""

    code = "cycle-error"

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("subsumption cycle: " + " -> ".join(self.cycle))


class DanglingParentError(OntologyError):
    code = "dangling-parent-error"


class UnknownConceptError(OntologyError):
    code = "unknown-concept-error"


class UnknownOntologyError(OntologyError):
    code = "unknown-ontology-error"


class NoMappingError(OntologyError):
    """No translation pair for a concept; broker must escalate."""

    code = "no-mapping-error"


# --- registry ---------------------------------------------------------------

class RegistryError(PlatformError):
    code = "registry-error"


class ValidationError(RegistryError):
    code = "validation-error"


class DuplicateServiceNameError(RegistryError):
    code = "duplicate-name-error"


class UnknownServiceError(RegistryError):
    code = "unknown-service-error"


# --- runtime ----------------------------------------------------------------

class RuntimeBusError(PlatformError):
    code = "runtime-error"


class DuplicateAgentIdError(RuntimeBusError):
    code = "duplicate-id-error"


class DuplicateCoreRoleError(RuntimeBusError):
    code = "duplicate-core-role-error"


class InvalidMessageError(RuntimeBusError):
    code = "invalid-message-error"


class MessageBudgetExceededError(RuntimeBusError):
    code = "budget-exceeded-error"


# --- accounts / sessions ----------------------------------------------------

class AccountError(PlatformError):
    code = "account-error"


class DuplicateLoginError(AccountError):
    code = "duplicate-login-error"


class UnknownUserError(AccountError):
    code = "unknown-user-error"


class WrongCredentialsError(AccountError):
    code = "wrong-credentials-error"


class InvalidSessionError(AccountError):
    code = "invalid-session-error"


class NotACustomerError(AccountError):
    code = "not-a-customer-error"


class NotAProviderError(AccountError):
    code = "not-a-provider-error"


# --- queries / negotiation --------------------------------------------------

class InvalidQueryError(PlatformError):
    code = "invalid-query-error"


class MissingAttributeError(PlatformError):
    code = "missing-attribute-error"


class InvalidPolicyError(PlatformError):
    code = "invalid-policy-error"


class ExpiredProposalError(PlatformError):
    code = "expired-proposal-error"


class AllProposalsFailedError(PlatformError):
    code = "all-failed-error"


class UnbindableParameterError(PlatformError):
    code = "unbindable-parameter-error"


class ExhaustedAlternativesError(PlatformError):
    code = "exhausted-alternatives-error"


# --- scenarios / gateway ----------------------------------------------------

class FixtureResolutionError(PlatformError):
    code = "fixture-resolution-error"


class ScenarioError(PlatformError):
    code = "scenario-error"


class MalformedRequestError(PlatformError):
    code = "malformed-request"
