"""Scenario harness: scripted multi-actor runs with a metrics report.

Scenario files are plain text, one directive per line, referencing
fixture files relative to the scenario's own directory so goldens live
in-repo and diff cleanly.  Directives:

    seed <int>
    cache-capacity <int>
    ontology <file>
    mapping <file>
    register <login> <customer|provider> <password>
    policy <login> <file>
    publish <login> <file>
    query <login> <file> as <name>
    negotiate <login> <query-name> rank <k>
    expect trace-hash <hex>
    expect contracts <int>
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import FixtureResolutionError, ScenarioError
from .platform import Platform
from .registry import ServiceDescription, ServiceQuery


@dataclass
class Scenario:
    seed: int = 0
    cache_capacity: int = 8
    ontologies: list[Path] = field(default_factory=list)
    mappings: list[Path] = field(default_factory=list)
    accounts: list[tuple[str, str, str]] = field(default_factory=list)
    policies: list[tuple[str, Path]] = field(default_factory=list)
    publications: list[tuple[str, Path]] = field(default_factory=list)
    queries: list[tuple[str, Path, str]] = field(default_factory=list)
    negotiations: list[tuple[str, str, int]] = field(default_factory=list)
    expected_trace_hash: str | None = None
    expected_contracts: int | None = None


@dataclass
class MetricsReport:
    cache_hit_rate: Fraction
    mean_hops_per_discovery: Fraction
    contracts_concluded: int
    negotiations_failed: int
    mean_negotiation_rounds: Fraction
    trace_hash: str

    def as_dict(self) -> dict:
        return {
            "cache-hit-rate": str(self.cache_hit_rate),
            "mean-hops-per-discovery": str(self.mean_hops_per_discovery),
            "contracts-concluded": self.contracts_concluded,
            "negotiations-failed": self.negotiations_failed,
            "mean-negotiation-rounds": str(self.mean_negotiation_rounds),
            "trace-hash": self.trace_hash,
        }

    def table(self) -> str:
        rows = [
            ("cache hit rate", f"{self.cache_hit_rate} "
             f"({float(self.cache_hit_rate):.3f})"),
            ("mean hops per discovery",
             f"{float(self.mean_hops_per_discovery):.3f}"),
            ("contracts concluded", str(self.contracts_concluded)),
            ("negotiations failed", str(self.negotiations_failed)),
            ("mean negotiation rounds",
             f"{float(self.mean_negotiation_rounds):.3f}"),
            ("trace hash", self.trace_hash),
        ]
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def _resolve(base: Path, name: str) -> Path:
    path = base / name
    if not path.is_file():
        raise FixtureResolutionError(f"fixture {name!r} not found in {base}")
    return path


def parse_scenario(text: str, base_dir: str | Path) -> Scenario:
    base = Path(base_dir)
    scenario = Scenario()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            head = parts[0]
            if head == "seed":
                scenario.seed = int(parts[1])
            elif head == "cache-capacity":
                scenario.cache_capacity = int(parts[1])
            elif head == "ontology":
                scenario.ontologies.append(_resolve(base, parts[1]))
            elif head == "mapping":
                scenario.mappings.append(_resolve(base, parts[1]))
            elif head == "register":
                login, role, password = parts[1], parts[2], parts[3]
                if role not in ("customer", "provider"):
                    raise ScenarioError(f"line {lineno}: bad role {role!r}")
                scenario.accounts.append((login, role, password))
            elif head == "policy":
                scenario.policies.append((parts[1], _resolve(base, parts[2])))
            elif head == "publish":
                scenario.publications.append(
                    (parts[1], _resolve(base, parts[2])))
            elif head == "query":
                if parts[3] != "as":
                    raise ScenarioError(f"line {lineno}: expected 'as'")
                scenario.queries.append(
                    (parts[1], _resolve(base, parts[2]), parts[4]))
            elif head == "negotiate":
                if parts[3] != "rank":
                    raise ScenarioError(f"line {lineno}: expected 'rank'")
                scenario.negotiations.append(
                    (parts[1], parts[2], int(parts[4])))
            elif head == "expect":
                if parts[1] == "trace-hash":
                    scenario.expected_trace_hash = parts[2]
                elif parts[1] == "contracts":
                    scenario.expected_contracts = int(parts[2])
                else:
                    raise ScenarioError(
                        f"line {lineno}: unknown expectation {parts[1]!r}")
            else:
                raise ScenarioError(
                    f"line {lineno}: unknown directive {head!r}")
        except (IndexError, ValueError) as exc:
            raise ScenarioError(f"line {lineno}: malformed directive "
                                f"{line!r}") from exc
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path.parent)


def run_scenario(scenario: Scenario,
                 data_dir: str | Path | None = None,
                 platform: Platform | None = None
                 ) -> tuple[MetricsReport, Platform]:
    """Execute every step under the deterministic scheduler.

    Raises ScenarioError when a stated expectation does not hold.
    """
    if platform is None:
        platform = Platform(seed=scenario.seed, data_dir=data_dir,
                            cache_capacity=scenario.cache_capacity)
    for path in scenario.ontologies:
        platform.load_ontology_file(path)
    for path in scenario.mappings:
        platform.load_mapping_file(path)

    passwords: dict[str, tuple[str, str]] = {}
    for login, role, password in scenario.accounts:
        platform.register_account(login, password, role)
        passwords[login] = (password, role)
    for login, path in scenario.policies:
        platform.load_policy_file(login, path)

    sessions: dict[str, str] = {}

    def session_for(login: str) -> str:
        if login not in sessions:
            password, role = passwords[login]
            sessions[login] = platform.authenticate(
                login, password, role).session_id
        return sessions[login]

    for login, path in scenario.publications:
        desc = ServiceDescription.parse(path.read_text(encoding="utf-8"))
        platform.publish_service(session_for(login), desc)

    request_ids: dict[str, str] = {}
    hops: list[int] = []
    for login, path, name in scenario.queries:
        query = ServiceQuery.parse(path.read_text(encoding="utf-8"))
        rid = platform.submit_request(session_for(login), query)
        request_ids[name] = rid
        hops.append(platform.get_result(rid).hops)

    negotiations_failed = 0
    rounds: list[int] = []
    for login, qname, rank in scenario.negotiations:
        rid = request_ids.get(qname)
        if rid is None:
            raise ScenarioError(f"negotiate references unknown query {qname!r}")
        ranked = platform.request_proposals(session_for(login), rid)
        if not 1 <= rank <= len(ranked):
            raise ScenarioError(
                f"rank {rank} out of range for query {qname!r} "
                f"({len(ranked)} proposals)")
        proposal = ranked[rank - 1][0]
        nid = platform.choose_service(session_for(login), rid,
                                      proposal.service_id)
        outcome = platform.negotiate_auto(nid)
        if "contract" in outcome:
            rounds.append(outcome["contract"].negotiation_rounds)
        else:
            negotiations_failed += 1

    def mean(values: list[int]) -> Fraction:
        return Fraction(sum(values), len(values)) if values else Fraction(0)

    report = MetricsReport(
        cache_hit_rate=platform.discovery.history.cache_hit_rate(),
        mean_hops_per_discovery=mean(hops),
        contracts_concluded=len(platform.contracts),
        negotiations_failed=negotiations_failed,
        mean_negotiation_rounds=mean(rounds),
        trace_hash=platform.trace().trace_hash(),
    )

    if (scenario.expected_trace_hash is not None
            and report.trace_hash != scenario.expected_trace_hash):
        raise ScenarioError(
            f"trace hash {report.trace_hash} does not match the expected "
            f"golden {scenario.expected_trace_hash}")
    if (scenario.expected_contracts is not None
            and report.contracts_concluded != scenario.expected_contracts):
        raise ScenarioError(
            f"{report.contracts_concluded} contracts concluded, expected "
            f"{scenario.expected_contracts}")
    return report, platform
