"""Scenario harness tests: directive parsing, the bundled port scenario
with its frozen metrics, determinism of the trace hash."""

from fractions import Fraction
from pathlib import Path

import pytest

from iseec.errors import FixtureResolutionError, ScenarioError
from iseec.scenario import (
    MetricsReport,
    Scenario,
    load_scenario,
    parse_scenario,
    run_scenario,
)

GOLDENS = Path(__file__).resolve().parent / "goldens"


class TestParsing:
    def test_bundled_scenario(self, fixtures_dir):
        scenario = load_scenario(fixtures_dir / "port.scn")
        assert scenario.seed == 42
        assert scenario.cache_capacity == 8
        assert len(scenario.accounts) == 5
        assert len(scenario.publications) == 5
        assert len(scenario.queries) == 6
        assert scenario.negotiations == [("acme", "q1", 1)]

    def test_comments_and_blanks_ignored(self, fixtures_dir):
        assert parse_scenario("# hi\n\nseed 7\n", fixtures_dir).seed == 7

    def test_missing_fixture(self, fixtures_dir):
        with pytest.raises(FixtureResolutionError):
            parse_scenario("ontology ghost.ont\n", fixtures_dir)

    def test_malformed_directive(self, fixtures_dir):
        with pytest.raises(ScenarioError):
            parse_scenario("query acme qry-transport.qry\n", fixtures_dir)
        with pytest.raises(ScenarioError):
            parse_scenario("teleport acme\n", fixtures_dir)
        with pytest.raises(ScenarioError):
            parse_scenario("seed many\n", fixtures_dir)


@pytest.fixture(scope="module")
def report(fixtures_dir):
    return run_scenario(load_scenario(fixtures_dir / "port.scn"))[0]


class TestPortScenario:

    def test_cache_hit_rate_exact(self, report):
        # q3 and q5 repeat earlier queries; 2 hits out of 6
        assert report.cache_hit_rate == Fraction(2, 6)

    def test_mean_hops(self, report):
        # four central round trips (4 hops) and two local hits (2 hops)
        assert report.mean_hops_per_discovery == Fraction(4 * 4 + 2 * 2, 6)

    def test_contracts_and_rounds(self, report):
        assert report.contracts_concluded == 1
        assert report.negotiations_failed == 0
        assert report.mean_negotiation_rounds == 6

    def test_trace_hash_matches_golden(self, report):
        golden = (GOLDENS / "port-scenario.hash").read_text().strip()
        assert report.trace_hash == golden

    def test_deterministic_across_runs(self, fixtures_dir, report):
        for _ in range(2):
            again, _ = run_scenario(load_scenario(fixtures_dir / "port.scn"))
            assert again == report

    def test_expectations_enforced(self, fixtures_dir):
        scenario = load_scenario(fixtures_dir / "port.scn")
        scenario.expected_contracts = 1
        scenario.expected_trace_hash = \
            (GOLDENS / "port-scenario.hash").read_text().strip()
        run_scenario(scenario)  # should not raise
        scenario.expected_trace_hash = "0" * 64
        with pytest.raises(ScenarioError):
            run_scenario(scenario)

    def test_report_serialization(self, report):
        d = report.as_dict()
        assert d["cache-hit-rate"] == "1/3"
        assert d["contracts-concluded"] == 1
        assert "trace hash" in report.table()
        assert report.trace_hash in report.table()


class TestEdgeCases:
    def test_empty_scenario_all_zero_metrics(self):
        report, _ = run_scenario(Scenario())
        assert report == MetricsReport(
            cache_hit_rate=Fraction(0),
            mean_hops_per_discovery=Fraction(0),
            contracts_concluded=0,
            negotiations_failed=0,
            mean_negotiation_rounds=Fraction(0),
            trace_hash=report.trace_hash)

    def test_negotiate_unknown_query(self, fixtures_dir):
        scenario = load_scenario(fixtures_dir / "port.scn")
        scenario.negotiations = [("acme", "q99", 1)]
        with pytest.raises(ScenarioError):
            run_scenario(scenario)

    def test_rank_out_of_range(self, fixtures_dir):
        scenario = load_scenario(fixtures_dir / "port.scn")
        scenario.negotiations = [("acme", "q1", 9)]
        with pytest.raises(ScenarioError):
            run_scenario(scenario)
