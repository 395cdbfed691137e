import json

import pytest

from iseec.cli import main
from iseec.ontology import load_ontology
from iseec.registry import CentralRegister, ServiceDescription


@pytest.fixture
def registry_dir(tmp_path, fixtures_dir):
    graph = load_ontology((fixtures_dir / "port.ont").read_bytes())
    register = CentralRegister(tmp_path)
    for f in sorted(fixtures_dir.glob("svc-*.svc")):
        register.publish(ServiceDescription.parse(f.read_text()),
                         {"port": graph})
    return tmp_path


class TestOntologyCheck:
    def test_valid_document(self, fixtures_dir, capsys):
        assert main(["ontology", "check",
                     str(fixtures_dir / "port.ont")]) == 0
        assert "11 concepts" in capsys.readouterr().out

    def test_cyclic_document_names_cycle(self, fixtures_dir, capsys):
        assert main(["ontology", "check",
                     str(fixtures_dir / "cyclic.ont")]) == 1
        err = capsys.readouterr().err
        assert "cycle" in err
        assert "A" in err and "B" in err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["ontology", "check", str(tmp_path / "ghost.ont")]) == 1

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["ontology"])
        assert exc.value.code == 2


class TestSim:
    def test_table_output(self, fixtures_dir, capsys):
        assert main(["sim", "--scenario",
                     str(fixtures_dir / "port.scn")]) == 0
        out = capsys.readouterr().out
        assert "cache hit rate" in out
        assert "1/3" in out

    def test_json_output(self, fixtures_dir, capsys):
        assert main(["sim", "--scenario", str(fixtures_dir / "port.scn"),
                     "--json"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["cache-hit-rate"] == "1/3"
        assert report["contracts-concluded"] == 1

    def test_matching_golden_exits_0(self, fixtures_dir, tmp_path, goldens_dir):
        assert main(["sim", "--scenario", str(fixtures_dir / "port.scn"),
                     "--golden",
                     str(goldens_dir / "port-scenario.hash")]) == 0

    def test_mismatching_golden_exits_1(self, fixtures_dir, tmp_path, capsys):
        bogus = tmp_path / "bogus.hash"
        bogus.write_text("0" * 64)
        assert main(["sim", "--scenario", str(fixtures_dir / "port.scn"),
                     "--golden", str(bogus)]) == 1
        assert "mismatch" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self, fixtures_dir):
        with pytest.raises(SystemExit) as exc:
            main(["sim", "--scenario", str(fixtures_dir / "port.scn"),
                  "--frobnicate"])
        assert exc.value.code == 2


class TestMatch:
    def test_lists_matching_services(self, fixtures_dir, registry_dir,
                                     capsys):
        assert main(["match",
                     "--query", str(fixtures_dir / "qry-transport.qry"),
                     "--registry", str(registry_dir),
                     "--ontology", str(fixtures_dir / "port.ont")]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 2
        assert all("plugin" in line for line in out)

    def test_no_matches(self, fixtures_dir, registry_dir, capsys):
        assert main(["match",
                     "--query", str(fixtures_dir / "qry-port.qry"),
                     "--registry", str(registry_dir),
                     "--ontology", str(fixtures_dir / "port.ont")]) == 0
        assert "no matching services" in capsys.readouterr().out

    def test_agrees_with_gateway_list_results(self, fixtures_dir, capsys):
        from iseec.gateway import Gateway
        from test_gateway import call, query_wire
        from test_platform import port_platform

        gateway = Gateway(port_platform(fixtures_dir))
        session = call(gateway, op="authenticate", login="acme",
                       password="pw", role="customer")["session-id"]
        rid = call(gateway, op="submit-request",
                   **{"session-id": session,
                      "query": query_wire(fixtures_dir)})["request-id"]
        rows = call(gateway, op="list-results",
                    **{"request-id": rid})["results"]
        wire_ids = [r["service"]["service-id"] for r in rows]

        registry = gateway.platform.central
        import tempfile
        from pathlib import Path
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp) / "central"
            root.mkdir()
            for sid, desc in registry.services.items():
                (root / f"{sid}.svc").write_text(desc.serialize())
            assert main(["match",
                         "--query", str(fixtures_dir / "qry-transport.qry"),
                         "--registry", tmp,
                         "--ontology", str(fixtures_dir / "port.ont")]) == 0
        cli_ids = [line.split()[0]
                   for line in capsys.readouterr().out.strip().splitlines()]
        assert cli_ids == wire_ids
