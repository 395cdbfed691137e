"""Command line entry point.

Subcommands: ``serve`` (gateway), ``sim`` (scenario harness), ``match``
(offline matchmaking against a register directory), ``ontology check``
(document validation with cycle diagnostics).  Exit status 0 on success,
1 on a domain error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import PlatformError, SubsumptionCycleError
from .gateway import serve as gateway_serve
from .ontology import load_ontology
from .platform import Platform
from .registry import CentralRegister, ServiceQuery
from .scenario import load_scenario, run_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iseec",
        description="semantic cooperation platform for supply chains")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the JSON gateway")
    p_serve.add_argument("--port", type=int, default=7410)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data", type=Path, default=None,
                         help="persistence directory")
    p_serve.add_argument("--scenario", type=Path, default=None,
                         help="scenario file used to preload the platform")
    p_serve.add_argument("--seed", type=int, default=0)

    p_sim = sub.add_parser("sim", help="run a scenario and print metrics")
    p_sim.add_argument("--scenario", type=Path, required=True)
    p_sim.add_argument("--seed", type=int, default=None,
                       help="override the scenario's seed directive")
    p_sim.add_argument("--golden", type=Path, default=None,
                       help="file holding the expected trace hash")
    p_sim.add_argument("--json", action="store_true", dest="as_json")

    p_match = sub.add_parser("match", help="offline matchmaking")
    p_match.add_argument("--query", type=Path, required=True)
    p_match.add_argument("--registry", type=Path, required=True,
                         help="directory holding central/*.svc")
    p_match.add_argument("--ontology", type=Path, required=True)

    p_ont = sub.add_parser("ontology", help="ontology utilities")
    ont_sub = p_ont.add_subparsers(dest="ontology_command", required=True)
    p_check = ont_sub.add_parser("check", help="validate a document")
    p_check.add_argument("file", type=Path)

    return parser


def _cmd_serve(args) -> int:
    platform = Platform(seed=args.seed, data_dir=args.data)
    if args.scenario:
        scenario = load_scenario(args.scenario)
        run_scenario(scenario, platform=platform)
    server = gateway_serve(platform, host=args.host, port=args.port)
    host, port = server.address
    print(f"gateway listening on {host}:{port}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_sim(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    report, _ = run_scenario(scenario)
    if args.as_json:
        print(json.dumps(report.as_dict(), sort_keys=True))
    else:
        print(report.table())
    if args.golden is not None:
        expected = args.golden.read_text(encoding="utf-8").strip()
        if report.trace_hash != expected:
            print(f"trace hash mismatch: expected {expected}",
                  file=sys.stderr)
            return 1
    return 0


def _cmd_match(args) -> int:
    graph = load_ontology(args.ontology.read_bytes())
    register = CentralRegister(args.registry)
    query = ServiceQuery.parse(args.query.read_text(encoding="utf-8"))
    results = register.discover(query, graph)
    for match in results:
        svc = match.service
        print(f"{svc.service_id} {match.degree.wire} {svc.provider_id} "
              f"{svc.name}")
    if not results:
        print("no matching services")
    return 0


def _cmd_ontology_check(args) -> int:
    try:
        graph = load_ontology(args.file.read_bytes())
    except SubsumptionCycleError as exc:
        print(f"cycle: {' -> '.join(exc.cycle)}", file=sys.stderr)
        return 1
    print(f"ok: {len(graph)} concepts, {len(graph.rules)} rules")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "sim":
            return _cmd_sim(args)
        if args.command == "match":
            return _cmd_match(args)
        if args.command == "ontology":
            return _cmd_ontology_check(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PlatformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
