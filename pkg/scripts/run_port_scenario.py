#!/usr/bin/env python3
"""Run the bundled port supply-chain scenario and print the metrics table.

With --check the trace hash is compared against the frozen golden and a
non-zero exit signals drift.  With --runs N the scenario is replayed N
times to demonstrate determinism.
"""

import argparse
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from iseec.scenario import load_scenario, run_scenario  # noqa: E402

GOLDEN = ROOT / "tests" / "goldens" / "port-scenario.hash"
SCENARIO = ROOT / "fixtures" / "port.scn"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", type=Path, default=SCENARIO)
    parser.add_argument("--runs", type=int, default=1)
    parser.add_argument("--check", action="store_true",
                        help="compare the trace hash against the golden")
    args = parser.parse_args()

    scenario = load_scenario(args.scenario)
    hashes = []
    report = None
    for _ in range(args.runs):
        report, _ = run_scenario(load_scenario(args.scenario))
        hashes.append(report.trace_hash)

    print(report.table())
    if args.runs > 1:
        unique = sorted(set(hashes))
        print(f"\n{args.runs} runs, {len(unique)} distinct trace hash(es)")
        if len(unique) != 1:
            return 1

    if args.check:
        expected = GOLDEN.read_text().strip()
        if report.trace_hash != expected:
            print(f"trace hash mismatch: expected {expected}",
                  file=sys.stderr)
            return 1
        print("trace hash matches golden")
    return 0


if __name__ == "__main__":
    sys.exit(main())
