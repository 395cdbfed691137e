"""Regenerate the golden message traces under tests/goldens/.

Goldens are frozen regression oracles: regenerate only after an reviewed
protocol change, and re-inspect the emitted sequences by hand before
committing.  Each authentication case runs on a fresh deterministic
platform with seed 0.
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from iseec.errors import UnknownUserError, WrongCredentialsError  # noqa: E402
from iseec.platform import Platform  # noqa: E402
from iseec.scenario import load_scenario, run_scenario  # noqa: E402

GOLDENS = ROOT / "tests" / "goldens"


def fresh_platform() -> Platform:
    platform = Platform(seed=0)
    platform.accounts.create("acme", "secret", "customer")
    platform.accounts.create("portco", "pw", "provider")
    return platform


def auth_success() -> str:
    platform = fresh_platform()
    platform.authenticate("acme", "secret", "customer")
    return platform.trace().canonical()


def auth_wrong_credentials() -> str:
    platform = fresh_platform()
    try:
        platform.authenticate("acme", "wrong", "customer")
    except WrongCredentialsError:
        pass
    return platform.trace().canonical()


def auth_unknown_user_then_register() -> str:
    platform = fresh_platform()
    try:
        platform.authenticate("nadia", "pw", "customer")
    except UnknownUserError:
        pass
    platform.register_account("nadia", "pw", "customer")
    platform.authenticate("nadia", "pw", "customer")
    return platform.trace().canonical()


def port_scenario_hash() -> str:
    report, _ = run_scenario(load_scenario(ROOT / "fixtures" / "port.scn"))
    return report.trace_hash + "\n"


def main() -> None:
    GOLDENS.mkdir(parents=True, exist_ok=True)
    cases = {
        "auth-success.trace": auth_success(),
        "auth-wrong-credentials.trace": auth_wrong_credentials(),
        "auth-unknown-user.trace": auth_unknown_user_then_register(),
        "port-scenario.hash": port_scenario_hash(),
    }
    for name, text in cases.items():
        (GOLDENS / name).write_text(text, encoding="utf-8")
        print(f"wrote {name}:")
        print(text)


if __name__ == "__main__":
    main()
