"""Accounts, salted-hash credentials and sessions.

The store is an append-only journal (``accounts.jnl``) replayed at
startup; the header names the hash primitive so the on-disk format is
self-describing.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    DuplicateLoginError,
    UnknownUserError,
    WrongCredentialsError,
)

JOURNAL_HEADER = "# i-seec accounts journal v1 hash=sha256-salted"
ACCOUNT_ROLES = ("customer", "provider")


def _digest(salt: bytes, password: str) -> bytes:
    return hashlib.sha256(salt + password.encode("utf-8")).digest()


@dataclass
class Account:
    account_id: str
    login: str
    role: str
    salt: bytes
    credential: bytes
    profile: dict[str, str] = field(default_factory=dict)
    agent_id: str | None = None


@dataclass(frozen=True)
class Session:
    session_id: str
    account_id: str
    opened_at: int


class AccountStore:
    def __init__(self, journal_path: str | Path | None = None,
                 rng: random.Random | None = None):
        self.journal_path = Path(journal_path) if journal_path else None
        self.rng = rng or random.Random(0)
        self.by_login: dict[str, Account] = {}
        self._counter = 0
        if self.journal_path and self.journal_path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self.journal_path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rec = json.loads(line)
            if rec["event"] == "created":
                account = Account(
                    account_id=rec["account-id"],
                    login=rec["login"],
                    role=rec["role"],
                    salt=bytes.fromhex(rec["salt"]),
                    credential=bytes.fromhex(rec["credential"]),
                    profile=rec.get("profile", {}),
                )
                self.by_login[account.login] = account
                num = account.account_id.rsplit("-", 1)[-1]
                if num.isdigit():
                    self._counter = max(self._counter, int(num))
            elif rec["event"] == "credential-rotated":
                account = self._by_id(rec["account-id"])
                account.salt = bytes.fromhex(rec["salt"])
                account.credential = bytes.fromhex(rec["credential"])

    def _by_id(self, account_id: str) -> Account:
        for account in self.by_login.values():
            if account.account_id == account_id:
                return account
        raise UnknownUserError(f"unknown account {account_id!r}")

    def _append(self, record: dict) -> None:
        if not self.journal_path:
            return
        fresh = not self.journal_path.exists()
        with self.journal_path.open("a", encoding="utf-8") as fh:
            if fresh:
                fh.write(JOURNAL_HEADER + "\n")
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def create(self, login: str, password: str, role: str,
               profile: dict[str, str] | None = None) -> Account:
        if role not in ACCOUNT_ROLES:
            raise ValueError(f"unknown role {role!r}")
        if login in self.by_login:
            raise DuplicateLoginError(f"login {login!r} already registered")
        self._counter += 1
        salt = self.rng.randbytes(16)
        account = Account(
            account_id=f"acct-{self._counter:06d}",
            login=login,
            role=role,
            salt=salt,
            credential=_digest(salt, password),
            profile=dict(profile or {}),
        )
        self.by_login[login] = account
        self._append({
            "event": "created",
            "account-id": account.account_id,
            "login": login,
            "role": role,
            "salt": salt.hex(),
            "credential": account.credential.hex(),
            "profile": account.profile,
        })
        return account

    def rotate_credential(self, account_id: str, password: str) -> None:
        account = self._by_id(account_id)
        account.salt = self.rng.randbytes(16)
        account.credential = _digest(account.salt, password)
        self._append({
            "event": "credential-rotated",
            "account-id": account_id,
            "salt": account.salt.hex(),
            "credential": account.credential.hex(),
        })

    def verify(self, login: str, password: str, role: str) -> Account:
        """The credential triple check: login, password and role must all
        agree with the stored account."""
        account = self.by_login.get(login)
        if account is None:
            raise UnknownUserError(f"unknown login {login!r}")
        if account.role != role or _digest(account.salt, password) != account.credential:
            raise WrongCredentialsError("the seized data are erroneous")
        return account
