"""Personal databases: named result tables under a byte quota with
owner-controlled read/write grants."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

from ..catalog.schema import ColumnMeta
from ..wire import TabularDocument, _encode_cell

DEFAULT_QUOTA_BYTES = 64 * 1024 * 1024


class WorkspaceError(ValueError):
    pass


class AccessError(WorkspaceError):
    """Caller lacks the required grant."""


class MyDbQuotaError(WorkspaceError):
    """The operation would push stored bytes past the quota."""


@dataclass
class StoredTable:
    columns: list[ColumnMeta]
    rows: list[tuple]
    nbytes: int


def table_bytes(columns: list[ColumnMeta], rows: list[tuple]) -> int:
    """Accounting size: the table rendered as tab-separated text."""
    total = len("\t".join(c.name for c in columns).encode()) + 1
    kinds = [c.kind for c in columns]
    for r in rows:
        line = "\t".join(_encode_cell(v, k) for v, k in zip(r, kinds))
        total += len(line.encode()) + 1
    return total


@dataclass
class PersonalDb:
    owner: str
    quota_bytes: int = DEFAULT_QUOTA_BYTES
    tables: dict[str, StoredTable] = field(default_factory=dict)
    acl: dict[str, str] = field(default_factory=dict)  # user -> "read" | "write"

    @property
    def used_bytes(self) -> int:
        return sum(t.nbytes for t in self.tables.values())

    def can_read(self, user: str) -> bool:
        return user == self.owner or self.acl.get(user) in ("read", "write")

    def can_write(self, user: str) -> bool:
        return user == self.owner or self.acl.get(user) == "write"


class MyDbStore:
    """All personal databases of one portal; one writer at a time per db."""

    def __init__(self, default_quota_bytes: int = DEFAULT_QUOTA_BYTES):
        self.default_quota_bytes = default_quota_bytes
        self._dbs: dict[str, PersonalDb] = {}
        self._lock = threading.Lock()

    def create(self, owner: str, quota_bytes: int | None = None) -> PersonalDb:
        with self._lock:
            if owner in self._dbs:
                raise WorkspaceError(f"{owner!r} already has a personal database")
            db = PersonalDb(
                owner=owner,
                quota_bytes=quota_bytes
                if quota_bytes is not None
                else self.default_quota_bytes,
            )
            self._dbs[owner] = db
            return db

    def get(self, owner: str) -> PersonalDb:
        with self._lock:
            if owner not in self._dbs:
                raise WorkspaceError(f"{owner!r} has no personal database")
            return self._dbs[owner]

    def exists(self, owner: str) -> bool:
        with self._lock:
            return owner in self._dbs

    def upload_table(
        self,
        owner: str,
        caller: str,
        name: str,
        columns: list[ColumnMeta],
        rows: list[tuple],
        replace: bool = False,
    ) -> StoredTable:
        """Store a table whole-or-not-at-all: size and quota are settled
        before anything in the db changes."""
        db = self.get(owner)
        staged = StoredTable(list(columns), list(rows), table_bytes(columns, rows))
        with self._lock:
            if not db.can_write(caller):
                raise AccessError(f"{caller!r} has no write grant on {owner!r}'s database")
            if name in db.tables and not replace:
                raise WorkspaceError(f"table {name!r} already exists")
            already = db.tables[name].nbytes if name in db.tables else 0
            if db.used_bytes - already + staged.nbytes > db.quota_bytes:
                raise MyDbQuotaError(
                    f"table {name!r} ({staged.nbytes} bytes) would exceed the "
                    f"{db.quota_bytes}-byte quota"
                )
            db.tables[name] = staged
        return staged

    def drop_table(self, owner: str, caller: str, name: str) -> None:
        db = self.get(owner)
        with self._lock:
            if not db.can_write(caller):
                raise AccessError(f"{caller!r} has no write grant on {owner!r}'s database")
            if name not in db.tables:
                raise WorkspaceError(f"no table {name!r}")
            del db.tables[name]

    def grant(self, owner: str, caller: str, user: str, level: str) -> None:
        if level not in ("read", "write"):
            raise WorkspaceError(f"grant level must be read or write, got {level!r}")
        db = self.get(owner)
        with self._lock:
            if caller != db.owner:
                raise AccessError("only the owner may grant access")
            db.acl[user] = level

    def list_tables(self, owner: str, caller: str) -> list[str]:
        db = self.get(owner)
        with self._lock:
            if not db.can_read(caller):
                raise AccessError(f"{caller!r} has no read grant on {owner!r}'s database")
            return sorted(db.tables)

    def fetch_table(self, owner: str, caller: str, name: str) -> TabularDocument:
        db = self.get(owner)
        with self._lock:
            if not db.can_read(caller):
                raise AccessError(f"{caller!r} has no read grant on {owner!r}'s database")
            if name not in db.tables:
                raise WorkspaceError(f"no table {name!r}")
            t = db.tables[name]
            return TabularDocument(columns=list(t.columns), rows=list(t.rows))
