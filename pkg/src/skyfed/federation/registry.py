"""Registry of archive services.

Mutations are serialized and appended to a JSONL journal (one operation per
line); replaying the journal at startup restores the registry, so no
database engine is needed for crash safety."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

from ..clients import ServiceDescription


class RegistryError(ValueError):
    pass


def _check_endpoint(endpoint: str) -> str:
    parts = urlparse(endpoint)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise RegistryError(f"endpoint {endpoint!r} is not a valid http(s) URL")
    return endpoint.rstrip("/")


@dataclass(frozen=True)
class ServiceRecord:
    name: str
    endpoint: str
    description: ServiceDescription
    registered_at: float

    def __post_init__(self):
        if not self.name:
            raise RegistryError("archive name must be non-empty")
        _check_endpoint(self.endpoint)

    def to_obj(self) -> dict:
        return {
            "name": self.name,
            "endpoint": self.endpoint,
            "description": self.description.to_obj(),
            "registered_at": self.registered_at,
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ServiceRecord":
        return cls(
            name=obj["name"],
            endpoint=obj["endpoint"],
            description=ServiceDescription.from_obj(obj["description"]),
            registered_at=float(obj["registered_at"]),
        )


class Registry:
    """Named archive services; unique names, sorted listing."""

    def __init__(self, journal: str | Path | None = None):
        self._records: dict[str, ServiceRecord] = {}
        self._lock = threading.Lock()
        self._journal = Path(journal) if journal is not None else None
        if self._journal is not None and self._journal.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self._journal, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                entry = json.loads(line)
                if entry["op"] == "register":
                    rec = ServiceRecord.from_obj(entry["record"])
                    self._records[rec.name] = rec
                elif entry["op"] == "unregister":
                    self._records.pop(entry["name"], None)
                else:
                    raise RegistryError(f"bad journal op {entry['op']!r}")

    def _append(self, entry: dict) -> None:
        if self._journal is None:
            return
        with open(self._journal, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry) + "\n")
            f.flush()

    def register(
        self,
        name: str,
        endpoint: str,
        description: ServiceDescription,
        registered_at: float | None = None,
    ) -> ServiceRecord:
        rec = ServiceRecord(
            name=name,
            endpoint=endpoint,
            description=description,
            registered_at=registered_at if registered_at is not None else time.time(),
        )
        with self._lock:
            if name in self._records:
                raise RegistryError(f"archive {name!r} already registered")
            self._records[name] = rec
            self._append({"op": "register", "record": rec.to_obj()})
        return rec

    def unregister(self, name: str) -> None:
        with self._lock:
            if name not in self._records:
                raise RegistryError(f"unknown archive {name!r}")
            del self._records[name]
            self._append({"op": "unregister", "name": name})

    def find(self, name: str) -> ServiceRecord:
        with self._lock:
            if name not in self._records:
                raise RegistryError(f"unknown archive {name!r}")
            return self._records[name]

    def list(self) -> list[ServiceRecord]:
        with self._lock:
            return [self._records[n] for n in sorted(self._records)]

    def names(self) -> list[str]:
        with self._lock:
            return sorted(self._records)

    def __contains__(self, name: str) -> bool:
        with self._lock:
            return name in self._records
