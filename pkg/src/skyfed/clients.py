"""Service descriptions and archive client implementations.

Every consumer of an archive (the planner, the executor, the cross-match
engine, the benchmark harness) goes through the ArchiveClient interface, so
in-process and HTTP access are interchangeable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Protocol

import numpy as np

from .catalog.schema import ColumnMeta, SchemaError, TableDef
from .catalog.store import Catalog, EditionView
from .sphere import Cone, SkyCoord
from .wire import TabularDocument, from_json_obj


class ArchiveUnreachableError(ConnectionError):
    """The archive behind a client could not be reached or answered badly."""


@dataclass(frozen=True)
class TableDescription:
    tdef: TableDef
    cardinality: int

    def to_obj(self) -> dict:
        return {
            "primary_key": self.tdef.primary_key,
            "spatial": list(self.tdef.spatial) if self.tdef.spatial else None,
            "cardinality": self.cardinality,
            "columns": [
                {
                    "name": c.name,
                    "kind": c.kind,
                    "unit": c.unit,
                    "ucd": c.ucd,
                    "description": c.description,
                }
                for c in self.tdef.columns
            ],
        }

    @classmethod
    def from_obj(cls, name: str, obj: dict) -> "TableDescription":
        tdef = TableDef(
            name=name,
            columns=tuple(ColumnMeta(**c) for c in obj["columns"]),
            primary_key=obj["primary_key"],
            spatial=tuple(obj["spatial"]) if obj.get("spatial") else None,
        )
        return cls(tdef, int(obj["cardinality"]))


@dataclass(frozen=True)
class ServiceDescription:
    archive: str
    schema_version: str
    capabilities: tuple[str, ...]
    tables: Mapping[str, TableDescription]
    base_path: str = "/"

    def __post_init__(self):
        if not self.capabilities:
            raise ValueError("capability list must be non-empty")
        if any(t.cardinality < 0 for t in self.tables.values()):
            raise ValueError("cardinalities must be non-negative")

    def to_obj(self) -> dict:
        return {
            "archive": self.archive,
            "schema_version": self.schema_version,
            "capabilities": list(self.capabilities),
            "base_path": self.base_path,
            "tables": {n: t.to_obj() for n, t in sorted(self.tables.items())},
        }

    @classmethod
    def from_obj(cls, obj: dict) -> "ServiceDescription":
        return cls(
            archive=obj["archive"],
            schema_version=obj["schema_version"],
            capabilities=tuple(obj["capabilities"]),
            tables={
                n: TableDescription.from_obj(n, t) for n, t in obj["tables"].items()
            },
            base_path=obj.get("base_path", "/"),
        )


Columnar = tuple[list[ColumnMeta], dict[str, np.ndarray]]


class ArchiveClient(Protocol):
    """Read access to one archive: description, filtered fetch, cone search."""

    def describe(self) -> ServiceDescription: ...

    def fetch(
        self,
        table: str,
        cone: Cone | None,
        predicates: Iterable[tuple[str, str, object]],
        columns: Iterable[str] | None,
    ) -> Columnar: ...

    def cone(self, table: str, ra: float, dec: float, sr_deg: float) -> Columnar: ...


class LocalArchiveClient:
    """In-process client pinned to one immutable edition snapshot."""

    def __init__(self, name: str, catalog: Catalog, edition: EditionView | None = None):
        self.name = name
        self.catalog = catalog
        self.edition = edition if edition is not None else catalog.latest_edition()

    def describe(self) -> ServiceDescription:
        tables = {}
        for t in self.edition.table_names:
            tdata = self.edition.table(t)
            tables[t] = TableDescription(tdata.tdef, tdata.row_count)
        return ServiceDescription(
            archive=self.name,
            schema_version=f"edition-{self.edition.number}",
            capabilities=("cone", "cutout", "query"),
            tables=tables,
        )

    def fetch(self, table, cone, predicates, columns) -> Columnar:
        return self.catalog.filter_select(
            self.edition, table, predicates or (), cone=cone, columns=columns
        )

    def cone(self, table, ra, dec, sr_deg) -> Columnar:
        return self.fetch(table, Cone(SkyCoord(ra, dec), sr_deg), (), None)


def columnar_from_document(doc: TabularDocument) -> Columnar:
    """Rebuild column arrays from a wire document."""
    kinds = {"integer": np.int64, "real": np.float64, "flag": np.uint8}
    cols: dict[str, np.ndarray] = {}
    for j, c in enumerate(doc.columns):
        vals = [r[j] for r in doc.rows]
        if c.kind == "text":
            cols[c.name] = np.array(vals, dtype=object)
        else:
            cols[c.name] = np.array(vals, dtype=kinds[c.kind])
    return list(doc.columns), cols


class HttpArchiveClient:
    """Client for a remote archive node speaking the HTTP interface."""

    def __init__(self, base_url: str, http=None):
        import httpx

        self.base_url = base_url.rstrip("/")
        self.http = http if http is not None else httpx.Client()
        self._description: ServiceDescription | None = None

    def _request(self, method: str, path: str, **kw):
        import httpx

        try:
            r = self.http.request(method, self.base_url + path, **kw)
        except httpx.HTTPError as e:
            raise ArchiveUnreachableError(f"{self.base_url}: {e}") from e
        if r.status_code >= 500:
            raise ArchiveUnreachableError(f"{self.base_url}{path}: HTTP {r.status_code}")
        return r

    def describe(self) -> ServiceDescription:
        if self._description is None:
            self._description = ServiceDescription.from_obj(
                self._request("GET", "/describe").json()
            )
        return self._description

    def _document(self, r) -> TabularDocument:
        doc = from_json_obj(r.json())
        if doc.status == "error":
            if doc.code == "quota":
                from .query.executor import QuotaExceededError

                raise QuotaExceededError(doc.message)
            raise SchemaError(f"archive error [{doc.code}]: {doc.message}")
        return doc

    def fetch(self, table, cone, predicates, columns) -> Columnar:
        from .query.ast import (
            ColumnRef,
            Comparison,
            ConePredicate,
            QueryAst,
            SourceRef,
            print_query,
        )

        name = self.describe().archive
        where = []
        if cone is not None:
            where.append(ConePredicate(cone.center.ra, cone.center.dec, cone.radius))
        for col, op, value in predicates or ():
            where.append(Comparison(ColumnRef(col), op, value))
        ast = QueryAst(
            select=tuple(ColumnRef(c) for c in columns) if columns else None,
            source=SourceRef(name, table),
            where=tuple(where),
        )
        r = self._request(
            "POST",
            "/query",
            json={"text": print_query(ast), "tier": "collaboration", "format": "json"},
        )
        return columnar_from_document(self._document(r))

    def cone(self, table, ra, dec, sr_deg) -> Columnar:
        r = self._request(
            "GET",
            "/cone",
            params={"ra": ra, "dec": dec, "sr": sr_deg, "table": table, "format": "json"},
        )
        return columnar_from_document(self._document(r))
