"""Query AST and its canonical printer.

The surface language is a small SQL-like form::

    SELECT list FROM archive.table
      [XMATCH archive.table {, archive.table} WITHIN n ARCSEC]
      [WHERE predicate {AND predicate}]
      [LIMIT n] [INTO name]

Predicates are comparisons (= < > <= >= <>) and CONE(ra, dec, radius_deg).
The printer output is the normative serialization used in logs and job
records; parse(print(ast)) == ast.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class SourceRef:
    archive: str
    table: str

    def __str__(self) -> str:
        return f"{self.archive}.{self.table}"


@dataclass(frozen=True)
class ColumnRef:
    name: str
    qualifier: str | None = None  # archive name for cross-match queries

    def __str__(self) -> str:
        return f"{self.qualifier}.{self.name}" if self.qualifier else self.name


@dataclass(frozen=True)
class Comparison:
    column: ColumnRef
    op: str  # = < > <= >= <>
    value: Union[int, float, str]


@dataclass(frozen=True)
class ConePredicate:
    ra: float
    dec: float
    radius_deg: float


Predicate = Union[Comparison, ConePredicate]


class QueryError(ValueError):
    pass


@dataclass(frozen=True)
class QueryAst:
    select: tuple[ColumnRef, ...] | None  # None means '*'
    source: SourceRef
    xmatch: tuple[SourceRef, ...] = ()
    tolerance_arcsec: float | None = None
    where: tuple[Predicate, ...] = ()  # implicit conjunction
    limit: int | None = None
    into: str | None = None

    def __post_init__(self):
        if self.xmatch and not (self.tolerance_arcsec and self.tolerance_arcsec > 0):
            raise QueryError("XMATCH requires a positive WITHIN tolerance")
        if not self.xmatch and self.tolerance_arcsec is not None:
            raise QueryError("WITHIN tolerance without XMATCH sources")
        if self.limit is not None and self.limit < 1:
            raise QueryError("LIMIT must be at least 1")


def _literal(value) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _number(x: float) -> str:
    return repr(float(x))


def print_query(ast: QueryAst) -> str:
    """Canonical text form; stable across runs."""
    parts = []
    if ast.select is None:
        parts.append("SELECT *")
    else:
        parts.append("SELECT " + ", ".join(str(c) for c in ast.select))
    parts.append(f"FROM {ast.source}")
    if ast.xmatch:
        parts.append(
            "XMATCH "
            + ", ".join(str(s) for s in ast.xmatch)
            + f" WITHIN {_number(ast.tolerance_arcsec)} ARCSEC"
        )
    if ast.where:
        preds = []
        for p in ast.where:
            if isinstance(p, ConePredicate):
                preds.append(
                    f"CONE({_number(p.ra)}, {_number(p.dec)}, {_number(p.radius_deg)})"
                )
            else:
                preds.append(f"{p.column} {p.op} {_literal(p.value)}")
        parts.append("WHERE " + " AND ".join(preds))
    if ast.limit is not None:
        parts.append(f"LIMIT {ast.limit}")
    if ast.into is not None:
        parts.append(f"INTO {ast.into}")
    return " ".join(parts)
