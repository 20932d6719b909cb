"""Spine-schema definitions: typed columns tagged with a controlled UCD
vocabulary, declared keys/foreign keys, and auto-generated documentation.

Schema files are declarative text::

    table photo_obj
      key id
      spatial ra dec
      column id integer - meta.id "Unique photometric object id"
      fk spec_id spec_obj id
    end

Units use ``-`` for dimensionless; descriptions are quoted strings.
"""

from __future__ import annotations

import html
import shlex
from dataclasses import dataclass, field
from importlib import resources

COLUMN_KINDS = ("integer", "real", "text", "flag")


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    kind: str
    unit: str = ""
    ucd: str = ""
    description: str = ""

    def __post_init__(self):
        if self.kind not in COLUMN_KINDS:
            raise SchemaError(f"column {self.name}: unknown kind {self.kind!r}")


@dataclass(frozen=True)
class ForeignKey:
    column: str
    target_table: str
    target_column: str


@dataclass(frozen=True)
class TableDef:
    name: str
    columns: tuple[ColumnMeta, ...]
    primary_key: str
    foreign_keys: tuple[ForeignKey, ...] = ()
    spatial: tuple[str, str] | None = None  # (ra column, dec column)

    def column(self, name: str) -> ColumnMeta:
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"table {self.name}: no column {name!r}")

    def has_column(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)


def load_ucd_vocabulary() -> frozenset[str]:
    text = resources.files("skyfed.data").joinpath("ucd_words.txt").read_text()
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line)
    return frozenset(words)


def load_example_schema() -> dict[str, TableDef]:
    text = resources.files("skyfed.data").joinpath("spine_schema.txt").read_text()
    return parse_schema(text)


def parse_schema(text: str) -> dict[str, TableDef]:
    """Parse a schema document into an ordered table map."""
    tables: dict[str, TableDef] = {}
    cur: str | None = None
    columns: list[ColumnMeta] = []
    fks: list[ForeignKey] = []
    key: str | None = None
    spatial: tuple[str, str] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        try:
            parts = shlex.split(raw, comments=True)
        except ValueError as e:
            raise SchemaError(f"line {lineno}: {e}") from None
        if not parts:
            continue
        kw, args = parts[0], parts[1:]
        if kw == "table":
            if cur is not None:
                raise SchemaError(f"line {lineno}: nested table declaration")
            if len(args) != 1:
                raise SchemaError(f"line {lineno}: table takes one name")
            cur, columns, fks, key, spatial = args[0], [], [], None, None
        elif cur is None:
            raise SchemaError(f"line {lineno}: {kw!r} outside a table block")
        elif kw == "key":
            key = args[0]
        elif kw == "spatial":
            if len(args) != 2:
                raise SchemaError(f"line {lineno}: spatial takes ra and dec columns")
            spatial = (args[0], args[1])
        elif kw == "column":
            if len(args) != 5:
                raise SchemaError(
                    f"line {lineno}: column takes name kind unit ucd description"
                )
            name, kind, unit, ucd, desc = args
            columns.append(
                ColumnMeta(name, kind, "" if unit == "-" else unit, ucd, desc)
            )
        elif kw == "fk":
            if len(args) != 3:
                raise SchemaError(f"line {lineno}: fk takes column table target")
            fks.append(ForeignKey(*args))
        elif kw == "end":
            if key is None:
                raise SchemaError(f"table {cur}: missing key declaration")
            if cur in tables:
                raise SchemaError(f"duplicate table {cur}")
            tables[cur] = TableDef(cur, tuple(columns), key, tuple(fks), spatial)
            cur = None
        else:
            raise SchemaError(f"line {lineno}: unknown keyword {kw!r}")
    if cur is not None:
        raise SchemaError(f"table {cur}: missing end")
    return tables


def validate_schema(
    tables: dict[str, TableDef], vocabulary: frozenset[str] | None = None
) -> list[str]:
    """Check every table invariant; returns violation strings (empty = ok)."""
    vocab = vocabulary if vocabulary is not None else load_ucd_vocabulary()
    violations: list[str] = []
    for t in tables.values():
        seen: set[str] = set()
        for c in t.columns:
            if c.name in seen:
                violations.append(f"{t.name}: duplicate column {c.name!r}")
            seen.add(c.name)
            if c.ucd and c.ucd not in vocab:
                violations.append(f"{t.name}.{c.name}: unknown UCD {c.ucd!r}")
        if t.primary_key not in seen:
            violations.append(f"{t.name}: primary key {t.primary_key!r} is not a column")
        for fk in t.foreign_keys:
            if fk.column not in seen:
                violations.append(f"{t.name}: foreign key column {fk.column!r} missing")
            target = tables.get(fk.target_table)
            if target is None:
                violations.append(
                    f"{t.name}.{fk.column}: dangling foreign key to {fk.target_table!r}"
                )
            elif not target.has_column(fk.target_column):
                violations.append(
                    f"{t.name}.{fk.column}: dangling foreign key to "
                    f"{fk.target_table}.{fk.target_column}"
                )
        if t.spatial is not None:
            for col in t.spatial:
                if col not in seen:
                    violations.append(f"{t.name}: spatial column {col!r} missing")
                elif t.column(col).kind != "real":
                    violations.append(f"{t.name}: spatial column {col!r} is not real")
    return violations


def format_schema(tables: dict[str, TableDef]) -> str:
    """Canonical text rendering; parse(format(s)) == s."""
    out: list[str] = []
    for t in tables.values():
        out.append(f"table {t.name}")
        out.append(f"  key {t.primary_key}")
        if t.spatial:
            out.append(f"  spatial {t.spatial[0]} {t.spatial[1]}")
        for c in t.columns:
            unit = c.unit or "-"
            out.append(
                f"  column {c.name} {c.kind} {unit} {c.ucd} {shlex.quote(c.description)}"
            )
        for fk in t.foreign_keys:
            out.append(f"  fk {fk.column} {fk.target_table} {fk.target_column}")
        out.append("end")
        out.append("")
    return "\n".join(out)


def generate_docs(tables: dict[str, TableDef]) -> dict[str, str]:
    """One deterministic hypertext page per table, straight from the schema."""
    docs: dict[str, str] = {}
    for t in tables.values():
        rows = []
        for c in t.columns:
            rows.append(
                "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>".format(
                    html.escape(c.name),
                    html.escape(c.kind),
                    html.escape(c.unit),
                    html.escape(c.ucd),
                    html.escape(c.description),
                )
            )
        notes = [f"Primary key: <code>{html.escape(t.primary_key)}</code>"]
        if t.spatial:
            notes.append(
                "Spatial columns: <code>{}</code>, <code>{}</code>".format(
                    html.escape(t.spatial[0]), html.escape(t.spatial[1])
                )
            )
        for fk in t.foreign_keys:
            notes.append(
                "Foreign key: <code>{}</code> references <code>{}.{}</code>".format(
                    html.escape(fk.column),
                    html.escape(fk.target_table),
                    html.escape(fk.target_column),
                )
            )
        docs[t.name] = (
            "<!DOCTYPE html>\n<html><head><title>{name}</title></head><body>\n"
            "<h1>Table {name}</h1>\n<p>{notes}</p>\n"
            "<table border=\"1\">\n"
            "<tr><th>name</th><th>kind</th><th>unit</th><th>ucd</th>"
            "<th>description</th></tr>\n{rows}\n</table>\n</body></html>\n"
        ).format(
            name=html.escape(t.name),
            notes="<br>".join(notes),
            rows="\n".join(rows),
        )
    return docs
