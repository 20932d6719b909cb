"""File-backed catalog store with immutable, atomically published editions.

Each load validates a delimited-text stream against the schema, computes
mesh cells for spatial rows, and writes a new numbered edition directory:
one binary file per column, rows sorted by (trixel, primary key), plus a
sparse trixel range index. Published editions are never modified; readers
hold an edition snapshot for as long as they like.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np
import pandas as pd

from .. import sphere
from ..sphere import Cone, SkyCoord, TrixelId
from .schema import ColumnMeta, SchemaError, TableDef, validate_schema

PYRAMID_SEED = np.uint64(0x5DEECE66D_2026)
SPARSE_INDEX_STRIDE = 1024


class LoadError(ValueError):
    """Raised when a load cannot publish an edition at all."""


@dataclass
class LoadReport:
    rows_read: int
    rows_loaded: int
    rows_rejected: int
    rejections: list[tuple[str, int, str]]  # (table, line number, rule)
    edition: int
    checksum: str


@dataclass(frozen=True)
class CatalogObject:
    id: int
    coord: SkyCoord
    trixel: TrixelId
    values: dict


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x.astype(np.uint64) + np.uint64(0x9E3779B97F4A7C15) + PYRAMID_SEED
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def pyramid_hash_keep(pk: np.ndarray, fraction: float) -> np.ndarray:
    """Deterministic membership rule for data-pyramid subsets: keep a row iff
    its hashed primary key falls under fraction * 2^64. Nested by design."""
    if fraction >= 1.0:
        return np.ones(len(pk), dtype=bool)
    threshold = np.uint64(int(fraction * float(2**64)))
    return _splitmix64(pk.astype(np.uint64)) < threshold


_KIND_DTYPE = {"integer": np.int64, "real": np.float64, "flag": np.uint8}


@dataclass
class TableData:
    """One table of a loaded edition, columnar in memory."""

    tdef: TableDef
    arrays: dict[str, np.ndarray]
    trixel: np.ndarray | None  # sorted paths at index depth, or None

    @property
    def row_count(self) -> int:
        return len(self.arrays[self.tdef.primary_key])

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        ra_col, dec_col = self.tdef.spatial
        return self.arrays[ra_col], self.arrays[dec_col]


class EditionView:
    """Read-only view of a published edition; safe to share across threads."""

    def __init__(self, path: Path, index_depth: int):
        self.path = path
        self.index_depth = index_depth
        with open(path / "MANIFEST.json") as f:
            self.manifest = json.load(f)
        self.number: int = self.manifest["edition"]
        self.checksum: str = self.manifest["checksum"]
        self._tables: dict[str, TableData] = {}
        self._lock = threading.Lock()

    @property
    def table_names(self) -> list[str]:
        return sorted(self.manifest["tables"])

    def row_count(self, table: str) -> int:
        return self.manifest["tables"][table]["row_count"]

    def table_def(self, table: str) -> TableDef:
        return self.table(table).tdef

    def table(self, name: str) -> TableData:
        with self._lock:
            if name not in self._tables:
                if name not in self.manifest["tables"]:
                    raise SchemaError(f"edition {self.number}: no table {name!r}")
                self._tables[name] = self._read_table(name)
            return self._tables[name]

    def _read_table(self, name: str) -> TableData:
        tdir = self.path / name
        with open(tdir / "table.json") as f:
            meta = json.load(f)
        tdef = TableDef(
            name=meta["name"],
            columns=tuple(ColumnMeta(**c) for c in meta["columns"]),
            primary_key=meta["primary_key"],
            foreign_keys=(),
            spatial=tuple(meta["spatial"]) if meta["spatial"] else None,
        )
        arrays: dict[str, np.ndarray] = {}
        for c in tdef.columns:
            if c.kind == "text":
                raw = (tdir / f"{c.name}.txt").read_text(encoding="utf-8")
                vals = raw.split("\n")[:-1] if raw else []
                arrays[c.name] = np.array(vals, dtype=object)
            else:
                arrays[c.name] = np.load(tdir / f"{c.name}.npy")
        trixel = None
        if tdef.spatial and (tdir / "_trixel.npy").exists():
            trixel = np.load(tdir / "_trixel.npy")
        return TableData(tdef, arrays, trixel)


class Catalog:
    """A schema plus its editions on disk. Single writer, many readers."""

    def __init__(
        self,
        root: str | Path,
        schema: dict[str, TableDef],
        index_depth: int = sphere.DEFAULT_INDEX_DEPTH,
        delimiter: str = ",",
    ):
        violations = validate_schema(schema)
        if violations:
            raise SchemaError("invalid schema: " + "; ".join(violations))
        self.root = Path(root)
        self.schema = schema
        self.index_depth = index_depth
        self.delimiter = delimiter
        (self.root / "editions").mkdir(parents=True, exist_ok=True)
        self._write_lock = threading.Lock()
        self._views: dict[int, EditionView] = {}
        self._views_lock = threading.Lock()

    # -- edition bookkeeping ------------------------------------------------

    def edition_numbers(self) -> list[int]:
        out = []
        for p in (self.root / "editions").iterdir():
            if p.is_dir() and p.name.isdigit():
                out.append(int(p.name))
        return sorted(out)

    def latest_edition(self) -> EditionView:
        nums = self.edition_numbers()
        if not nums:
            raise LoadError("no edition published yet")
        return self.edition(nums[-1])

    def edition(self, number: int) -> EditionView:
        with self._views_lock:
            if number not in self._views:
                path = self.root / "editions" / f"{number:06d}"
                if not path.is_dir():
                    raise LoadError(f"no edition {number}")
                self._views[number] = EditionView(path, self.index_depth)
            return self._views[number]

    # -- loading ------------------------------------------------------------

    def load_tables(self, data: Mapping[str, str | Path | IO[str]]) -> LoadReport:
        """Validate and load one delimited-text stream per table, then publish
        a new edition atomically. Individual bad rows are reported and
        skipped; a table rejecting more than half its rows aborts the load."""
        with self._write_lock:
            staged: dict[str, dict[str, np.ndarray]] = {}
            report_rejections: list[tuple[str, int, str]] = []
            rows_read = 0
            line_nos: dict[str, np.ndarray] = {}
            rules: dict[str, np.ndarray] = {}

            for name in self.schema:
                tdef = self.schema[name]
                stream = data.get(name)
                frame = self._read_frame(name, tdef, stream)
                rows_read += len(frame)
                cols, rule = self._convert_table(tdef, frame)
                staged[name] = cols
                rules[name] = rule
                line_nos[name] = np.arange(2, len(frame) + 2, dtype=np.int64)

            # referential integrity against co-loaded targets, in an order
            # where targets are finalized before their referrers
            for name in self._fk_order():
                tdef = self.schema[name]
                rule = rules[name]
                for fk in tdef.foreign_keys:
                    target_rule = rules[fk.target_table]
                    target_cols = staged[fk.target_table]
                    target_ok = target_cols[fk.target_column][target_rule == ""]
                    vals = staged[name][fk.column]
                    bad = ~np.isin(vals, target_ok) & (rule == "")
                    rule[bad] = "integrity check"

            edition_tables: dict[str, TableData] = {}
            rows_loaded = 0
            rows_rejected = 0
            for name, tdef in self.schema.items():
                rule = rules[name]
                rejected = rule != ""
                n_rej = int(rejected.sum())
                n_all = len(rule)
                if n_all and n_rej * 2 > n_all:
                    raise LoadError(
                        f"table {name}: {n_rej} of {n_all} rows rejected; load aborted"
                    )
                for ln, ru in zip(line_nos[name][rejected], rule[rejected]):
                    report_rejections.append((name, int(ln), str(ru)))
                rows_rejected += n_rej
                keep = ~rejected
                arrays = {c: v[keep] for c, v in staged[name].items()}
                edition_tables[name] = self._finalize_table(tdef, arrays)
                rows_loaded += int(keep.sum())

            edition, checksum = self._publish(edition_tables, {"source": "load"})
            return LoadReport(
                rows_read=rows_read,
                rows_loaded=rows_loaded,
                rows_rejected=rows_rejected,
                rejections=report_rejections,
                edition=edition,
                checksum=checksum,
            )

    def _fk_order(self) -> list[str]:
        # topological-ish: referenced tables first; declaration order on cycles
        order: list[str] = []
        seen: set[str] = set()

        def visit(name: str, stack: set[str]):
            if name in seen or name in stack:
                return
            stack.add(name)
            for fk in self.schema[name].foreign_keys:
                if fk.target_table in self.schema:
                    visit(fk.target_table, stack)
            stack.discard(name)
            seen.add(name)
            order.append(name)

        for name in self.schema:
            visit(name, set())
        return order

    def _read_frame(self, name, tdef: TableDef, stream) -> pd.DataFrame:
        if stream is None:
            return pd.DataFrame({c: pd.Series(dtype=str) for c in tdef.column_names})
        if isinstance(stream, (str, Path)):
            stream = open(stream, "r", encoding="utf-8")
        try:
            frame = pd.read_csv(
                stream, sep=self.delimiter, dtype=str, keep_default_na=False
            )
        except Exception as e:
            raise LoadError(f"table {name}: unreadable stream: {e}") from e
        if tuple(frame.columns) != tdef.column_names:
            raise LoadError(
                f"table {name}: header {list(frame.columns)} does not match "
                f"schema columns {list(tdef.column_names)}"
            )
        return frame

    def _convert_table(self, tdef: TableDef, frame: pd.DataFrame):
        n = len(frame)
        rule = np.full(n, "", dtype=object)
        cols: dict[str, np.ndarray] = {}
        for c in tdef.columns:
            raw = frame[c.name]
            if c.kind == "text":
                cols[c.name] = raw.to_numpy(dtype=object)
                continue
            objs = raw.to_numpy(dtype=object)
            if c.kind == "integer":
                try:
                    # fast exact path; preserves ids beyond 2^53
                    out = objs.astype(np.int64)
                    bad = np.zeros(len(objs), dtype=bool)
                except (ValueError, OverflowError):
                    vals = pd.to_numeric(raw, errors="coerce").to_numpy(
                        dtype=np.float64, na_value=np.nan
                    )
                    bad = ~np.isfinite(vals)
                    bad |= np.where(~bad, vals != np.floor(vals), False)
                    out = np.where(bad, 0.0, vals).astype(np.int64)
            else:
                vals = pd.to_numeric(raw, errors="coerce").to_numpy(
                    dtype=np.float64, na_value=np.nan
                )
                bad = ~np.isfinite(vals)
                if c.kind == "flag":
                    bad |= ~np.isin(vals, (0.0, 1.0))
                    out = np.where(bad, 0.0, vals).astype(np.uint8)
                else:
                    # the fast parser is not round-trip exact; reparse good cells
                    out = np.zeros(len(objs), dtype=np.float64)
                    if (~bad).any():
                        out[~bad] = objs[~bad].astype(np.float64)
            rule[bad & (rule == "")] = "type"
            cols[c.name] = out
        if tdef.spatial:
            ra_col, dec_col = tdef.spatial
            dec = cols[dec_col]
            out_of_range = (dec < -90.0) | (dec > 90.0)
            rule[out_of_range & (rule == "")] = "range"
            cols[ra_col] = np.mod(cols[ra_col], 360.0)
        pk = cols[tdef.primary_key]
        dup = pd.Series(pk).duplicated(keep="first").to_numpy()
        rule[dup & (rule == "")] = "duplicate key"
        return cols, rule

    def _finalize_table(self, tdef: TableDef, arrays: dict[str, np.ndarray]) -> TableData:
        pk = arrays[tdef.primary_key]
        if tdef.spatial:
            ra, dec = arrays[tdef.spatial[0]], arrays[tdef.spatial[1]]
            trixel = sphere.trixel_of_batch(ra, dec, self.index_depth)
            order = np.lexsort((pk, trixel))
            trixel = trixel[order]
        else:
            trixel = None
            order = np.argsort(pk, kind="stable")
        arrays = {c: v[order] for c, v in arrays.items()}
        return TableData(tdef, arrays, trixel)

    def _publish(self, tables: dict[str, TableData], extra_manifest: dict):
        editions_dir = self.root / "editions"
        tmp = Path(tempfile.mkdtemp(prefix=".tmp-edition-", dir=self.root))
        try:
            file_hashes: list[tuple[str, str, str]] = []
            manifest_tables = {}
            for name, tdata in tables.items():
                tdir = tmp / name
                tdir.mkdir()
                for c in tdata.tdef.columns:
                    vals = tdata.arrays[c.name]
                    if c.kind == "text":
                        fname = f"{c.name}.txt"
                        payload = "".join(str(v) + "\n" for v in vals).encode("utf-8")
                        (tdir / fname).write_bytes(payload)
                    else:
                        fname = f"{c.name}.npy"
                        with open(tdir / fname, "wb") as f:
                            np.save(f, vals)
                    digest = hashlib.sha256((tdir / fname).read_bytes()).hexdigest()
                    file_hashes.append((name, fname, digest))
                if tdata.trixel is not None:
                    with open(tdir / "_trixel.npy", "wb") as f:
                        np.save(f, tdata.trixel)
                    digest = hashlib.sha256((tdir / "_trixel.npy").read_bytes()).hexdigest()
                    file_hashes.append((name, "_trixel.npy", digest))
                    sparse = [
                        [int(tdata.trixel[i]), i]
                        for i in range(0, len(tdata.trixel), SPARSE_INDEX_STRIDE)
                    ]
                    (tdir / "_sparse_index.json").write_text(
                        json.dumps({"depth": self.index_depth, "entries": sparse})
                    )
                with open(tdir / "table.json", "w") as f:
                    json.dump(
                        {
                            "name": name,
                            "primary_key": tdata.tdef.primary_key,
                            "spatial": list(tdata.tdef.spatial) if tdata.tdef.spatial else None,
                            "columns": [
                                {
                                    "name": c.name,
                                    "kind": c.kind,
                                    "unit": c.unit,
                                    "ucd": c.ucd,
                                    "description": c.description,
                                }
                                for c in tdata.tdef.columns
                            ],
                        },
                        f,
                        sort_keys=True,
                    )
                manifest_tables[name] = {"row_count": tdata.row_count}

            summary = "".join(
                f"{t}/{f}:{h}\n" for t, f, h in sorted(file_hashes)
            ).encode()
            checksum = hashlib.sha256(summary).hexdigest()

            with self._views_lock:
                nums = self.edition_numbers()
                edition = (nums[-1] + 1) if nums else 1
                manifest = {
                    "edition": edition,
                    "index_depth": self.index_depth,
                    "tables": manifest_tables,
                    "checksum": checksum,
                    **extra_manifest,
                }
                with open(tmp / "MANIFEST.json", "w") as f:
                    json.dump(manifest, f, sort_keys=True, indent=1)
                os.replace(tmp, editions_dir / f"{edition:06d}")
            return edition, checksum
        except Exception:
            import shutil

            shutil.rmtree(tmp, ignore_errors=True)
            raise

    # -- export and pyramid ---------------------------------------------------

    def export_table(self, edition: EditionView, table: str) -> str:
        """Delimited text in the load format, one header row then data rows."""
        tdata = edition.table(table)
        buf = io.StringIO()
        w = csv.writer(buf, delimiter=self.delimiter, lineterminator="\n")
        w.writerow(tdata.tdef.column_names)
        cols = [tdata.arrays[c] for c in tdata.tdef.column_names]
        for row in zip(*cols):
            w.writerow([_plain(v) for v in row])
        return buf.getvalue()

    def make_pyramid(
        self, edition: EditionView, fractions: Iterable[float]
    ) -> list[tuple[float, int]]:
        """Publish nested hash-selected subset editions, one per fraction."""
        fractions = list(fractions)
        if any(not (0.0 < f <= 1.0) for f in fractions):
            raise LoadError(f"pyramid fractions must lie in (0, 1]: {fractions}")
        if sorted(fractions) != fractions:
            raise LoadError("pyramid fractions must be ascending")
        out = []
        with self._write_lock:
            for frac in fractions:
                tables: dict[str, TableData] = {}
                for name in self.schema:
                    tdata = edition.table(name)
                    pk = tdata.arrays[tdata.tdef.primary_key]
                    # membership is a pure function of the hashed primary key,
                    # so subsets nest and are spatially unbiased; foreign keys
                    # may dangle inside a subset (integrity is a load contract)
                    keep = pyramid_hash_keep(pk, frac)
                    tables[name] = TableData(
                        tdata.tdef,
                        {c: v[keep] for c, v in tdata.arrays.items()},
                        tdata.trixel[keep] if tdata.trixel is not None else None,
                    )
                num, _ = self._publish(
                    tables,
                    {"source": "pyramid", "fraction": frac, "parent": edition.number},
                )
                out.append((frac, num))
        return out

    # -- selection ------------------------------------------------------------

    def cone_indices(self, tdata: TableData, cone: Cone) -> np.ndarray:
        """Row indices inside the cone, via a trixel-range scan plus exact
        filtering of boundary trixels. Sorted ascending."""
        if tdata.trixel is None:
            raise SchemaError(f"table {tdata.tdef.name} has no spatial index")
        cov = sphere.cover(cone, sphere.pick_cover_depth(cone.radius, self.index_depth))
        full_r, part_r = sphere.cover_paths_at(cov, self.index_depth)
        trix = tdata.trixel
        chunks: list[np.ndarray] = []
        if len(full_r):
            starts = np.searchsorted(trix, full_r[:, 0], side="left")
            ends = np.searchsorted(trix, full_r[:, 1], side="left")
            chunks += [np.arange(s, e) for s, e in zip(starts, ends) if e > s]
        if len(part_r):
            starts = np.searchsorted(trix, part_r[:, 0], side="left")
            ends = np.searchsorted(trix, part_r[:, 1], side="left")
            cand = [np.arange(s, e) for s, e in zip(starts, ends) if e > s]
            if cand:
                cand = np.concatenate(cand)
                ra, dec = tdata.coords()
                d = sphere.angular_distance_batch(ra[cand], dec[cand], cone.center)
                chunks.append(cand[d <= cone.radius])
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(chunks))

    def scan_cone_indices(self, tdata: TableData, cone: Cone) -> np.ndarray:
        """Forced full scan (no index); the brute-force side of the dual route."""
        ra, dec = tdata.coords()
        d = sphere.angular_distance_batch(ra, dec, cone.center)
        return np.flatnonzero(d <= cone.radius)

    def cone_select(
        self, edition: EditionView, table: str, cone: Cone, use_index: bool = True
    ) -> list[CatalogObject]:
        tdata = edition.table(table)
        if tdata.tdef.spatial is None:
            raise SchemaError(f"table {table} is not spatial")
        idx = self.cone_indices(tdata, cone) if use_index else self.scan_cone_indices(tdata, cone)
        ra, dec = tdata.coords()
        pk = tdata.arrays[tdata.tdef.primary_key]
        out = []
        for i in idx:
            out.append(
                CatalogObject(
                    id=int(pk[i]),
                    coord=SkyCoord(float(ra[i]), float(dec[i])),
                    trixel=TrixelId(self.index_depth, int(tdata.trixel[i]))
                    if tdata.trixel is not None
                    else None,
                    values={c: _plain(tdata.arrays[c][i]) for c in tdata.tdef.column_names},
                )
            )
        return out

    def filter_select(
        self,
        edition: EditionView,
        table: str,
        predicates: Iterable[tuple[str, str, object]] = (),
        cone: Cone | None = None,
        columns: Iterable[str] | None = None,
    ) -> tuple[list[ColumnMeta], dict[str, np.ndarray]]:
        """Vectorized selection: optional cone via the index, then comparison
        predicates. Returns column metadata and matching column arrays,
        ordered by primary key."""
        tdata = edition.table(table)
        tdef = tdata.tdef
        if cone is not None:
            idx = self.cone_indices(tdata, cone)
        else:
            idx = np.arange(tdata.row_count)
        mask = np.ones(len(idx), dtype=bool)
        for col, op, value in predicates:
            vals = tdata.arrays[col][idx]
            kind = tdef.column(col).kind
            if kind == "text":
                vals = vals.astype(str)
                value = str(value)
            elif kind in ("integer", "flag"):
                if isinstance(value, float) and not value.is_integer():
                    # integer column never equals a fractional literal
                    if op == "=":
                        mask &= False
                        continue
                value = float(value)
                vals = vals.astype(np.float64)
            else:
                value = float(value)
            if op == "=":
                mask &= vals == value
            elif op == "<>":
                mask &= vals != value
            elif op == "<":
                mask &= vals < value
            elif op == ">":
                mask &= vals > value
            elif op == "<=":
                mask &= vals <= value
            elif op == ">=":
                mask &= vals >= value
            else:
                raise SchemaError(f"unknown operator {op!r}")
        idx = idx[mask]
        pk = tdata.arrays[tdef.primary_key][idx]
        idx = idx[np.argsort(pk, kind="stable")]
        names = list(columns) if columns is not None else list(tdef.column_names)
        meta = [tdef.column(n) for n in names]
        return meta, {n: tdata.arrays[n][idx] for n in names}


def _plain(v):
    """Native Python value for a stored cell."""
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return str(v) if not isinstance(v, (int, float, str)) else v


def columnar_to_rows(names: list[str], cols: dict[str, np.ndarray]) -> list[tuple]:
    arrays = [cols[n] for n in names]
    return [tuple(_plain(v) for v in row) for row in zip(*arrays)]
