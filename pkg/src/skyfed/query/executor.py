"""Plan executor: fetch, cross-match chaining, deterministic ordering,
row-cap truncation, elapsed-budget enforcement, and workspace deposit."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..catalog.schema import ColumnMeta
from ..catalog.store import columnar_to_rows
from ..clients import ArchiveClient
from ..sphere import Cone, SkyCoord, angular_distance_batch
from .planner import DepositStep, FetchStep, QueryPlan, TruncateStep, XMatchStep

BUDGET_BATCH_ROWS = 1024


class QuotaExceededError(RuntimeError):
    """The elapsed budget was exhausted; nothing is deposited."""


class ExecError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExecLimits:
    elapsed_s: float
    row_cap: int


@dataclass
class TableResult:
    columns: list[ColumnMeta]
    rows: list[tuple]
    truncated: bool = False

    @property
    def rows_emitted(self) -> int:
        return len(self.rows)


@dataclass
class _SourceData:
    meta: dict[str, ColumnMeta]
    arrays: dict[str, np.ndarray]
    pk: str
    spatial: tuple[str, str] | None


def execute(
    plan: QueryPlan,
    clients: Mapping[str, ArchiveClient],
    limits: ExecLimits,
    deposit: Callable[[str, TableResult], None] | None = None,
    clock: Callable[[], float] = time.monotonic,
) -> TableResult:
    deadline = clock() + limits.elapsed_s

    def check_budget():
        if clock() > deadline:
            raise QuotaExceededError(
                f"elapsed budget of {limits.elapsed_s} s exceeded"
            )

    chain: list[_SourceData] = []
    limit: int | None = None
    into: str | None = None

    for step in plan.steps:
        if isinstance(step, FetchStep):
            client = clients.get(step.source.archive)
            if client is None:
                raise ExecError(f"no client for archive {step.source.archive!r}")
            meta, cols = client.fetch(
                step.source.table, step.cone, step.predicates, step.columns
            )
            desc = client.describe().tables[step.source.table]
            chain.append(
                _SourceData(
                    meta={m.name: m for m in meta},
                    arrays=cols,
                    pk=desc.tdef.primary_key,
                    spatial=desc.tdef.spatial,
                )
            )
            check_budget()
        elif isinstance(step, XMatchStep):
            chain_step = _xmatch(
                chain, step, clients, check_budget
            )
            chain.append(chain_step)
        elif isinstance(step, TruncateStep):
            limit = step.limit
        elif isinstance(step, DepositStep):
            into = step.table
        else:
            raise ExecError(f"unknown plan step {step!r}")

    seed = chain[0]
    n = len(seed.arrays[seed.pk])
    order = np.argsort(seed.arrays[seed.pk], kind="stable")
    cap = limits.row_cap if limit is None else min(limit, limits.row_cap)
    truncated = n > cap
    order = order[:cap]
    check_budget()

    out_meta: list[ColumnMeta] = []
    names: list[str] = []
    cols: dict[str, np.ndarray] = {}
    for oc in plan.output:
        src = chain[oc.ordinal]
        m = src.meta[oc.column]
        out_meta.append(
            ColumnMeta(oc.out_name, m.kind, m.unit, m.ucd, m.description)
        )
        names.append(oc.out_name)
        cols[oc.out_name] = src.arrays[oc.column][order]
    result = TableResult(
        columns=out_meta,
        rows=columnar_to_rows(names, cols),
        truncated=truncated,
    )
    if into is not None:
        if deposit is None:
            raise ExecError("query has an INTO target but no workspace is attached")
        check_budget()
        deposit(into, result)
    return result


def _xmatch(chain, step: XMatchStep, clients, check_budget) -> _SourceData:
    client = clients.get(step.source.archive)
    if client is None:
        raise ExecError(f"no client for archive {step.source.archive!r}")
    desc = client.describe().tables[step.source.table]
    pk_col = desc.tdef.primary_key
    if desc.tdef.spatial is None:
        raise ExecError(f"{step.source} is not spatial")
    tol_deg = step.tolerance_arcsec / 3600.0

    seed = chain[0]
    ra_col, dec_col = seed.spatial
    seed_ra = seed.arrays[ra_col]
    seed_dec = seed.arrays[dec_col]
    n = len(seed_ra)

    keep = np.zeros(n, dtype=bool)
    matched_rows: list[dict] = []
    meta_by_name: dict[str, ColumnMeta] | None = None

    for start in range(0, n, BUDGET_BATCH_ROWS):
        check_budget()
        for i in range(start, min(start + BUDGET_BATCH_ROWS, n)):
            center = SkyCoord(float(seed_ra[i]), float(seed_dec[i]))
            meta, cand = client.fetch(
                step.source.table,
                Cone(center, tol_deg),
                step.predicates,
                step.columns,
            )
            if meta_by_name is None:
                meta_by_name = {m.name: m for m in meta}
            cra, cdec = desc.tdef.spatial
            m = len(cand[pk_col])
            if m == 0:
                continue
            d = angular_distance_batch(cand[cra], cand[cdec], center)
            ok = d <= tol_deg
            if not ok.any():
                continue
            idx = np.flatnonzero(ok)
            best = idx[np.lexsort((cand[pk_col][idx], d[idx]))[0]]
            keep[i] = True
            matched_rows.append({c: cand[c][best] for c in cand})

    # drop unmatched tuples from every source gathered so far
    for src in chain:
        src.arrays = {c: v[keep] for c, v in src.arrays.items()}

    if meta_by_name is None:
        # no candidate query answered; synthesize metadata from the description
        meta_by_name = {c: desc.tdef.column(c) for c in step.columns}
    arrays: dict[str, np.ndarray] = {}
    for c in step.columns:
        vals = [r[c] for r in matched_rows]
        kind = meta_by_name[c].kind
        if kind == "text":
            arrays[c] = np.array(vals, dtype=object)
        else:
            dtype = {"integer": np.int64, "real": np.float64, "flag": np.uint8}[kind]
            arrays[c] = np.array(vals, dtype=dtype)
    return _SourceData(
        meta=meta_by_name,
        arrays=arrays,
        pk=pk_col,
        spatial=desc.tdef.spatial,
    )
