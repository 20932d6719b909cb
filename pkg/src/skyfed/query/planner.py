"""Query planner: resolves names against registered service descriptions and
produces an ordered step list with predicates pushed to the owning archive."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..clients import ServiceDescription
from ..sphere import Cone, SkyCoord
from .ast import ColumnRef, Comparison, ConePredicate, QueryAst, SourceRef


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class FetchStep:
    """Remote fetch from the seed archive; cone and comparisons run there."""

    source: SourceRef
    ordinal: int  # position of this source in the match chain (always 0)
    cone: Cone | None
    predicates: tuple[tuple[str, str, object], ...]
    columns: tuple[str, ...]


@dataclass(frozen=True)
class XMatchStep:
    """Extend each tuple with the nearest neighbor from `source` within the
    tolerance, queried around the seed coordinate; no neighbor drops the tuple."""

    source: SourceRef
    ordinal: int
    tolerance_arcsec: float
    predicates: tuple[tuple[str, str, object], ...]
    columns: tuple[str, ...]


@dataclass(frozen=True)
class TruncateStep:
    limit: int | None  # query-level LIMIT; the tier row cap applies on top


@dataclass(frozen=True)
class DepositStep:
    table: str


@dataclass(frozen=True)
class OutputColumn:
    ordinal: int  # which chain position supplies the value
    column: str
    out_name: str


@dataclass(frozen=True)
class QueryPlan:
    steps: tuple
    output: tuple[OutputColumn, ...]
    order_key: str  # seed primary-key column (deterministic output order)


class RegistryView:
    """Planner view over a set of service descriptions keyed by archive."""

    def __init__(self, descriptions: Mapping[str, ServiceDescription]):
        self.descriptions = dict(descriptions)

    def description(self, archive: str) -> ServiceDescription:
        try:
            return self.descriptions[archive]
        except KeyError:
            raise PlanError(f"unknown archive {archive!r}") from None

    def table(self, ref: SourceRef):
        desc = self.description(ref.archive)
        try:
            return desc.tables[ref.table]
        except KeyError:
            raise PlanError(f"unknown table {ref.archive}.{ref.table}") from None


def plan(ast: QueryAst, registry: RegistryView) -> QueryPlan:
    sources = [ast.source, *ast.xmatch]
    descs = [registry.table(s) for s in sources]

    # smallest declared table first: it seeds the match chain
    order = sorted(range(len(sources)), key=lambda i: (descs[i].cardinality, i))
    position = {orig: pos for pos, orig in enumerate(order)}
    multi = len(sources) > 1

    def resolve(col: ColumnRef) -> int:
        """Original source index owning the column."""
        if col.qualifier is None:
            idx = 0
        else:
            hits = [i for i, s in enumerate(sources) if s.archive == col.qualifier]
            if not hits:
                raise PlanError(f"unknown archive {col.qualifier!r} in column {col}")
            idx = hits[0]
        if not descs[idx].tdef.has_column(col.name):
            raise PlanError(f"unknown column {col.name!r} in {sources[idx]}")
        return idx

    cone: Cone | None = None
    pushed: list[list[tuple[str, str, object]]] = [[] for _ in sources]
    for p in ast.where:
        if isinstance(p, ConePredicate):
            if cone is not None:
                raise PlanError("at most one CONE predicate is supported")
            cone = Cone(SkyCoord(p.ra, p.dec), p.radius_deg)
        else:
            idx = resolve(p.column)
            kind = descs[idx].tdef.column(p.column.name).kind
            if kind == "text" and not isinstance(p.value, str):
                raise PlanError(f"column {p.column} is text; literal must be a string")
            if kind != "text" and isinstance(p.value, str):
                raise PlanError(f"column {p.column} is numeric; literal must be a number")
            pushed[idx].append((p.column.name, p.op, p.value))

    output: list[OutputColumn] = []
    used: dict[str, int] = {}

    def out_name(idx: int, col: str) -> str:
        base = f"{sources[idx].archive}_{col}" if multi else col
        n = used.get(base, 0)
        used[base] = n + 1
        return base if n == 0 else f"{base}_{n + 1}"

    if ast.select is None:
        for idx in (order if multi else [0]):
            for c in descs[idx].tdef.columns:
                output.append(OutputColumn(position[idx], c.name, out_name(idx, c.name)))
    else:
        for col in ast.select:
            idx = resolve(col)
            output.append(OutputColumn(position[idx], col.name, out_name(idx, col.name)))

    def needed(idx: int) -> tuple[str, ...]:
        tdef = descs[idx].tdef
        want = [o.column for o in output if o.ordinal == position[idx]]
        extra = [tdef.primary_key]
        if tdef.spatial:
            extra += list(tdef.spatial)
        seen: list[str] = []
        for c in [*want, *extra]:
            if c not in seen:
                seen.append(c)
        return tuple(seen)

    seed = order[0]
    steps: list = [
        FetchStep(
            source=sources[seed],
            ordinal=0,
            cone=cone,
            predicates=tuple(pushed[seed]),
            columns=needed(seed),
        )
    ]
    for pos, idx in enumerate(order[1:], start=1):
        if descs[seed].tdef.spatial is None or descs[idx].tdef.spatial is None:
            raise PlanError(
                f"XMATCH requires spatial tables ({sources[seed]}, {sources[idx]})"
            )
        steps.append(
            XMatchStep(
                source=sources[idx],
                ordinal=pos,
                tolerance_arcsec=float(ast.tolerance_arcsec),
                predicates=tuple(pushed[idx]),
                columns=needed(idx),
            )
        )
    steps.append(TruncateStep(ast.limit))
    if ast.into:
        steps.append(DepositStep(ast.into))
    return QueryPlan(tuple(steps), tuple(output), descs[seed].tdef.primary_key)
