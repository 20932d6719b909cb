"""Per-archive service logic: cone search, cutouts, synchronous queries and
the describe report. Every failure surfaces as an error document with a
machine-readable code rather than a transport-level failure."""

from __future__ import annotations

import math

from ..catalog.store import Catalog, EditionView, columnar_to_rows
from ..clients import LocalArchiveClient, ServiceDescription
from ..query.executor import ExecLimits, QuotaExceededError, TableResult, execute
from ..query.parser import QuerySyntaxError, parse
from ..query.planner import PlanError, RegistryView, plan
from ..sphere import Cone, SkyCoord, SphereError
from ..tiers import DEFAULT_TIERS, Tier
from ..wire import TabularDocument
from .cutout import CutoutError, CutoutImage, render_cutout, window_cone

MAX_CONE_ROWS = 500_000


class ParamError(ValueError):
    """A request parameter failed validation."""


def _check_position(ra: float, dec: float) -> SkyCoord:
    if not (math.isfinite(ra) and math.isfinite(dec)):
        raise ParamError("ra and dec must be finite")
    if not (-90.0 <= dec <= 90.0):
        raise ParamError(f"dec {dec} outside [-90, 90]")
    return SkyCoord(ra % 360.0, dec)


class ArchiveNode:
    """One archive's service endpoints over its catalog editions.

    Each request reads the edition that is current when it starts, so a
    publish during a long request never disturbs it."""

    def __init__(
        self,
        name: str,
        catalog: Catalog,
        tiers: dict[str, Tier] | None = None,
    ):
        self.name = name
        self.catalog = catalog
        self.tiers = dict(tiers) if tiers is not None else dict(DEFAULT_TIERS)

    # -- helpers -------------------------------------------------------------

    def _snapshot(self) -> EditionView:
        return self.catalog.latest_edition()

    def _spatial_tables(self, edition: EditionView) -> list[str]:
        return [t for t in edition.table_names if edition.table(t).tdef.spatial]

    def _pick_table(self, edition: EditionView, table: str | None) -> str:
        spatial = self._spatial_tables(edition)
        if not spatial:
            raise ParamError("archive has no spatial table")
        if table is None:
            return spatial[0]
        if table not in edition.table_names:
            raise ParamError(f"unknown table {table!r}")
        if table not in spatial:
            raise ParamError(f"table {table!r} is not spatial")
        return table

    # -- operations ----------------------------------------------------------

    def handle_cone_search(
        self, ra: float, dec: float, sr: float, table: str | None = None
    ) -> TabularDocument:
        try:
            center = _check_position(ra, dec)
            if not (0.0 <= sr <= 180.0):
                raise ParamError(f"search radius {sr} outside [0, 180]")
            edition = self._snapshot()
            name = self._pick_table(edition, table)
        except ParamError as e:
            return TabularDocument.error("param", str(e))
        meta, cols = self.catalog.filter_select(
            edition, name, cone=Cone(center, sr)
        )
        truncated = False
        rows = columnar_to_rows([c.name for c in meta], cols)
        if len(rows) > MAX_CONE_ROWS:
            rows = rows[:MAX_CONE_ROWS]
            truncated = True
        return TabularDocument(columns=list(meta), rows=rows, truncated=truncated)

    def handle_cutout(
        self,
        ra: float,
        dec: float,
        width: int,
        height: int,
        scale: float,
        table: str | None = None,
        band: str | None = None,
    ) -> CutoutImage:
        """Render the spatial table's objects over the requested window.

        `band` names the magnitude column; by default the first real column
        tagged phot.mag, falling back to unit amplitudes when none exists."""
        center = _check_position(ra, dec)
        edition = self._snapshot()
        name = self._pick_table(edition, table)
        tdef = edition.table(name).tdef
        if band is None:
            for c in tdef.columns:
                if c.kind == "real" and c.ucd.startswith("phot.mag"):
                    band = c.name
                    break
        elif tdef.column(band).kind != "real":
            raise ParamError(f"band column {band!r} is not real-valued")
        try:
            cone = window_cone(center, width, height, scale)
        except (ValueError, TypeError) as e:
            raise CutoutError(str(e))
        ra_col, dec_col = tdef.spatial
        want = [ra_col, dec_col] + ([band] if band else [])
        _, cols = self.catalog.filter_select(edition, name, cone=cone, columns=want)
        return render_cutout(
            center,
            width,
            height,
            scale,
            cols[ra_col],
            cols[dec_col],
            cols[band] if band else None,
        )

    def handle_query(self, text: str, tier: str) -> TabularDocument:
        if tier not in self.tiers:
            return TabularDocument.error("param", f"unknown tier {tier!r}")
        limits = self.tiers[tier]
        client = LocalArchiveClient(self.name, self.catalog, self._snapshot())
        try:
            ast = parse(text)
        except QuerySyntaxError as e:
            return TabularDocument.error("syntax", str(e))
        if ast.into is not None:
            return TabularDocument.error(
                "plan", "INTO is not available on archive nodes"
            )
        registry = RegistryView({self.name: client.describe()})
        try:
            qplan = plan(ast, registry)
        except PlanError as e:
            return TabularDocument.error("plan", str(e))
        try:
            result = execute(
                qplan,
                {self.name: client},
                ExecLimits(limits.elapsed_s, limits.row_cap),
            )
        except QuotaExceededError as e:
            return TabularDocument.error("quota", str(e))
        except (SphereError, ValueError, RuntimeError) as e:
            return TabularDocument.error("exec", str(e))
        return _document_from_result(result)

    def describe_service(self) -> ServiceDescription:
        return LocalArchiveClient(self.name, self.catalog, self._snapshot()).describe()


def _document_from_result(result: TableResult) -> TabularDocument:
    return TabularDocument(
        columns=list(result.columns), rows=list(result.rows), truncated=result.truncated
    )
