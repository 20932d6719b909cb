"""Cross-match engine: chain each seed object from the primary source to its
nearest neighbor (within tolerance) in every subsequent source.

Matching is always against the seed's PRIMARY coordinate, never the previous
match's, so the result is a pure function of catalog contents and the spec;
service latency or fetch order cannot change it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..clients import ArchiveClient, ArchiveUnreachableError
from ..sphere import Cone, SkyCoord, angular_distance_batch

DEFAULT_TOLERANCE_ARCSEC = 2.0
MAX_TOLERANCE_ARCSEC = 3600.0


class FederationError(ValueError):
    pass


class SourceUnreachableError(RuntimeError):
    """A named source could not be queried; the whole match fails."""

    def __init__(self, source: str, cause: Exception):
        super().__init__(f"source {source!r} unreachable: {cause}")
        self.source = source


@dataclass(frozen=True)
class XMatchSpec:
    sources: tuple[tuple[str, str], ...]  # (archive, table); first is primary
    tolerance_arcsec: float = DEFAULT_TOLERANCE_ARCSEC

    def __post_init__(self):
        if len(self.sources) < 1:
            raise FederationError("cross-match needs at least one source")
        if not (0 < self.tolerance_arcsec <= MAX_TOLERANCE_ARCSEC):
            raise FederationError(
                f"tolerance {self.tolerance_arcsec} arcsec outside (0, 3600]"
            )


@dataclass(frozen=True)
class MatchedTuple:
    ids: tuple[int, ...]  # one object id per source, spec order
    coords: tuple[SkyCoord, ...]
    separations_arcsec: tuple[float, ...] = field(default=())
    # separations measured from the primary coordinate, one per added source

    def __post_init__(self):
        if not (len(self.ids) == len(self.coords) == len(self.separations_arcsec) + 1):
            raise FederationError("tuple arity mismatch")


def _source_columns(client: ArchiveClient, table: str):
    desc = client.describe()
    if table not in desc.tables:
        raise FederationError(f"archive {desc.archive!r} has no table {table!r}")
    tdef = desc.tables[table].tdef
    if tdef.spatial is None:
        raise FederationError(f"table {table!r} is not spatial")
    return tdef.primary_key, tdef.spatial


def _fetch_region(client: ArchiveClient, archive: str, table: str, cone: Cone):
    pk_col, (ra_col, dec_col) = _source_columns(client, table)
    try:
        _, cols = client.fetch(table, cone, (), [pk_col, ra_col, dec_col])
    except ArchiveUnreachableError as e:
        raise SourceUnreachableError(archive, e)
    return (
        cols[pk_col].astype(np.int64),
        cols[ra_col].astype(np.float64),
        cols[dec_col].astype(np.float64),
    )


def xmatch(
    spec: XMatchSpec,
    region: Cone,
    clients: Mapping[str, ArchiveClient],
) -> list[MatchedTuple]:
    """Seed from the primary source's cone search over `region`, then extend
    every seed with the nearest in-tolerance neighbor from each subsequent
    source (cone of radius = tolerance around the seed's primary coordinate).
    Seeds missing a neighbor in any source are dropped; distance ties break
    toward the smaller object id."""
    for archive, _ in spec.sources:
        if archive not in clients:
            raise FederationError(f"unknown source archive {archive!r}")

    tol_deg = spec.tolerance_arcsec / 3600.0
    primary_archive, primary_table = spec.sources[0]
    ids, ras, decs = _fetch_region(
        clients[primary_archive], primary_archive, primary_table, region
    )
    order = np.argsort(ids, kind="stable")
    ids, ras, decs = ids[order], ras[order], decs[order]

    # All surviving tuples share the seed's primary coordinate, so one padded
    # fetch per source stands in for the per-seed tolerance cones.
    match_ids = [ids]
    match_coords = [(ras, decs)]
    seps: list[np.ndarray] = []
    alive = np.ones(len(ids), dtype=bool)
    search = Cone(region.center, min(180.0, region.radius + tol_deg))
    for archive, table in spec.sources[1:]:
        cids, cras, cdecs = _fetch_region(clients[archive], archive, table, search)
        pick = np.full(len(ids), -1, dtype=np.int64)
        dist = np.full(len(ids), np.nan)
        if len(cids) == 0:
            alive[:] = False
            match_ids.append(pick)
            match_coords.append((dist, dist))
            seps.append(dist)
            continue
        for i in np.flatnonzero(alive):
            d = angular_distance_batch(cras, cdecs, SkyCoord(ras[i], decs[i]))
            inside = np.flatnonzero(d <= tol_deg)
            if len(inside) == 0:
                alive[i] = False
                continue
            best = inside[np.lexsort((cids[inside], d[inside]))[0]]
            pick[i] = best
            dist[i] = d[best]
        match_ids.append(np.where(pick >= 0, cids[np.maximum(pick, 0)], -1))
        match_coords.append(
            (cras[np.maximum(pick, 0)], cdecs[np.maximum(pick, 0)])
        )
        seps.append(dist * 3600.0)

    out: list[MatchedTuple] = []
    for i in np.flatnonzero(alive):
        out.append(
            MatchedTuple(
                ids=tuple(int(m[i]) for m in match_ids),
                coords=tuple(
                    SkyCoord(float(r[i]), float(d[i])) for r, d in match_coords
                ),
                separations_arcsec=tuple(float(s[i]) for s in seps),
            )
        )
    return out
