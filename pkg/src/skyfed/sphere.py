"""Spherical geometry and a hierarchical triangular mesh index.

The sphere is split into the 8 spherical triangles of an octahedron; each
triangle subdivides 4-ways at edge midpoints. A mesh cell ("trixel") is
addressed by a packed integer path: the root octant (0..7) followed by one
2-bit child selector per level. Cone covers over this mesh drive all the
indexed spatial selection in the catalog layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

MAX_DEPTH = 20
DEFAULT_INDEX_DEPTH = 12

# Tolerance on edge-plane dot products when locating points; boundary points
# are assigned to the lowest-path candidate that passes at this tolerance.
_EDGE_EPS = 1e-12
# Angular safety margin (degrees) for cover classification: "full" must never
# overclaim and pruning must never drop an intersecting trixel.
_COVER_EPS_DEG = 1e-9


class SphereError(ValueError):
    pass


@dataclass(frozen=True)
class SkyCoord:
    """A position on the celestial sphere, degrees. ra is normalized to
    [0, 360); dec outside [-90, +90] is rejected."""

    ra: float
    dec: float

    def __post_init__(self):
        if not (math.isfinite(self.ra) and math.isfinite(self.dec)):
            raise SphereError(f"non-finite coordinate ({self.ra}, {self.dec})")
        if not -90.0 <= self.dec <= 90.0:
            raise SphereError(f"dec {self.dec} outside [-90, +90]")
        object.__setattr__(self, "ra", self.ra % 360.0)


@dataclass(frozen=True)
class UnitVec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(n2 - 1.0) > 1e-12:
            raise SphereError(f"not a unit vector (|v|^2 = {n2})")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Cone:
    """A circular sky region: all points within `radius` degrees of `center`."""

    center: SkyCoord
    radius: float

    def __post_init__(self):
        if not 0.0 <= self.radius <= 180.0:
            raise SphereError(f"cone radius {self.radius} outside [0, 180]")


@dataclass(frozen=True)
class TrixelId:
    """Mesh cell address: root octant then `depth` 2-bit child selectors,
    packed into `path` (octant in the top bits)."""

    depth: int
    path: int

    def __post_init__(self):
        if self.depth < 0 or self.depth > MAX_DEPTH:
            raise SphereError(f"depth {self.depth} outside [0, {MAX_DEPTH}]")
        if not 0 <= self.path < (8 << (2 * self.depth)):
            raise SphereError(f"path {self.path} not valid at depth {self.depth}")

    @property
    def octant(self) -> int:
        return self.path >> (2 * self.depth)

    def child(self, i: int) -> "TrixelId":
        if not 0 <= i <= 3:
            raise SphereError(f"child selector {i} outside 0..3")
        return TrixelId(self.depth + 1, (self.path << 2) | i)

    def parent(self) -> "TrixelId":
        if self.depth == 0:
            raise SphereError("root trixel has no parent")
        return TrixelId(self.depth - 1, self.path >> 2)

    def is_ancestor_of(self, other: "TrixelId") -> bool:
        if other.depth <= self.depth:
            return False
        return (other.path >> (2 * (other.depth - self.depth))) == self.path

    def path_range_at(self, depth: int) -> tuple[int, int]:
        """Half-open range of descendant paths at a deeper (or equal) depth."""
        if depth < self.depth:
            raise SphereError("target depth above trixel depth")
        shift = 2 * (depth - self.depth)
        return (self.path << shift, (self.path + 1) << shift)


@dataclass(frozen=True)
class TrixelCover:
    """Cone cover: `full` trixels lie entirely inside the cone, `partial`
    trixels touch its boundary and need exact filtering."""

    full: tuple[TrixelId, ...]
    partial: tuple[TrixelId, ...]


# ---------------------------------------------------------------------------
# scalar vector helpers (plain tuples; hot paths use the numpy batch variants)

def _norm3(v):
    x, y, z = v
    n = math.sqrt(x * x + y * y + z * z)
    return (x / n, y / n, z / n)


def _cross(a, b):
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _mid(a, b):
    return _norm3((a[0] + b[0], a[1] + b[1], a[2] + b[2]))


def _vec_angle_deg(a, b) -> float:
    c = _cross(a, b)
    s = math.sqrt(_dot(c, c))
    return math.degrees(math.atan2(s, _dot(a, b)))


def to_cartesian(c: SkyCoord) -> UnitVec3:
    ra = math.radians(c.ra)
    dec = math.radians(c.dec)
    cd = math.cos(dec)
    return UnitVec3(cd * math.cos(ra), cd * math.sin(ra), math.sin(dec))


def from_cartesian(v: UnitVec3) -> SkyCoord:
    ra = math.degrees(math.atan2(v.y, v.x)) % 360.0
    dec = math.degrees(math.asin(max(-1.0, min(1.0, v.z))))
    return SkyCoord(ra, dec)


def angular_distance(a: SkyCoord, b: SkyCoord) -> float:
    """Great-circle separation in degrees, stable near 0 and 180."""
    return _vec_angle_deg(to_cartesian(a).as_tuple(), to_cartesian(b).as_tuple())


def angular_distance_batch(
    ra: np.ndarray, dec: np.ndarray, center: SkyCoord
) -> np.ndarray:
    """Vectorized angular_distance from many points to one center, degrees.

    Mirrors the scalar formula operation-for-operation so indexed and
    brute-force selection paths agree bit-exactly.
    """
    ra_r = np.radians(np.asarray(ra, dtype=np.float64))
    dec_r = np.radians(np.asarray(dec, dtype=np.float64))
    cd = np.cos(dec_r)
    ax, ay, az = cd * np.cos(ra_r), cd * np.sin(ra_r), np.sin(dec_r)
    b = to_cartesian(center)
    cx = ay * b.z - az * b.y
    cy = az * b.x - ax * b.z
    cz = ax * b.y - ay * b.x
    s = np.sqrt(cx * cx + cy * cy + cz * cz)
    d = ax * b.x + ay * b.y + az * b.z
    return np.degrees(np.arctan2(s, d))


# ---------------------------------------------------------------------------
# root decomposition

def _octant_vertices(k: int):
    sx = -1.0 if k & 1 else 1.0
    sy = -1.0 if k & 2 else 1.0
    sz = -1.0 if k & 4 else 1.0
    v = [(sx, 0.0, 0.0), (0.0, sy, 0.0), (0.0, 0.0, sz)]
    # keep counter-clockwise orientation seen from outside
    if sx * sy * sz < 0:
        v[1], v[2] = v[2], v[1]
    return tuple(v)


_ROOTS = tuple(_octant_vertices(k) for k in range(8))


def _children_vertices(v0, v1, v2):
    w0 = _mid(v1, v2)
    w1 = _mid(v0, v2)
    w2 = _mid(v0, v1)
    return ((v0, w2, w1), (v1, w0, w2), (v2, w1, w0), (w0, w1, w2))


def trixel_bounds(t: TrixelId) -> tuple[UnitVec3, UnitVec3, UnitVec3]:
    """The three corner vectors of the trixel, counter-clockwise from outside."""
    selectors = [(t.path >> (2 * i)) & 3 for i in range(t.depth - 1, -1, -1)]
    tri = _ROOTS[t.octant]
    for s in selectors:
        tri = _children_vertices(*tri)[s]
    return tuple(UnitVec3(*_norm3(v)) for v in tri)


# ---------------------------------------------------------------------------
# point location (single implementation, vectorized; scalar wraps it)

def trixel_of_batch(ra: np.ndarray, dec: np.ndarray, depth: int) -> np.ndarray:
    """Locate many points at once; returns packed trixel paths (int64).

    Boundary points go to the lowest-path candidate, which the child
    iteration order makes automatic.
    """
    if depth < 0 or depth > MAX_DEPTH:
        raise SphereError(f"depth {depth} outside [0, {MAX_DEPTH}]")
    ra_r = np.radians(np.asarray(ra, dtype=np.float64))
    dec_r = np.radians(np.asarray(dec, dtype=np.float64))
    cd = np.cos(dec_r)
    p = np.stack([cd * np.cos(ra_r), cd * np.sin(ra_r), np.sin(dec_r)], axis=1)

    octant = (
        (p[:, 0] < 0).astype(np.int64)
        + 2 * (p[:, 1] < 0).astype(np.int64)
        + 4 * (p[:, 2] < 0).astype(np.int64)
    )
    path = octant.copy()
    roots = np.array(_ROOTS)  # (8, 3, 3)
    v0 = roots[octant, 0]
    v1 = roots[octant, 1]
    v2 = roots[octant, 2]

    def unit(v):
        return v / np.linalg.norm(v, axis=1, keepdims=True)

    def min_edge_dot(a, b, c):
        # smallest of the three edge-plane dot products with p; >= 0 inside
        d0 = np.einsum("ij,ij->i", np.cross(a, b), p)
        d1 = np.einsum("ij,ij->i", np.cross(b, c), p)
        d2 = np.einsum("ij,ij->i", np.cross(c, a), p)
        return np.minimum(d0, np.minimum(d1, d2))

    for _ in range(depth):
        w0 = unit(v1 + v2)
        w1 = unit(v0 + v2)
        w2 = unit(v0 + v1)
        kids = ((v0, w2, w1), (v1, w0, w2), (v2, w1, w0), (w0, w1, w2))
        dots = np.stack([min_edge_dot(*k) for k in kids], axis=1)
        inside = dots >= -_EDGE_EPS
        sel = np.where(
            inside[:, 0], 0,
            np.where(inside[:, 1], 1, np.where(inside[:, 2], 2, 3)),
        )
        # numerical stragglers failing every test land in the closest child
        none = ~inside.any(axis=1)
        if none.any():
            sel[none] = np.argmax(dots[none], axis=1)
        nv0 = np.empty_like(v0)
        nv1 = np.empty_like(v1)
        nv2 = np.empty_like(v2)
        for i, (a, b, c) in enumerate(kids):
            m = sel == i
            nv0[m], nv1[m], nv2[m] = a[m], b[m], c[m]
        v0, v1, v2 = nv0, nv1, nv2
        path = (path << 2) | sel
    return path


def trixel_of(c: SkyCoord, depth: int) -> TrixelId:
    path = trixel_of_batch(np.array([c.ra]), np.array([c.dec]), depth)
    return TrixelId(depth, int(path[0]))


# ---------------------------------------------------------------------------
# point / triangle / cone geometry for covers

def _contains(p, tri, eps=_EDGE_EPS) -> bool:
    v0, v1, v2 = tri
    return (
        _dot(_cross(v0, v1), p) >= -eps
        and _dot(_cross(v1, v2), p) >= -eps
        and _dot(_cross(v2, v0), p) >= -eps
    )


def _arc_extreme_dists(c, a, b) -> tuple[float, float]:
    """(min, max) angular distance in degrees from point c to the arc a-b."""
    da, db = _vec_angle_deg(c, a), _vec_angle_deg(c, b)
    lo, hi = min(da, db), max(da, db)
    n = _cross(a, b)
    nn = math.sqrt(_dot(n, n))
    if nn < 1e-300:
        return lo, hi
    n = (n[0] / nn, n[1] / nn, n[2] / nn)
    cn = _dot(c, n)
    # projection of c onto the arc's great-circle plane
    q = (c[0] - cn * n[0], c[1] - cn * n[1], c[2] - cn * n[2])
    qn = math.sqrt(_dot(q, q))
    if qn < 1e-300:
        return lo, hi
    q = (q[0] / qn, q[1] / qn, q[2] / qn)

    def on_arc(pt) -> bool:
        return _dot(_cross(a, pt), n) >= -_EDGE_EPS and _dot(_cross(pt, b), n) >= -_EDGE_EPS

    if on_arc(q):
        lo = min(lo, _vec_angle_deg(c, q))
    anti_q = (-q[0], -q[1], -q[2])
    if on_arc(anti_q):
        hi = max(hi, _vec_angle_deg(c, anti_q))
    return lo, hi


def _triangle_dist_range(c, tri) -> tuple[float, float]:
    """(min, max) angular distance in degrees from c to the spherical triangle."""
    edges = [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])]
    lo = math.inf
    hi = 0.0
    for a, b in edges:
        elo, ehi = _arc_extreme_dists(c, a, b)
        lo = min(lo, elo)
        hi = max(hi, ehi)
    if _contains(c, tri):
        lo = 0.0
    if _contains((-c[0], -c[1], -c[2]), tri):
        hi = 180.0
    return lo, hi


def cover(cone: Cone, depth: int) -> TrixelCover:
    """Sound cone cover: every point of the cone lies inside some listed
    trixel; every `full` trixel lies entirely inside the cone. `partial`
    trixels are emitted at exactly `depth`; `full` trixels may be coarser."""
    if depth < 0 or depth > MAX_DEPTH:
        raise SphereError(f"depth {depth} outside [0, {MAX_DEPTH}]")
    center = to_cartesian(cone.center).as_tuple()
    full: list[TrixelId] = []
    partial: list[TrixelId] = []

    if cone.radius >= 180.0:
        return TrixelCover(tuple(TrixelId(0, k) for k in range(8)), ())

    def descend(tid: TrixelId, tri):
        lo, hi = _triangle_dist_range(center, tri)
        if lo > cone.radius + _COVER_EPS_DEG:
            return
        if hi <= cone.radius - _COVER_EPS_DEG:
            full.append(tid)
            return
        if tid.depth == depth:
            partial.append(tid)
            return
        for i, kid in enumerate(_children_vertices(*tri)):
            descend(tid.child(i), kid)

    for k in range(8):
        descend(TrixelId(0, k), _ROOTS[k])
    return TrixelCover(tuple(full), tuple(partial))


def cover_paths_at(cov: TrixelCover, depth: int) -> tuple[np.ndarray, np.ndarray]:
    """Flatten lists of half-open path ranges at `depth` for full and partial
    trixels, as two (n, 2) int64 arrays, sorted by range start."""

    def ranges(ids: Iterable[TrixelId]) -> np.ndarray:
        out = sorted(t.path_range_at(depth) for t in ids)
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    return ranges(cov.full), ranges(cov.partial)


def pick_cover_depth(radius_deg: float, index_depth: int) -> int:
    """Cover resolution heuristic: subdivide until cells are comfortably
    smaller than the cone, capped at the storage index depth."""
    d = 0
    size = 90.0
    while d < index_depth and size > max(radius_deg, 1e-7):
        size /= 2.0
        d += 1
    return d
