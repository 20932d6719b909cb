import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skyfed import sphere
from skyfed.sphere import (
    Cone,
    SkyCoord,
    TrixelId,
    angular_distance,
    cover,
    from_cartesian,
    to_cartesian,
    trixel_bounds,
    trixel_of,
    trixel_of_batch,
)


def random_coords(rng, n):
    ra = rng.uniform(0.0, 360.0, n)
    dec = np.degrees(np.arcsin(rng.uniform(-1.0, 1.0, n)))
    return ra, dec


def oracle_distance_deg(a: SkyCoord, b: SkyCoord) -> float:
    """High-precision separation via mpmath, independent of the library path."""
    import mpmath as mp

    mp.mp.dps = 50
    ra1, de1 = mp.radians(mp.mpf(a.ra)), mp.radians(mp.mpf(a.dec))
    ra2, de2 = mp.radians(mp.mpf(b.ra)), mp.radians(mp.mpf(b.dec))
    v1 = (mp.cos(de1) * mp.cos(ra1), mp.cos(de1) * mp.sin(ra1), mp.sin(de1))
    v2 = (mp.cos(de2) * mp.cos(ra2), mp.cos(de2) * mp.sin(ra2), mp.sin(de2))
    dot = sum(x * y for x, y in zip(v1, v2))
    dot = max(mp.mpf(-1), min(mp.mpf(1), dot))
    return float(mp.degrees(mp.acos(dot)))


def point_in_triangle(p, tri, eps=1e-9) -> bool:
    """Independent point-in-spherical-triangle check on corner vectors."""
    v = [np.array(t.as_tuple()) for t in tri]
    pv = np.array(p)
    for i in range(3):
        if np.dot(np.cross(v[i], v[(i + 1) % 3]), pv) < -eps:
            return False
    return True


class TestSkyCoord:
    def test_ra_normalized(self):
        assert SkyCoord(370.0, 0.0).ra == pytest.approx(10.0)
        assert SkyCoord(-10.0, 0.0).ra == pytest.approx(350.0)

    def test_dec_out_of_range_rejected(self):
        with pytest.raises(sphere.SphereError):
            SkyCoord(0.0, 90.5)
        with pytest.raises(sphere.SphereError):
            SkyCoord(0.0, -91.0)

    def test_cone_radius_bounds(self):
        with pytest.raises(sphere.SphereError):
            Cone(SkyCoord(0, 0), 180.1)
        with pytest.raises(sphere.SphereError):
            Cone(SkyCoord(0, 0), -1.0)


class TestCartesian:
    def test_axis_cases(self):
        assert to_cartesian(SkyCoord(0, 0)).as_tuple() == pytest.approx((1, 0, 0))
        assert to_cartesian(SkyCoord(90, 0)).as_tuple() == pytest.approx((0, 1, 0))
        assert to_cartesian(SkyCoord(0, 90)).as_tuple() == pytest.approx((0, 0, 1))

    def test_round_trip(self):
        rng = np.random.default_rng(7)
        ra, dec = random_coords(rng, 500)
        for r, d in zip(ra, dec):
            c = SkyCoord(r, d)
            back = from_cartesian(to_cartesian(c))
            assert angular_distance(c, back) < 1e-9


class TestAngularDistance:
    def test_identity_and_antipodes(self):
        c = SkyCoord(123.4, -56.7)
        assert angular_distance(c, c) == 0.0
        assert angular_distance(SkyCoord(0, 0), SkyCoord(180, 0)) == pytest.approx(180.0)

    def test_against_high_precision_oracle(self):
        rng = np.random.default_rng(11)
        ra, dec = random_coords(rng, 2000)
        for i in range(0, 2000, 2):
            a = SkyCoord(ra[i], dec[i])
            b = SkyCoord(ra[i + 1], dec[i + 1])
            assert angular_distance(a, b) == pytest.approx(
                oracle_distance_deg(a, b), abs=1e-9
            )

    def test_stable_near_zero(self):
        a = SkyCoord(10.0, 20.0)
        b = SkyCoord(10.0, 20.0 + 1e-7)
        assert angular_distance(a, b) == pytest.approx(1e-7, rel=1e-4)

    @given(
        st.tuples(
            st.floats(0, 360, allow_nan=False),
            st.floats(-90, 90, allow_nan=False),
        ),
        st.tuples(st.floats(0, 360), st.floats(-90, 90)),
        st.tuples(st.floats(0, 360), st.floats(-90, 90)),
    )
    @settings(max_examples=200, deadline=None)
    def test_metric_properties(self, ta, tb, tc):
        a, b, c = SkyCoord(*ta), SkyCoord(*tb), SkyCoord(*tc)
        dab = angular_distance(a, b)
        assert 0 <= dab <= 180
        assert dab == pytest.approx(angular_distance(b, a), abs=1e-12)
        assert angular_distance(a, c) <= dab + angular_distance(b, c) + 1e-9


class TestTrixelId:
    def test_octant_and_prefix(self):
        t = TrixelId(0, 3)
        c = t.child(2)
        assert c.depth == 1 and c.path == (3 << 2) | 2
        assert c.parent() == t
        assert t.is_ancestor_of(c)
        assert not c.is_ancestor_of(t)

    def test_bad_ids_rejected(self):
        with pytest.raises(sphere.SphereError):
            TrixelId(-1, 0)
        with pytest.raises(sphere.SphereError):
            TrixelId(0, 8)
        with pytest.raises(sphere.SphereError):
            TrixelId(1, 32)


class TestTrixelOf:
    def test_first_octant(self):
        t = trixel_of(SkyCoord(45, 45), 0)
        assert t == TrixelId(0, 0)
        verts = trixel_bounds(t)
        signs = {tuple(np.sign(v.as_tuple())) for v in verts}
        assert signs == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_child_of_parent(self):
        rng = np.random.default_rng(3)
        ra, dec = random_coords(rng, 200)
        for r, d in zip(ra, dec):
            c = SkyCoord(r, d)
            for depth in range(0, 6):
                assert trixel_of(c, depth).is_ancestor_of(trixel_of(c, depth + 1))

    def test_containment_oracle_depth8(self):
        rng = np.random.default_rng(5)
        ra, dec = random_coords(rng, 10_000)
        paths = trixel_of_batch(ra, dec, 8)
        vecs = np.stack(
            [
                np.cos(np.radians(dec)) * np.cos(np.radians(ra)),
                np.cos(np.radians(dec)) * np.sin(np.radians(ra)),
                np.sin(np.radians(dec)),
            ],
            axis=1,
        )
        for p, v in zip(paths, vecs):
            tri = trixel_bounds(TrixelId(8, int(p)))
            assert point_in_triangle(v, tri)

    def test_depth_out_of_range(self):
        with pytest.raises(sphere.SphereError):
            trixel_of(SkyCoord(0, 0), sphere.MAX_DEPTH + 1)


class TestTrixelBounds:
    def test_root_is_axes(self):
        verts = trixel_bounds(TrixelId(0, 0))
        assert {v.as_tuple() for v in verts} == {(1, 0, 0), (0, 1, 0), (0, 0, 1)}

    def test_mesh_size(self):
        for d in range(0, 4):
            assert 8 * 4**d == 8 << (2 * d)
            # ids at depth d: octant * 4^d + selectors; all decodable
            t = TrixelId(d, (8 << (2 * d)) - 1)
            assert len(trixel_bounds(t)) == 3

    def test_children_partition_parent(self):
        rng = np.random.default_rng(9)
        parent = TrixelId(2, int(rng.integers(0, 8 << 4)))
        kids = [parent.child(i) for i in range(4)]
        ra, dec = random_coords(rng, 5000)
        paths2 = trixel_of_batch(ra, dec, 2)
        paths3 = trixel_of_batch(ra, dec, 3)
        inside = paths2 == parent.path
        # every point of the parent lands in exactly one child
        assert set(np.unique(paths3[inside])) <= {k.path for k in kids}

    def test_ccw_orientation(self):
        rng = np.random.default_rng(13)
        for _ in range(50):
            d = int(rng.integers(0, 6))
            t = TrixelId(d, int(rng.integers(0, 8 << (2 * d))))
            v = [np.array(u.as_tuple()) for u in trixel_bounds(t)]
            centroid = (v[0] + v[1] + v[2]) / 3
            assert np.dot(np.cross(v[1] - v[0], v[2] - v[0]), centroid) > 0


class TestCover:
    def test_whole_sphere(self):
        cov = cover(Cone(SkyCoord(10, 10), 180.0), 5)
        assert {t.path for t in cov.full} == set(range(8))
        assert all(t.depth == 0 for t in cov.full)
        assert cov.partial == ()

    def test_degenerate_cone(self):
        c = SkyCoord(33.3, 44.4)
        cov = cover(Cone(c, 0.0), 6)
        assert cov.full == ()
        assert cov.partial == (trixel_of(c, 6),)

    def test_full_trixels_inside_cone(self):
        cone = Cone(SkyCoord(120, -30), 25.0)
        cov = cover(cone, 5)
        assert cov.full
        for t in cov.full:
            verts = [v.as_tuple() for v in trixel_bounds(t)]
            pts = list(verts)
            for i in range(3):
                pts.append(sphere._mid(verts[i], verts[(i + 1) % 3]))
            for p in pts:
                c = from_cartesian(sphere.UnitVec3(*sphere._norm3(p)))
                assert angular_distance(c, cone.center) <= cone.radius + 1e-9

    def test_lists_disjoint_no_ancestors(self):
        cone = Cone(SkyCoord(200, 40), 13.0)
        cov = cover(cone, 6)
        ids = list(cov.full) + list(cov.partial)
        assert len(set(ids)) == len(ids)
        for a in ids:
            for b in ids:
                assert not (a != b and a.is_ancestor_of(b) and b in cov.full)
        for lst in (cov.full, cov.partial):
            for a in lst:
                for b in lst:
                    assert not a.is_ancestor_of(b)

    def test_soundness_random(self):
        rng = np.random.default_rng(21)
        ra, dec = random_coords(rng, 400)
        for _ in range(60):
            cra, cdec = random_coords(rng, 1)
            radius = float(rng.uniform(0.1, 60.0))
            cone = Cone(SkyCoord(float(cra[0]), float(cdec[0])), radius)
            depth = 5
            cov = cover(cone, depth)
            covered = {t.path_range_at(depth) for t in cov.partial}
            covered |= {t.path_range_at(depth) for t in cov.full}
            paths = trixel_of_batch(ra, dec, depth)
            for r, d, p in zip(ra, dec, paths):
                if angular_distance(SkyCoord(r, d), cone.center) <= radius:
                    assert any(lo <= p < hi for lo, hi in covered)


class TestBatchLocationAgreesWithScalar:
    def test_batch_vs_singleton(self):
        rng = np.random.default_rng(17)
        ra, dec = random_coords(rng, 300)
        batch = trixel_of_batch(ra, dec, 10)
        for r, d, p in zip(ra, dec, batch):
            assert trixel_of(SkyCoord(r, d), 10).path == int(p)
