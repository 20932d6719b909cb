"""Registry behavior and the cross-match engine against an all-pairs oracle."""

import io
import math

import numpy as np
import pytest

from skyfed.catalog import Catalog
from skyfed.catalog.schema import parse_schema
from skyfed.clients import (
    ArchiveUnreachableError,
    LocalArchiveClient,
    ServiceDescription,
)
from skyfed.federation import (
    FederationError,
    Registry,
    RegistryError,
    SourceUnreachableError,
    XMatchSpec,
    xmatch,
)
from skyfed.sphere import Cone, SkyCoord, angular_distance

OBJ_SCHEMA = """
table obj
  key id
  spatial ra dec
  column id  integer -   meta.id    "Object id"
  column ra  real    deg pos.eq.ra  "Right ascension"
  column dec real    deg pos.eq.dec "Declination"
end
"""

TOL_ARCSEC = 2.0
REGION = Cone(SkyCoord(180.0, 0.0), 2.0)


def _make_archive(tmp_path_factory, name: str, ids, ras, decs) -> LocalArchiveClient:
    cat = Catalog(tmp_path_factory.mktemp(name), parse_schema(OBJ_SCHEMA))
    buf = io.StringIO()
    buf.write("id,ra,dec\n")
    for i, r, d in zip(ids, ras, decs):
        buf.write(f"{i},{float(r)!r},{float(d)!r}\n")
    report = cat.load_tables({"obj": io.StringIO(buf.getvalue())})
    assert report.rows_rejected == 0
    return LocalArchiveClient(name, cat)


@pytest.fixture(scope="module")
def planted(tmp_path_factory):
    """Three archives: base objects plus counterparts planted at known
    offsets — some inside the 2 arcsec tolerance, some just outside — and
    unrelated clutter."""
    rng = np.random.default_rng(2024)
    n = 1_000
    ra0 = rng.uniform(178.5, 181.5, n)
    dec0 = rng.uniform(-1.5, 1.5, n)
    ids0 = np.arange(n)

    def offsets(base_ra, base_dec, frac_match, id_base):
        m = len(base_ra)
        theta = rng.uniform(0, 2 * math.pi, m)
        # in-tolerance for the first frac_match, just outside for the rest
        r_in = rng.uniform(0.1, 0.95 * TOL_ARCSEC, m) / 3600.0
        r_out = rng.uniform(1.2 * TOL_ARCSEC, 10 * TOL_ARCSEC, m) / 3600.0
        r = np.where(np.arange(m) < frac_match * m, r_in, r_out)
        ra = base_ra + r * np.cos(theta) / np.cos(np.radians(base_dec))
        dec = base_dec + r * np.sin(theta)
        ids = id_base + np.arange(m)
        return ids, ra, dec

    ids_b, ra_b, dec_b = offsets(ra0, dec0, 0.7, 10_000)
    ids_c, ra_c, dec_c = offsets(ra0, dec0, 0.8, 20_000)
    # clutter far from everything
    ids_x = 90_000 + np.arange(200)
    ra_x = rng.uniform(170.0, 175.0, 200)
    dec_x = rng.uniform(-5.0, 5.0, 200)

    a = _make_archive(tmp_path_factory, "arch_a", ids0, ra0, dec0)
    b = _make_archive(
        tmp_path_factory,
        "arch_b",
        np.concatenate([ids_b, ids_x]),
        np.concatenate([ra_b, ra_x]),
        np.concatenate([dec_b, dec_x]),
    )
    c = _make_archive(tmp_path_factory, "arch_c", ids_c, ra_c, dec_c)
    return {"arch_a": a, "arch_b": b, "arch_c": c}


# -- registry -----------------------------------------------------------------


def _desc(name="x") -> ServiceDescription:
    return ServiceDescription(
        archive=name, schema_version="edition-1", capabilities=("cone",), tables={}
    )


def test_register_then_list(tmp_path):
    reg = Registry(tmp_path / "journal.jsonl")
    reg.register("zulu", "http://localhost:9000", _desc("zulu"))
    reg.register("alpha", "http://localhost:9001", _desc("alpha"))
    assert [r.name for r in reg.list()] == ["alpha", "zulu"]
    assert reg.find("zulu").endpoint == "http://localhost:9000"


def test_duplicate_name_rejected(tmp_path):
    reg = Registry()
    reg.register("a", "http://h:1", _desc())
    with pytest.raises(RegistryError, match="already registered"):
        reg.register("a", "http://h:2", _desc())


def test_unregister_then_find(tmp_path):
    reg = Registry()
    reg.register("a", "http://h:1", _desc())
    reg.unregister("a")
    with pytest.raises(RegistryError, match="unknown"):
        reg.find("a")
    with pytest.raises(RegistryError, match="unknown"):
        reg.unregister("a")


def test_bad_endpoint_rejected():
    reg = Registry()
    with pytest.raises(RegistryError, match="not a valid"):
        reg.register("a", "not-a-url", _desc())


def test_journal_replay(tmp_path):
    path = tmp_path / "reg.jsonl"
    reg = Registry(path)
    reg.register("a", "http://h:1", _desc("a"))
    reg.register("b", "http://h:2", _desc("b"))
    reg.unregister("a")
    rebuilt = Registry(path)
    assert rebuilt.names() == ["b"]
    assert rebuilt.find("b").description.archive == "b"


# -- xmatch oracles -----------------------------------------------------------


def all_pairs_xmatch(clients, sources, region, tol_arcsec):
    """Brute force: every seed against every object of every other source."""
    tol = tol_arcsec / 3600.0

    def load(archive, table):
        client = clients[archive]
        tdef = client.describe().tables[table].tdef
        pk, (ra_c, dec_c) = tdef.primary_key, tdef.spatial
        _, cols = client.fetch(table, None, (), [pk, ra_c, dec_c])
        return cols[pk], cols[ra_c], cols[dec_c]

    ids0, ra0, dec0 = load(*sources[0])
    seeds = [
        i
        for i in np.argsort(ids0, kind="stable")
        if angular_distance(SkyCoord(ra0[i], dec0[i]), region.center) <= region.radius
    ]
    others = [load(a, t) for a, t in sources[1:]]
    out = []
    for i in seeds:
        seed = SkyCoord(float(ra0[i]), float(dec0[i]))
        ids = [int(ids0[i])]
        seps = []
        ok = True
        for oids, oras, odecs in others:
            best = None
            for j in range(len(oids)):
                d = angular_distance(SkyCoord(float(oras[j]), float(odecs[j])), seed)
                if d <= tol and (best is None or (d, oids[j]) < best):
                    best = (d, int(oids[j]))
            if best is None:
                ok = False
                break
            seps.append(best[0] * 3600.0)
            ids.append(best[1])
        if ok:
            out.append((tuple(ids), tuple(seps)))
    return out


def test_single_source_is_cone_search(planted):
    spec = XMatchSpec((("arch_a", "obj"),), TOL_ARCSEC)
    tuples = xmatch(spec, REGION, planted)
    cat = planted["arch_a"].catalog
    _, cols = cat.filter_select(cat.latest_edition(), "obj", cone=REGION)
    assert [t.ids for t in tuples] == [(int(i),) for i in cols["id"]]
    assert all(t.separations_arcsec == () for t in tuples)


def test_disjoint_regions_empty(planted):
    spec = XMatchSpec((("arch_a", "obj"), ("arch_b", "obj")), TOL_ARCSEC)
    # clutter-only corner of arch_b's sky holds no arch_a object
    assert xmatch(spec, Cone(SkyCoord(172.0, 0.0), 1.0), planted) == []


def test_three_archive_all_pairs_oracle(planted):
    sources = (("arch_a", "obj"), ("arch_b", "obj"), ("arch_c", "obj"))
    spec = XMatchSpec(sources, TOL_ARCSEC)
    got = xmatch(spec, REGION, planted)
    expect = all_pairs_xmatch(planted, sources, REGION, TOL_ARCSEC)
    assert len(got) > 100  # the plant guarantees plenty of full matches
    assert [t.ids for t in got] == [ids for ids, _ in expect]
    for t, (_, seps) in zip(got, expect):
        assert t.separations_arcsec == pytest.approx(seps, abs=1e-9)


def test_separations_within_tolerance_and_reproducible(planted):
    spec = XMatchSpec((("arch_a", "obj"), ("arch_b", "obj")), TOL_ARCSEC)
    for t in xmatch(spec, REGION, planted):
        for k, sep in enumerate(t.separations_arcsec, start=1):
            assert sep <= TOL_ARCSEC
            again = angular_distance(t.coords[0], t.coords[k]) * 3600.0
            assert abs(again - sep) < 1e-6


def test_unknown_source_errors(planted):
    spec = XMatchSpec((("arch_a", "obj"), ("nowhere", "obj")), TOL_ARCSEC)
    with pytest.raises(FederationError, match="nowhere"):
        xmatch(spec, REGION, planted)


def test_unreachable_source_names_the_source(planted):
    class Down:
        def describe(self):
            return planted["arch_b"].describe()

        def fetch(self, *a, **k):
            raise ArchiveUnreachableError("connection refused")

    clients = dict(planted)
    clients["arch_b"] = Down()
    spec = XMatchSpec((("arch_a", "obj"), ("arch_b", "obj")), TOL_ARCSEC)
    with pytest.raises(SourceUnreachableError, match="arch_b"):
        xmatch(spec, REGION, clients)


def test_spec_validation():
    with pytest.raises(FederationError):
        XMatchSpec((), TOL_ARCSEC)
    with pytest.raises(FederationError):
        XMatchSpec((("a", "t"), ("b", "t")), 0.0)
    with pytest.raises(FederationError):
        XMatchSpec((("a", "t"), ("b", "t")), 4000.0)
