import io

import numpy as np
import pytest

from skyfed.catalog import Catalog, load_example_schema


def random_sky(rng, n):
    """Uniform points on the sphere, degrees."""
    ra = rng.uniform(0.0, 360.0, n)
    dec = np.degrees(np.arcsin(rng.uniform(-1.0, 1.0, n)))
    return ra, dec


def synthesize_spine_csv(n_photo: int, n_spec: int, seed: int = 0):
    """Delimited-text inputs for the example spine schema. Every photo row
    references an existing spectrum so the load is rejection-free."""
    rng = np.random.default_rng(seed)
    spec_ids = np.arange(1, n_spec + 1) * 10
    ra_s, dec_s = (a.tolist() for a in random_sky(rng, n_spec))
    spec = io.StringIO()
    spec.write("id,ra,dec,z,z_err,sn_median,class\n")
    classes = ("GALAXY", "QSO", "STAR")
    zs = rng.uniform(0.0, 3.0, n_spec).tolist()
    zerrs = rng.uniform(1e-5, 1e-3, n_spec).tolist()
    sns = rng.uniform(1.0, 40.0, n_spec).tolist()
    kls = rng.integers(0, 3, n_spec)
    for i in range(n_spec):
        spec.write(
            f"{spec_ids[i]},{ra_s[i]!r},{dec_s[i]!r},{zs[i]!r},{zerrs[i]!r},"
            f"{sns[i]!r},{classes[kls[i]]}\n"
        )

    photo_ids = np.arange(1, n_photo + 1)
    ra_p, dec_p = (a.tolist() for a in random_sky(rng, n_photo))
    mags = rng.uniform(14.0, 24.0, (n_photo, 3)).tolist()
    sat = rng.integers(0, 2, n_photo)
    ref = rng.choice(spec_ids, n_photo) if n_spec else np.zeros(n_photo, dtype=int)
    photo = io.StringIO()
    photo.write("id,ra,dec,mag_g,mag_r,mag_i,saturated,spec_id\n")
    for i in range(n_photo):
        photo.write(
            f"{photo_ids[i]},{ra_p[i]!r},{dec_p[i]!r},{mags[i][0]!r},{mags[i][1]!r},"
            f"{mags[i][2]!r},{sat[i]},{ref[i]}\n"
        )
    return {"photo_obj": io.StringIO(photo.getvalue()), "spec_obj": io.StringIO(spec.getvalue())}


@pytest.fixture(scope="session")
def example_schema():
    return load_example_schema()


@pytest.fixture()
def empty_catalog(tmp_path, example_schema):
    return Catalog(tmp_path / "cat", example_schema)


@pytest.fixture(scope="session")
def small_catalog(tmp_path_factory, example_schema):
    """20k photo objects / 2k spectra, loaded once per session."""
    cat = Catalog(tmp_path_factory.mktemp("smallcat"), example_schema)
    report = cat.load_tables(synthesize_spine_csv(20_000, 2_000, seed=42))
    assert report.rows_rejected == 0
    return cat
