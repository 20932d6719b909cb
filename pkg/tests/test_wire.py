import numpy as np
import pytest

from skyfed.catalog import ColumnMeta
from skyfed.wire import (
    TabularDocument,
    WireError,
    from_json_obj,
    from_xml,
    to_csv,
    to_json_obj,
    to_xml,
)

KINDS = ("integer", "real", "text", "flag")


def random_document(rng) -> TabularDocument:
    ncols = int(rng.integers(1, 6))
    cols = []
    for i in range(ncols):
        kind = KINDS[int(rng.integers(0, len(KINDS)))]
        cols.append(
            ColumnMeta(
                name=f"c{i}",
                kind=kind,
                unit=("deg", "mag", "")[int(rng.integers(0, 3))],
                ucd=("meta.id", "pos.eq.ra", "phot.mag", "")[int(rng.integers(0, 4))],
                description=f"column {i}",
            )
        )
    nrows = int(rng.integers(0, 30))
    rows = []
    words = ["alpha", "bravo", "q'so", "x y", "", "<&>"]
    for _ in range(nrows):
        row = []
        for c in cols:
            if c.kind == "integer":
                row.append(int(rng.integers(-(2**40), 2**40)))
            elif c.kind == "real":
                row.append(float(np.float64(rng.normal() * 10.0 ** rng.integers(-8, 8))))
            elif c.kind == "flag":
                row.append(int(rng.integers(0, 2)))
            else:
                row.append(words[int(rng.integers(0, len(words)))])
        rows.append(tuple(row))
    return TabularDocument(columns=cols, rows=rows, truncated=bool(rng.integers(0, 2)))


class TestRoundTrip:
    def test_xml_identity_randomized(self):
        rng = np.random.default_rng(1234)
        for _ in range(1000):
            doc = random_document(rng)
            back = from_xml(to_xml(doc))
            assert back == doc

    def test_json_identity_randomized(self):
        rng = np.random.default_rng(99)
        for _ in range(300):
            doc = random_document(rng)
            back = from_json_obj(to_json_obj(doc))
            assert back == doc

    def test_error_document_round_trip(self):
        doc = TabularDocument.error("syntax", "unexpected 'FROM' at line 1, column 8")
        back = from_xml(to_xml(doc))
        assert back == doc
        assert back.status == "error" and back.code == "syntax"


class TestInvariants:
    def test_row_arity_enforced(self):
        cols = [ColumnMeta("a", "integer", "", "meta.id", "")]
        with pytest.raises(WireError):
            TabularDocument(columns=cols, rows=[(1, 2)])

    def test_error_with_rows_rejected(self):
        cols = [ColumnMeta("a", "integer", "", "meta.id", "")]
        with pytest.raises(WireError):
            TabularDocument(columns=cols, rows=[(1,)], status="error", code="x")

    def test_malformed_xml_rejected(self):
        with pytest.raises(WireError):
            from_xml("<nope>")
        with pytest.raises(WireError):
            from_xml("<WRONG/>")

    def test_rows_emitted(self):
        cols = [ColumnMeta("a", "integer", "", "meta.id", "")]
        doc = TabularDocument(columns=cols, rows=[(1,), (2,)])
        assert doc.rows_emitted == 2


class TestCsv:
    def test_header_and_values(self):
        cols = [
            ColumnMeta("id", "integer", "", "meta.id", ""),
            ColumnMeta("mag", "real", "mag", "phot.mag", ""),
        ]
        doc = TabularDocument(columns=cols, rows=[(1, 17.25), (2, 18.5)])
        text = to_csv(doc)
        assert text.splitlines()[0] == "id,mag"
        assert text == to_csv(doc)  # byte-stable
