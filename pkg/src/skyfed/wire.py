"""Tabular wire format: an XML document shaped like VOTable's
RESOURCE/TABLE/FIELD/TABLEDATA nesting, plus an equivalent JSON rendering.

serialize -> parse is the identity for every valid document; this is the
normative interchange format for all service responses.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .catalog.schema import ColumnMeta

XML_MEDIA_TYPE = "application/xml"
JSON_MEDIA_TYPE = "application/json"


class WireError(ValueError):
    pass


@dataclass
class TabularDocument:
    columns: list[ColumnMeta]
    rows: list[tuple]
    status: str = "ok"  # "ok" | "error"
    code: str = ""  # machine-readable error code when status == "error"
    message: str = ""
    truncated: bool = False

    def __post_init__(self):
        if self.status not in ("ok", "error"):
            raise WireError(f"bad status {self.status!r}")
        if self.status == "error" and self.rows:
            raise WireError("error documents must not carry rows")
        arity = len(self.columns)
        for r in self.rows:
            if len(r) != arity:
                raise WireError(f"row arity {len(r)} != header arity {arity}")

    @property
    def rows_emitted(self) -> int:
        return len(self.rows)

    @classmethod
    def error(cls, code: str, message: str) -> "TabularDocument":
        return cls(columns=[], rows=[], status="error", code=code, message=message)


def _encode_cell(value, kind: str) -> str:
    if kind == "integer":
        return str(int(value))
    if kind == "real":
        return repr(float(value))
    if kind == "flag":
        return "1" if int(value) else "0"
    return str(value)


def _decode_cell(text: str, kind: str):
    if kind == "integer":
        return int(text)
    if kind == "real":
        return float(text)
    if kind == "flag":
        return int(text)
    return text


def to_xml(doc: TabularDocument) -> str:
    root = ET.Element("RESPONSE")
    ET.SubElement(root, "INFO", name="status", value=doc.status)
    ET.SubElement(root, "INFO", name="truncated", value="true" if doc.truncated else "false")
    if doc.status == "error":
        ET.SubElement(root, "INFO", name="code", value=doc.code)
        ET.SubElement(root, "INFO", name="message", value=doc.message)
    res = ET.SubElement(root, "RESOURCE")
    table = ET.SubElement(res, "TABLE")
    for c in doc.columns:
        ET.SubElement(
            table,
            "FIELD",
            name=c.name,
            kind=c.kind,
            unit=c.unit,
            ucd=c.ucd,
            description=c.description,
        )
    data = ET.SubElement(table, "DATA")
    tabledata = ET.SubElement(data, "TABLEDATA")
    for row in doc.rows:
        tr = ET.SubElement(tabledata, "TR")
        for value, c in zip(row, doc.columns):
            td = ET.SubElement(tr, "TD")
            td.text = _encode_cell(value, c.kind)
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def from_xml(text: str) -> TabularDocument:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as e:
        raise WireError(f"malformed XML: {e}") from e
    if root.tag != "RESPONSE":
        raise WireError(f"unexpected root element {root.tag!r}")
    infos = {e.get("name"): e.get("value") for e in root.findall("INFO")}
    columns = [
        ColumnMeta(
            name=f.get("name"),
            kind=f.get("kind"),
            unit=f.get("unit", ""),
            ucd=f.get("ucd", ""),
            description=f.get("description", ""),
        )
        for f in root.findall("./RESOURCE/TABLE/FIELD")
    ]
    rows = []
    for tr in root.findall("./RESOURCE/TABLE/DATA/TABLEDATA/TR"):
        cells = tr.findall("TD")
        if len(cells) != len(columns):
            raise WireError("row arity does not match header")
        rows.append(
            tuple(_decode_cell(td.text or "", c.kind) for td, c in zip(cells, columns))
        )
    return TabularDocument(
        columns=columns,
        rows=rows,
        status=infos.get("status", "ok"),
        code=infos.get("code", ""),
        message=infos.get("message", ""),
        truncated=infos.get("truncated") == "true",
    )


def to_json_obj(doc: TabularDocument) -> dict:
    return {
        "status": doc.status,
        "truncated": doc.truncated,
        "code": doc.code,
        "message": doc.message,
        "columns": [
            {
                "name": c.name,
                "kind": c.kind,
                "unit": c.unit,
                "ucd": c.ucd,
                "description": c.description,
            }
            for c in doc.columns
        ],
        "rows": [list(r) for r in doc.rows],
    }


def from_json_obj(obj: dict) -> TabularDocument:
    columns = [ColumnMeta(**c) for c in obj.get("columns", [])]
    rows = []
    for r in obj.get("rows", []):
        if len(r) != len(columns):
            raise WireError("row arity does not match header")
        rows.append(tuple(_decode_cell(str(v), c.kind) if c.kind != "real" else float(v)
                          for v, c in zip(r, columns)))
    return TabularDocument(
        columns=columns,
        rows=rows,
        status=obj.get("status", "ok"),
        code=obj.get("code", ""),
        message=obj.get("message", ""),
        truncated=bool(obj.get("truncated", False)),
    )


def to_csv(doc: TabularDocument) -> str:
    """Script-friendly rendering; header row of column names."""
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([c.name for c in doc.columns])
    for row in doc.rows:
        w.writerow([_encode_cell(v, c.kind) for v, c in zip(row, doc.columns)])
    return buf.getvalue()
