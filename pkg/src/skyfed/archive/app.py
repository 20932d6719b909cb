"""HTTP surface for one archive node.

Parameters arrive as strings and are validated by hand so that malformed
input produces an error document on a 200 response instead of a transport
failure; callers can always parse what comes back."""

from __future__ import annotations

from fastapi import FastAPI, Request, Response
from pydantic import BaseModel

from ..wire import (
    JSON_MEDIA_TYPE,
    XML_MEDIA_TYPE,
    TabularDocument,
    to_json_obj,
    to_xml,
)
from .cutout import CutoutError, to_pgm
from .node import ArchiveNode, ParamError

PGM_MEDIA_TYPE = "image/x-portable-graymap"


class QueryRequest(BaseModel):
    text: str
    tier: str = "public"
    format: str = "xml"


def _document_response(doc: TabularDocument, fmt: str) -> Response:
    if fmt == "json":
        import json

        return Response(json.dumps(to_json_obj(doc)), media_type=JSON_MEDIA_TYPE)
    return Response(to_xml(doc), media_type=XML_MEDIA_TYPE)


def _parse_float(params, name: str, default: str | None = None) -> float:
    raw = params.get(name, default)
    if raw is None:
        raise ParamError(f"missing parameter {name!r}")
    try:
        return float(raw)
    except ValueError:
        raise ParamError(f"parameter {name!r} is not a number: {raw!r}")


def _parse_int(params, name: str, default: str | None = None) -> int:
    raw = params.get(name, default)
    if raw is None:
        raise ParamError(f"missing parameter {name!r}")
    try:
        return int(raw)
    except ValueError:
        raise ParamError(f"parameter {name!r} is not an integer: {raw!r}")


def _format_of(params) -> str:
    fmt = params.get("format", "xml")
    if fmt not in ("xml", "json"):
        raise ParamError(f"unknown format {fmt!r}")
    return fmt


def create_app(node: ArchiveNode) -> FastAPI:
    app = FastAPI(title=f"archive node: {node.name}")

    @app.get("/describe")
    def describe():
        return node.describe_service().to_obj()

    @app.get("/cone")
    def cone(request: Request):
        params = request.query_params
        fmt = "xml"
        try:
            fmt = _format_of(params)
            ra = _parse_float(params, "ra")
            dec = _parse_float(params, "dec")
            sr = _parse_float(params, "sr")
        except ParamError as e:
            return _document_response(TabularDocument.error("param", str(e)), fmt)
        doc = node.handle_cone_search(ra, dec, sr, table=params.get("table"))
        return _document_response(doc, fmt)

    @app.get("/cutout")
    def cutout(request: Request):
        params = request.query_params
        try:
            fmt = _format_of(params)
            ra = _parse_float(params, "ra")
            dec = _parse_float(params, "dec")
            width = _parse_int(params, "width", "256")
            height = _parse_int(params, "height", "256")
            scale = _parse_float(params, "scale")
            img = node.handle_cutout(
                ra,
                dec,
                width,
                height,
                scale,
                table=params.get("table"),
                band=params.get("band"),
            )
        except (ParamError, CutoutError) as e:
            fmt = params.get("format") if params.get("format") in ("xml", "json") else "xml"
            return _document_response(TabularDocument.error("param", str(e)), fmt)
        return Response(to_pgm(img), media_type=PGM_MEDIA_TYPE)

    @app.post("/query")
    def query(req: QueryRequest):
        try:
            fmt = _format_of({"format": req.format})
        except ParamError as e:
            return _document_response(TabularDocument.error("param", str(e)), "xml")
        doc = node.handle_query(req.text, req.tier)
        return _document_response(doc, fmt)

    return app
