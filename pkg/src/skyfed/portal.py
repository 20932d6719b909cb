"""The federation portal: registry endpoints, cross-match, federated
synchronous queries, batch jobs, and personal databases, all on one origin.

Read endpoints are public; anything that mutates state authenticates with a
username plus shared secret carried in headers."""

from __future__ import annotations

import json
import threading
from typing import Callable, Iterator, Mapping

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .clients import ArchiveClient, ArchiveUnreachableError, HttpArchiveClient
from .catalog.schema import ColumnMeta
from .federation import (
    FederationError,
    Registry,
    RegistryError,
    SourceUnreachableError,
    XMatchSpec,
    xmatch,
)
from .query.executor import ExecError, ExecLimits, QuotaExceededError, execute
from .query.parser import QuerySyntaxError, parse
from .query.planner import PlanError, RegistryView, plan as plan_query
from .sphere import Cone, SkyCoord, SphereError
from .tiers import DEFAULT_TIERS, Tier
from .wire import (
    JSON_MEDIA_TYPE,
    XML_MEDIA_TYPE,
    TabularDocument,
    to_json_obj,
    to_xml,
)
from .workspace import (
    AccessError,
    JobError,
    MyDbQuotaError,
    MyDbStore,
    Scheduler,
    WorkspaceError,
    make_runner,
)

USER_HEADER = "x-username"
SECRET_HEADER = "x-secret"


class PortalError(ValueError):
    pass


class _ClientMap(Mapping):
    """Live view of the registered archives as ArchiveClients."""

    def __init__(self, portal: "Portal"):
        self._portal = portal

    def __getitem__(self, name: str) -> ArchiveClient:
        return self._portal.client_for(name)

    def __iter__(self) -> Iterator[str]:
        return iter(self._portal.registry.names())

    def __len__(self) -> int:
        return len(self._portal.registry.names())


class Portal:
    def __init__(
        self,
        users: Mapping[str, str],
        registry: Registry | None = None,
        mydb: MyDbStore | None = None,
        tiers: dict[str, Tier] | None = None,
        workers: int = 2,
        max_doublings: int = 3,
        job_journal: str | None = None,
        http_factory: Callable[[str], object] | None = None,
        client_factory: Callable[[str], ArchiveClient] | None = None,
    ):
        self.users = dict(users)
        self.registry = registry if registry is not None else Registry()
        self.mydb = mydb if mydb is not None else MyDbStore()
        self.tiers = dict(tiers) if tiers is not None else dict(DEFAULT_TIERS)
        self._http_factory = http_factory
        self._client_factory = client_factory
        self._clients: dict[str, ArchiveClient] = {}
        self._clients_lock = threading.Lock()
        self.clients = _ClientMap(self)
        self.scheduler = Scheduler(
            make_runner(self.clients, self.mydb),
            mydb=self.mydb,
            tiers=self.tiers,
            max_doublings=max_doublings,
            workers=workers,
            journal=job_journal,
        )

    # -- archive clients -------------------------------------------------------

    def _new_client(self, endpoint: str) -> ArchiveClient:
        if self._client_factory is not None:
            return self._client_factory(endpoint)
        http = self._http_factory(endpoint) if self._http_factory else None
        return HttpArchiveClient(endpoint, http=http)

    def client_for(self, name: str) -> ArchiveClient:
        rec = self.registry.find(name)
        with self._clients_lock:
            if name not in self._clients:
                self._clients[name] = self._new_client(rec.endpoint)
            return self._clients[name]

    def _drop_client(self, name: str) -> None:
        with self._clients_lock:
            self._clients.pop(name, None)

    # -- auth --------------------------------------------------------------------

    def authenticate(self, request: Request) -> str:
        user = request.headers.get(USER_HEADER)
        secret = request.headers.get(SECRET_HEADER)
        if user is None or secret is None:
            raise PortalError("missing credentials")
        if self.users.get(user) != secret:
            raise PortalError("bad credentials")
        return user

    # -- federated query -----------------------------------------------------------

    def run_query(self, text: str, tier: str, caller: str | None) -> TabularDocument:
        if tier not in self.tiers:
            return TabularDocument.error("param", f"unknown tier {tier!r}")
        limits = self.tiers[tier]
        try:
            ast = parse(text)
        except QuerySyntaxError as e:
            return TabularDocument.error("syntax", str(e))
        deposit = None
        if ast.into is not None:
            if caller is None:
                return TabularDocument.error(
                    "auth", "INTO requires authenticated credentials"
                )
            if not self.mydb.exists(caller):
                return TabularDocument.error(
                    "param", f"{caller!r} has no personal database"
                )

            def deposit(name, result):
                self.mydb.upload_table(
                    caller, caller, name, result.columns, result.rows, replace=True
                )

        try:
            descriptions = {
                rec.name: rec.description for rec in self.registry.list()
            }
            qplan = plan_query(ast, RegistryView(descriptions))
        except PlanError as e:
            return TabularDocument.error("plan", str(e))
        try:
            result = execute(
                qplan,
                self.clients,
                ExecLimits(limits.elapsed_s, limits.row_cap),
                deposit=deposit,
            )
        except QuotaExceededError as e:
            return TabularDocument.error("quota", str(e))
        except ArchiveUnreachableError as e:
            return TabularDocument.error("unreachable", str(e))
        except (MyDbQuotaError, WorkspaceError, ExecError, SphereError, ValueError) as e:
            return TabularDocument.error("exec", str(e))
        return TabularDocument(
            columns=list(result.columns),
            rows=list(result.rows),
            truncated=result.truncated,
        )

    # -- cross-match ------------------------------------------------------------------

    def run_xmatch(
        self, sources: list[tuple[str, str]], tolerance_arcsec: float, region: Cone
    ) -> TabularDocument:
        try:
            spec = XMatchSpec(tuple(sources), tolerance_arcsec)
            tuples = xmatch(spec, region, self.clients)
        except (FederationError, RegistryError) as e:
            return TabularDocument.error("param", str(e))
        except SourceUnreachableError as e:
            return TabularDocument.error("unreachable", str(e))

        columns: list[ColumnMeta] = []
        seen: dict[str, int] = {}
        for k, (archive, _) in enumerate(spec.sources):
            seen[archive] = seen.get(archive, 0) + 1
            tag = archive if seen[archive] == 1 else f"{archive}_{seen[archive]}"
            columns.append(ColumnMeta(f"{tag}_id", "integer", "", "meta.id", ""))
            columns.append(ColumnMeta(f"{tag}_ra", "real", "deg", "pos.eq.ra", ""))
            columns.append(ColumnMeta(f"{tag}_dec", "real", "deg", "pos.eq.dec", ""))
            if k > 0:
                columns.append(
                    ColumnMeta(f"sep_{tag}", "real", "arcsec", "pos.angDistance", "")
                )
        rows = []
        for t in tuples:
            row: list = []
            for k in range(len(t.ids)):
                row.extend([t.ids[k], t.coords[k].ra, t.coords[k].dec])
                if k > 0:
                    row.append(t.separations_arcsec[k - 1])
            rows.append(tuple(row))
        return TabularDocument(columns=columns, rows=rows)


# -- HTTP surface ------------------------------------------------------------------


class RegisterRequest(BaseModel):
    name: str
    endpoint: str


class XMatchRequest(BaseModel):
    sources: list[list[str]]  # [archive, table] pairs, first is primary
    tolerance_arcsec: float = 2.0
    ra: float
    dec: float
    sr: float
    format: str = "json"


class PortalQueryRequest(BaseModel):
    text: str
    tier: str = "public"
    format: str = "xml"


class JobSubmitRequest(BaseModel):
    text: str
    tier: str = "public"


class MyDbCreateRequest(BaseModel):
    quota_bytes: int | None = None


class MyDbUploadRequest(BaseModel):
    owner: str | None = None  # defaults to caller
    table: str
    text: str  # delimited text, first line is the header
    delimiter: str = ","


class GrantRequest(BaseModel):
    user: str
    level: str


def _error_json(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def _doc_response(doc: TabularDocument, fmt: str) -> Response:
    if fmt == "json":
        return Response(json.dumps(to_json_obj(doc)), media_type=JSON_MEDIA_TYPE)
    return Response(to_xml(doc), media_type=XML_MEDIA_TYPE)


def _job_obj(job) -> dict:
    return job.to_obj()


def _parse_uploaded_table(text: str, delimiter: str):
    """Delimited text to typed columns: integer when every cell parses as
    one, else real, else text."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise WorkspaceError("upload is empty")
    names = [h.strip() for h in lines[0].split(delimiter)]
    raw_rows = []
    for ln in lines[1:]:
        cells = ln.split(delimiter)
        if len(cells) != len(names):
            raise WorkspaceError(
                f"row arity {len(cells)} does not match header arity {len(names)}"
            )
        raw_rows.append(cells)
    columns = []
    converted: list[list] = []
    for j, name in enumerate(names):
        cells = [r[j] for r in raw_rows]
        try:
            vals = [int(c) for c in cells]
            kind = "integer"
        except ValueError:
            try:
                vals = [float(c) for c in cells]
                kind = "real"
            except ValueError:
                vals = cells
                kind = "text"
        columns.append(ColumnMeta(name, kind, "", "meta.note", ""))
        converted.append(vals)
    rows = [tuple(col[i] for col in converted) for i in range(len(raw_rows))]
    return columns, rows


def create_portal_app(portal: Portal) -> FastAPI:
    app = FastAPI(title="federation portal")

    def auth(request: Request) -> str | None:
        if USER_HEADER not in request.headers:
            return None
        return portal.authenticate(request)

    # -- registry ---------------------------------------------------------------

    @app.post("/registry/register")
    def register(req: RegisterRequest, request: Request):
        try:
            portal.authenticate(request)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        try:
            client = portal._new_client(req.endpoint)
            description = client.describe()
            rec = portal.registry.register(req.name, req.endpoint, description)
        except RegistryError as e:
            return _error_json(409, "registry", str(e))
        except ArchiveUnreachableError as e:
            return _error_json(502, "unreachable", str(e))
        portal._drop_client(req.name)
        return rec.to_obj()

    @app.post("/registry/unregister")
    def unregister(req: RegisterRequest, request: Request):
        try:
            portal.authenticate(request)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        try:
            portal.registry.unregister(req.name)
        except RegistryError as e:
            return _error_json(404, "registry", str(e))
        portal._drop_client(req.name)
        return {"ok": True}

    @app.get("/registry/list")
    def registry_list():
        return [rec.to_obj() for rec in portal.registry.list()]

    @app.get("/registry/find")
    def registry_find(name: str):
        try:
            return portal.registry.find(name).to_obj()
        except RegistryError as e:
            return _error_json(404, "registry", str(e))

    # -- query and xmatch ----------------------------------------------------------

    @app.post("/query")
    def query(req: PortalQueryRequest, request: Request):
        fmt = req.format if req.format in ("xml", "json") else "xml"
        try:
            caller = auth(request)
        except PortalError as e:
            return _doc_response(TabularDocument.error("auth", str(e)), fmt)
        doc = portal.run_query(req.text, req.tier, caller)
        return _doc_response(doc, fmt)

    @app.post("/xmatch")
    def do_xmatch(req: XMatchRequest):
        fmt = req.format if req.format in ("xml", "json") else "json"
        try:
            sources = [(a, t) for a, t in req.sources]
            region = Cone(SkyCoord(req.ra, req.dec), req.sr)
        except (ValueError, SphereError) as e:
            return _doc_response(TabularDocument.error("param", str(e)), fmt)
        doc = portal.run_xmatch(sources, req.tolerance_arcsec, region)
        return _doc_response(doc, fmt)

    # -- jobs ---------------------------------------------------------------------

    @app.post("/jobs/submit")
    def jobs_submit(req: JobSubmitRequest, request: Request):
        try:
            caller = portal.authenticate(request)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        try:
            job = portal.scheduler.submit(caller, req.text, req.tier)
        except JobError as e:
            return _error_json(400, "job", str(e))
        return _job_obj(job)

    @app.get("/jobs/{job_id}")
    def jobs_status(job_id: int):
        try:
            return _job_obj(portal.scheduler.job_status(job_id))
        except JobError as e:
            return _error_json(404, "job", str(e))

    @app.post("/jobs/{job_id}/rerun")
    def jobs_rerun(job_id: int, request: Request):
        try:
            caller = portal.authenticate(request)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        try:
            prior = portal.scheduler.job_status(job_id)
            if prior.owner != caller:
                return _error_json(403, "auth", "not your job")
            return _job_obj(portal.scheduler.rerun_with_doubled_quota(job_id))
        except JobError as e:
            return _error_json(400, "job", str(e))

    @app.get("/jobs")
    def jobs_list(owner: str | None = None, state: str | None = None):
        return [_job_obj(j) for j in portal.scheduler.list_jobs(owner, state)]

    # -- mydb ---------------------------------------------------------------------

    @app.post("/mydb/create")
    def mydb_create(req: MyDbCreateRequest, request: Request):
        try:
            caller = portal.authenticate(request)
            db = portal.mydb.create(caller, req.quota_bytes)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        except WorkspaceError as e:
            return _error_json(409, "mydb", str(e))
        return {"owner": db.owner, "quota_bytes": db.quota_bytes}

    @app.post("/mydb/upload")
    def mydb_upload(req: MyDbUploadRequest, request: Request):
        try:
            caller = portal.authenticate(request)
            owner = req.owner or caller
            columns, rows = _parse_uploaded_table(req.text, req.delimiter)
            table = portal.mydb.upload_table(owner, caller, req.table, columns, rows)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        except AccessError as e:
            return _error_json(403, "access", str(e))
        except MyDbQuotaError as e:
            return _error_json(413, "quota", str(e))
        except WorkspaceError as e:
            return _error_json(400, "mydb", str(e))
        return {"table": req.table, "rows": len(table.rows), "bytes": table.nbytes}

    @app.get("/mydb/fetch")
    def mydb_fetch(request: Request, table: str, owner: str | None = None,
                   format: str = "json"):
        fmt = format if format in ("xml", "json") else "json"
        try:
            caller = portal.authenticate(request)
            doc = portal.mydb.fetch_table(owner or caller, caller, table)
        except PortalError as e:
            return _doc_response(TabularDocument.error("auth", str(e)), fmt)
        except AccessError as e:
            return _doc_response(TabularDocument.error("access", str(e)), fmt)
        except WorkspaceError as e:
            return _doc_response(TabularDocument.error("mydb", str(e)), fmt)
        return _doc_response(doc, fmt)

    @app.post("/mydb/grant")
    def mydb_grant(req: GrantRequest, request: Request):
        try:
            caller = portal.authenticate(request)
            portal.mydb.grant(caller, caller, req.user, req.level)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        except AccessError as e:
            return _error_json(403, "access", str(e))
        except WorkspaceError as e:
            return _error_json(400, "mydb", str(e))
        return {"ok": True}

    @app.get("/mydb/list")
    def mydb_list(request: Request, owner: str | None = None):
        try:
            caller = portal.authenticate(request)
            target = owner or caller
            tables = portal.mydb.list_tables(target, caller)
            db = portal.mydb.get(target)
        except PortalError as e:
            return _error_json(401, "auth", str(e))
        except AccessError as e:
            return _error_json(403, "access", str(e))
        except WorkspaceError as e:
            return _error_json(404, "mydb", str(e))
        return {
            "owner": target,
            "tables": tables,
            "used_bytes": db.used_bytes,
            "quota_bytes": db.quota_bytes,
        }

    # -- archive proxies -------------------------------------------------------------

    def _proxy(request: Request, path: str) -> Response:
        params = dict(request.query_params)
        archive = params.pop("archive", None)
        if archive is None:
            return _doc_response(
                TabularDocument.error("param", "missing parameter 'archive'"), "xml"
            )
        try:
            rec = portal.registry.find(archive)
        except RegistryError as e:
            return _doc_response(TabularDocument.error("param", str(e)), "xml")
        http = (
            portal._http_factory(rec.endpoint)
            if portal._http_factory
            else __import__("httpx").Client()
        )
        try:
            r = http.request("GET", rec.endpoint + path, params=params)
        except Exception as e:
            return _doc_response(
                TabularDocument.error("unreachable", f"{archive}: {e}"), "xml"
            )
        return Response(
            r.content,
            status_code=r.status_code,
            media_type=r.headers.get("content-type", "application/octet-stream"),
        )

    @app.get("/cone")
    def cone_proxy(request: Request):
        return _proxy(request, "/cone")

    @app.get("/cutout")
    def cutout_proxy(request: Request):
        return _proxy(request, "/cutout")

    return app
