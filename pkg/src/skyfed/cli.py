"""Scriptable command-line client and admin tool.

Exit codes: 0 success, 1 usage error, 2 transport failure, 3 service-reported
error, 4 quota exceeded."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from . import capacity as capacity_model
from . import bench as bench_mod
from .catalog import Catalog, load_example_schema
from .catalog.schema import parse_schema
from .config import CliConfig, ConfigError, load_config
from .wire import TabularDocument, from_json_obj, to_csv, to_json_obj, to_xml

EXIT_USAGE = 1
EXIT_TRANSPORT = 2
EXIT_SERVICE = 3
EXIT_QUOTA = 4


class TransportFailure(RuntimeError):
    pass


class ServiceFailure(RuntimeError):
    pass


class QuotaFailure(ServiceFailure):
    pass


class Session:
    def __init__(self, cfg: CliConfig, http=None):
        self.cfg = cfg
        self.http = http if http is not None else httpx.Client(timeout=120.0)

    @property
    def headers(self) -> dict[str, str]:
        if not self.cfg.username:
            return {}
        return {"x-username": self.cfg.username, "x-secret": self.cfg.secret}

    def request(self, method: str, path: str, **kw) -> httpx.Response:
        url = self.cfg.portal.rstrip("/") + path
        try:
            r = self.http.request(method, url, headers=self.headers, **kw)
        except httpx.HTTPError as e:
            raise TransportFailure(f"{url}: {e}")
        if r.status_code >= 500:
            raise TransportFailure(f"{url}: HTTP {r.status_code}")
        return r

    def json_or_fail(self, r: httpx.Response) -> dict:
        body = r.json()
        if r.status_code >= 400:
            code = body.get("error", "service")
            raise ServiceFailure(f"[{code}] {body.get('message', r.text)}")
        return body

    def document(self, r: httpx.Response) -> TabularDocument:
        doc = from_json_obj(r.json())
        if doc.status == "error":
            if doc.code == "quota":
                raise QuotaFailure(f"[quota] {doc.message}")
            raise ServiceFailure(f"[{doc.code}] {doc.message}")
        return doc


def emit_document(doc: TabularDocument, fmt: str) -> None:
    if fmt == "csv":
        click.echo(to_csv(doc), nl=False)
    elif fmt == "json":
        click.echo(json.dumps(to_json_obj(doc)))
    else:
        click.echo(to_xml(doc))


_format_option = click.option(
    "--format", "fmt", default="xml", type=click.Choice(["xml", "json", "csv"])
)


@click.group()
@click.option("--config", "config_path", default=None, help="TOML config file")
@click.option("--portal", default=None, help="portal base URL")
@click.option("--username", default=None)
@click.option("--secret", default=None)
@click.option("--tier", default=None)
@click.pass_context
def cli(ctx, config_path, portal, username, secret, tier):
    ctx.ensure_object(dict)
    cfg = load_config(
        config_path, portal=portal, username=username, secret=secret, tier=tier
    )
    ctx.obj["session"] = Session(cfg, http=ctx.obj.get("http"))


def _read_query(text: str | None, query_file: str | None) -> str:
    if (text is None) == (query_file is None):
        raise click.UsageError("provide exactly one of QUERY or --query-file")
    return text if text is not None else Path(query_file).read_text().strip()


# -- read services -----------------------------------------------------------------


@cli.command()
@click.option("--archive", required=True)
@click.option("--ra", type=float, required=True)
@click.option("--dec", type=float, required=True)
@click.option("--sr", type=float, required=True)
@click.option("--table", default=None)
@_format_option
@click.pass_context
def cone(ctx, archive, ra, dec, sr, table, fmt):
    """All objects within a circle on the sky."""
    s: Session = ctx.obj["session"]
    params = {"archive": archive, "ra": ra, "dec": dec, "sr": sr, "format": "json"}
    if table:
        params["table"] = table
    doc = s.document(s.request("GET", "/cone", params=params))
    emit_document(doc, fmt)


@cli.command()
@click.option("--archive", required=True)
@click.option("--ra", type=float, required=True)
@click.option("--dec", type=float, required=True)
@click.option("--width", type=int, default=256)
@click.option("--height", type=int, default=256)
@click.option("--scale", type=float, required=True, help="degrees per pixel")
@click.option("--table", default=None)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.pass_context
def cutout(ctx, archive, ra, dec, width, height, scale, table, out):
    """Synthetic image of an area of the sky, written as 16-bit PGM."""
    s: Session = ctx.obj["session"]
    params = {
        "archive": archive, "ra": ra, "dec": dec,
        "width": width, "height": height, "scale": scale,
    }
    if table:
        params["table"] = table
    r = s.request("GET", "/cutout", params=params)
    ctype = r.headers.get("content-type", "")
    if not ctype.startswith("image/"):
        s.document(r)  # surfaces the error document
        raise ServiceFailure("unexpected non-image response")
    Path(out).write_bytes(r.content)
    click.echo(f"wrote {len(r.content)} bytes to {out}")


@cli.command()
@click.argument("text", required=False)
@click.option("--query-file", default=None, type=click.Path(exists=True))
@click.option("--tier", default=None)
@_format_option
@click.pass_context
def query(ctx, text, query_file, tier, fmt):
    """Synchronous federated query through the portal."""
    s: Session = ctx.obj["session"]
    doc = s.document(
        s.request(
            "POST",
            "/query",
            json={
                "text": _read_query(text, query_file),
                "tier": tier or s.cfg.tier,
                "format": "json",
            },
        )
    )
    emit_document(doc, fmt)


# -- jobs ---------------------------------------------------------------------------


@cli.group()
def job():
    """Batch jobs."""


@job.command("submit")
@click.argument("text", required=False)
@click.option("--query-file", default=None, type=click.Path(exists=True))
@click.option("--tier", default=None)
@click.pass_context
def job_submit(ctx, text, query_file, tier):
    s: Session = ctx.obj["session"]
    body = s.json_or_fail(
        s.request(
            "POST",
            "/jobs/submit",
            json={"text": _read_query(text, query_file), "tier": tier or s.cfg.tier},
        )
    )
    click.echo(json.dumps(body))


@job.command("status")
@click.argument("job_id", type=int)
@click.pass_context
def job_status(ctx, job_id):
    s: Session = ctx.obj["session"]
    click.echo(json.dumps(s.json_or_fail(s.request("GET", f"/jobs/{job_id}"))))


@job.command("rerun")
@click.argument("job_id", type=int)
@click.pass_context
def job_rerun(ctx, job_id):
    s: Session = ctx.obj["session"]
    body = s.json_or_fail(s.request("POST", f"/jobs/{job_id}/rerun"))
    click.echo(json.dumps(body))


@job.command("fetch")
@click.argument("job_id", type=int)
@_format_option
@click.pass_context
def job_fetch(ctx, job_id, fmt):
    """Result table of a succeeded job with an INTO target."""
    s: Session = ctx.obj["session"]
    rec = s.json_or_fail(s.request("GET", f"/jobs/{job_id}"))
    if rec["state"] != "succeeded" or not rec.get("target"):
        raise ServiceFailure(
            f"[job] job {job_id} is {rec['state']} with target {rec.get('target')!r}"
        )
    doc = s.document(
        s.request("GET", "/mydb/fetch", params={"table": rec["target"], "format": "json"})
    )
    emit_document(doc, fmt)


# -- mydb ---------------------------------------------------------------------------


@cli.group()
def mydb():
    """Personal database."""


@mydb.command("create")
@click.pass_context
def mydb_create(ctx):
    s: Session = ctx.obj["session"]
    click.echo(json.dumps(s.json_or_fail(s.request("POST", "/mydb/create", json={}))))


@mydb.command("upload")
@click.option("--table", required=True)
@click.option("--file", "path", required=True, type=click.Path(exists=True))
@click.option("--delimiter", default=",")
@click.pass_context
def mydb_upload(ctx, table, path, delimiter):
    s: Session = ctx.obj["session"]
    body = s.json_or_fail(
        s.request(
            "POST",
            "/mydb/upload",
            json={
                "table": table,
                "text": Path(path).read_text(),
                "delimiter": delimiter,
            },
        )
    )
    click.echo(json.dumps(body))


@mydb.command("fetch")
@click.option("--table", required=True)
@click.option("--owner", default=None)
@_format_option
@click.pass_context
def mydb_fetch(ctx, table, owner, fmt):
    s: Session = ctx.obj["session"]
    params = {"table": table, "format": "json"}
    if owner:
        params["owner"] = owner
    doc = s.document(s.request("GET", "/mydb/fetch", params=params))
    emit_document(doc, fmt)


@mydb.command("grant")
@click.option("--user", required=True)
@click.option("--level", required=True, type=click.Choice(["read", "write"]))
@click.pass_context
def mydb_grant(ctx, user, level):
    s: Session = ctx.obj["session"]
    s.json_or_fail(s.request("POST", "/mydb/grant", json={"user": user, "level": level}))
    click.echo("ok")


# -- registry -------------------------------------------------------------------------


@cli.group()
def registry():
    """Archive service registry."""


@registry.command("register")
@click.option("--name", required=True)
@click.option("--endpoint", required=True)
@click.pass_context
def registry_register(ctx, name, endpoint):
    s: Session = ctx.obj["session"]
    body = s.json_or_fail(
        s.request("POST", "/registry/register", json={"name": name, "endpoint": endpoint})
    )
    click.echo(json.dumps(body))


@registry.command("list")
@click.pass_context
def registry_list(ctx):
    s: Session = ctx.obj["session"]
    for rec in s.json_or_fail(s.request("GET", "/registry/list")):
        click.echo(f"{rec['name']}\t{rec['endpoint']}")


# -- local admin -----------------------------------------------------------------------


def _open_catalog(root: str, schema_path: str | None) -> Catalog:
    schema = (
        parse_schema(Path(schema_path).read_text())
        if schema_path
        else load_example_schema()
    )
    return Catalog(root, schema)


@cli.command()
@click.option("--root", required=True, type=click.Path(file_okay=False))
@click.option("--schema", "schema_path", default=None, type=click.Path(exists=True))
@click.argument("tables", nargs=-1, required=True)
def load(root, schema_path, tables):
    """Load TABLE=CSV_PATH pairs into a new edition."""
    cat = _open_catalog(root, schema_path)
    data = {}
    for spec in tables:
        if "=" not in spec:
            raise click.UsageError(f"expected TABLE=CSV_PATH, got {spec!r}")
        name, path = spec.split("=", 1)
        data[name] = Path(path)
    report = cat.load_tables(data)
    click.echo(
        f"edition {report.edition}: {report.rows_loaded} rows loaded, "
        f"{report.rows_rejected} rejected, checksum {report.checksum}"
    )
    for table, line, rule in report.rejections[:20]:
        click.echo(f"  rejected {table}:{line} ({rule})", err=True)


@cli.command()
@click.option("--root", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--schema", "schema_path", default=None, type=click.Path(exists=True))
@click.option("--fractions", default="0.01,0.1", help="ascending, comma-separated")
def pyramid(root, schema_path, fractions):
    """Publish nested subset editions of the latest edition."""
    cat = _open_catalog(root, schema_path)
    fracs = [float(f) for f in fractions.split(",")]
    for frac, edition in cat.make_pyramid(cat.latest_edition(), fracs):
        click.echo(f"fraction {frac}: edition {edition}")


@cli.command()
@click.option("--params", "params_path", default=None, type=click.Path(exists=True))
@click.option("--out", default="-", help="CSV output path, - for stdout")
@click.option("--step-years", type=float, default=1.0)
def capacity(params_path, out, step_years):
    """Project archive storage outlay; emits plot-ready CSV."""
    kwargs = tomli.loads(Path(params_path).read_text()) if params_path else {}
    try:
        params = capacity_model.ModelParams(**kwargs)
        projection = capacity_model.yearly_outlay(params, step_years=step_years)
    except (TypeError, capacity_model.CapacityError) as e:
        raise click.UsageError(str(e))
    text = projection.to_csv()
    if out == "-":
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out}", err=True)


@cli.group()
def bench():
    """Performance regression harness."""


@bench.command("run")
@click.option("--suite", "suite_path", default=None, type=click.Path(exists=True))
@click.option("--tier", default=None)
@click.option("--out", default=None, help="also write the report CSV here")
@click.pass_context
def bench_run(ctx, suite_path, tier, out):
    s: Session = ctx.obj["session"]
    suite = bench_mod.load_suite(suite_path)
    if any(q.category == "workspace" for q in suite) and s.cfg.username:
        r = s.request("POST", "/mydb/create", json={})
        if r.status_code not in (200, 409):
            s.json_or_fail(r)

    def query_fn(text: str) -> TabularDocument:
        r = s.request(
            "POST",
            "/query",
            json={"text": text, "tier": tier or s.cfg.tier, "format": "json"},
        )
        return from_json_obj(r.json())

    report = bench_mod.run_suite(suite, query_fn)
    click.echo(report.summary())
    if out:
        Path(out).write_text(report.to_csv())
    if not report.passed:
        raise ServiceFailure("[bench] one or more queries failed")


def main(argv: list[str] | None = None, http=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(
            args=argv if argv is not None else sys.argv[1:],
            standalone_mode=False,
            obj={"http": http},
        )
        return 0
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as e:
        e.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except ConfigError as e:
        click.echo(f"usage error: {e}", err=True)
        return EXIT_USAGE
    except TransportFailure as e:
        click.echo(f"transport failure: {e}", err=True)
        return EXIT_TRANSPORT
    except QuotaFailure as e:
        click.echo(f"quota exceeded: {e}", err=True)
        return EXIT_QUOTA
    except ServiceFailure as e:
        click.echo(f"service error: {e}", err=True)
        return EXIT_SERVICE
    except ValueError as e:
        click.echo(f"service error: {e}", err=True)
        return EXIT_SERVICE


if __name__ == "__main__":
    raise SystemExit(main())
