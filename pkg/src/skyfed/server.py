"""Process entry points: run one archive node or the federation portal.

The server config is TOML::

    mode = "node"            # or "portal"
    host = "127.0.0.1"
    port = 8100

    [node]                   # mode = "node"
    name = "sky"
    root = "/var/skyfed/sky" # catalog root with published editions
    schema = "spine.txt"     # omit to use the bundled example schema

    [portal]                 # mode = "portal"
    job_journal = "jobs.jsonl"
    [portal.users]
    ann = "shared-secret"

    [tiers.public]           # optional tier overrides for either mode
    elapsed_s = 90.0
    row_cap = 1000
"""

from __future__ import annotations

import argparse
from pathlib import Path

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

from .archive import ArchiveNode, create_app
from .catalog import Catalog, load_example_schema
from .catalog.schema import parse_schema
from .config import ConfigError
from .portal import Portal, create_portal_app
from .tiers import DEFAULT_TIERS, Tier


def _tiers_from(obj: dict) -> dict[str, Tier]:
    tiers = dict(DEFAULT_TIERS)
    for name, spec in obj.get("tiers", {}).items():
        tiers[name] = Tier(name, float(spec["elapsed_s"]), int(spec["row_cap"]))
    return tiers


def build_app(config: dict):
    mode = config.get("mode", "node")
    tiers = _tiers_from(config)
    if mode == "node":
        node_cfg = config.get("node", {})
        if "root" not in node_cfg:
            raise ConfigError("node mode requires node.root")
        schema_path = node_cfg.get("schema")
        schema = (
            parse_schema(Path(schema_path).read_text())
            if schema_path
            else load_example_schema()
        )
        catalog = Catalog(node_cfg["root"], schema)
        return create_app(ArchiveNode(node_cfg.get("name", "sky"), catalog, tiers))
    if mode == "portal":
        portal_cfg = config.get("portal", {})
        portal = Portal(
            users=portal_cfg.get("users", {}),
            tiers=tiers,
            workers=int(portal_cfg.get("workers", 2)),
            job_journal=portal_cfg.get("job_journal"),
        )
        return create_portal_app(portal)
    raise ConfigError(f"unknown mode {mode!r}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="skyfed-server")
    parser.add_argument("--config", required=True, help="TOML server config")
    parser.add_argument("--host", default=None)
    parser.add_argument("--port", type=int, default=None)
    args = parser.parse_args(argv)
    config = tomli.loads(Path(args.config).read_text())
    app = build_app(config)

    import uvicorn

    uvicorn.run(
        app,
        host=args.host or config.get("host", "127.0.0.1"),
        port=args.port or int(config.get("port", 8000)),
        log_level="info",
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
