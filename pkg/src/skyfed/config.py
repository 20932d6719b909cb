"""Client/server configuration: TOML file, environment overrides, flags.

Precedence for every field is flag > environment > file > built-in default."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib as tomli
except ModuleNotFoundError:  # Python < 3.11
    import tomli

ENV_CONFIG = "SKYFED_CONFIG"
ENV_PORTAL = "SKYFED_PORTAL"
ENV_USERNAME = "SKYFED_USERNAME"
ENV_SECRET = "SKYFED_SECRET"
ENV_TIER = "SKYFED_TIER"


class ConfigError(ValueError):
    pass


@dataclass
class CliConfig:
    portal: str = "http://127.0.0.1:8000"
    archives: dict[str, str] = field(default_factory=dict)
    username: str = ""
    secret: str = ""
    tier: str = "public"

    def __post_init__(self):
        for url in [self.portal, *self.archives.values()]:
            if not (url.startswith("http://") or url.startswith("https://")):
                raise ConfigError(f"endpoint {url!r} is not an http(s) URL")


def load_config(
    path: str | Path | None = None,
    *,
    portal: str | None = None,
    username: str | None = None,
    secret: str | None = None,
    tier: str | None = None,
    env: dict[str, str] | None = None,
) -> CliConfig:
    env = env if env is not None else dict(os.environ)
    file_values: dict = {}
    path = path if path is not None else env.get(ENV_CONFIG)
    if path:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        file_values = tomli.loads(p.read_text())

    def pick(flag, env_key, file_key, default):
        if flag is not None:
            return flag
        if env_key in env:
            return env[env_key]
        return file_values.get(file_key, default)

    return CliConfig(
        portal=pick(portal, ENV_PORTAL, "portal", "http://127.0.0.1:8000"),
        archives=dict(file_values.get("archives", {})),
        username=pick(username, ENV_USERNAME, "username", ""),
        secret=pick(secret, ENV_SECRET, "secret", ""),
        tier=pick(tier, ENV_TIER, "tier", "public"),
    )
