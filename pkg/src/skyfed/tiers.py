"""Synchronous/batch resource tiers shared by archive nodes and the portal."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tier:
    name: str
    elapsed_s: float
    row_cap: int


DEFAULT_TIERS: dict[str, Tier] = {
    "public": Tier("public", 90.0, 1_000),
    "collaboration": Tier("collaboration", 5_400.0, 500_000),
}
