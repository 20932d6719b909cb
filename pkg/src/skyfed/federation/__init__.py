"""Service registry and cross-match federation."""

from .registry import Registry, RegistryError, ServiceRecord
from .xmatch import (
    DEFAULT_TOLERANCE_ARCSEC,
    FederationError,
    MatchedTuple,
    SourceUnreachableError,
    XMatchSpec,
    xmatch,
)

__all__ = [
    "DEFAULT_TOLERANCE_ARCSEC",
    "FederationError",
    "MatchedTuple",
    "Registry",
    "RegistryError",
    "ServiceRecord",
    "SourceUnreachableError",
    "XMatchSpec",
    "xmatch",
]
