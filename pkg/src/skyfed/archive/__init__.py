"""Archive node: cone search, cutouts, synchronous queries, describe."""

from .cutout import CutoutError, CutoutImage, from_pgm, render_cutout, to_pgm
from .node import ArchiveNode, ParamError
from .app import create_app

__all__ = [
    "ArchiveNode",
    "CutoutError",
    "CutoutImage",
    "ParamError",
    "create_app",
    "from_pgm",
    "render_cutout",
    "to_pgm",
]
