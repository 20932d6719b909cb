"""Synthetic sky cutouts: catalog objects rendered as Gaussian spots on a
gnomonic (tangent-plane) projection, written as 16-bit binary PGM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..sphere import Cone, SkyCoord

MAX_DIMENSION = 4096
SPOT_SIGMA_PX = 1.5
_STAMP_HALF = 8  # > 5 sigma; spot contribution beyond this is sub-quantum


class CutoutError(ValueError):
    pass


@dataclass
class CutoutImage:
    width: int
    height: int
    scale: float  # degrees per pixel
    center: SkyCoord
    intensities: np.ndarray  # uint16, shape (height, width)

    def __post_init__(self):
        if self.intensities.shape != (self.height, self.width):
            raise CutoutError("intensity grid does not match requested dimensions")


def tangent_plane(ra: np.ndarray, dec: np.ndarray, center: SkyCoord):
    """Gnomonic projection to (xi, eta) in degrees; points more than 90 deg
    from the tangent point project to infinity and are masked out."""
    ra0 = math.radians(center.ra)
    dec0 = math.radians(center.dec)
    a = np.radians(np.asarray(ra, dtype=np.float64))
    d = np.radians(np.asarray(dec, dtype=np.float64))
    cos_c = np.sin(dec0) * np.sin(d) + np.cos(dec0) * np.cos(d) * np.cos(a - ra0)
    ok = cos_c > 1e-9
    denom = np.where(ok, cos_c, 1.0)
    xi = np.cos(d) * np.sin(a - ra0) / denom
    eta = (np.cos(dec0) * np.sin(d) - np.sin(dec0) * np.cos(d) * np.cos(a - ra0)) / denom
    return np.degrees(xi), np.degrees(eta), ok


def render_cutout(
    center: SkyCoord,
    width: int,
    height: int,
    scale: float,
    ra: np.ndarray,
    dec: np.ndarray,
    mag: np.ndarray | None,
) -> CutoutImage:
    """Render the given objects into a pixel grid. Amplitude follows
    10^(-0.4 (mag - mag_ref)) with mag_ref the brightest magnitude whose
    object lands inside the grid; without magnitudes every spot has unit
    amplitude."""
    if not (1 <= width <= MAX_DIMENSION and 1 <= height <= MAX_DIMENSION):
        raise CutoutError(f"dimensions {width}x{height} outside 1..{MAX_DIMENSION}")
    if not (scale > 0 and math.isfinite(scale)):
        raise CutoutError(f"scale must be positive, got {scale}")

    grid = np.zeros((height, width), dtype=np.float64)
    xi, eta, ok = tangent_plane(ra, dec, center)
    px = (width - 1) / 2.0 + xi / scale
    py = (height - 1) / 2.0 - eta / scale
    in_window = (
        ok & (px >= -0.5) & (px < width - 0.5) & (py >= -0.5) & (py < height - 0.5)
    )
    if in_window.any():
        if mag is not None:
            mag_ref = float(np.min(mag[in_window]))
            amp = np.power(10.0, -0.4 * (np.asarray(mag, dtype=np.float64) - mag_ref))
        else:
            amp = np.ones(len(px))
        ys = np.arange(-_STAMP_HALF, _STAMP_HALF + 1)
        for i in np.flatnonzero(in_window):
            cx, cy = px[i], py[i]
            x0 = int(round(cx))
            y0 = int(round(cy))
            xs = x0 + ys
            ysrow = y0 + ys
            gx = np.exp(-((xs - cx) ** 2) / (2 * SPOT_SIGMA_PX**2))
            gy = np.exp(-((ysrow - cy) ** 2) / (2 * SPOT_SIGMA_PX**2))
            stamp = amp[i] * np.outer(gy, gx)
            xa, xb = max(0, x0 - _STAMP_HALF), min(width, x0 + _STAMP_HALF + 1)
            ya, yb = max(0, y0 - _STAMP_HALF), min(height, y0 + _STAMP_HALF + 1)
            grid[ya:yb, xa:xb] += stamp[
                ya - (y0 - _STAMP_HALF) : yb - (y0 - _STAMP_HALF),
                xa - (x0 - _STAMP_HALF) : xb - (x0 - _STAMP_HALF),
            ]
    pixels = np.clip(np.rint(grid * 65535.0), 0, 65535).astype(np.uint16)
    return CutoutImage(width, height, scale, center, pixels)


def window_cone(center: SkyCoord, width: int, height: int, scale: float) -> Cone:
    """Cone guaranteed to contain every object that can light up the grid."""
    half_diag = scale * math.hypot(width, height) / 2.0
    margin = scale * (_STAMP_HALF + 1)
    return Cone(center, min(180.0, half_diag + margin))


def to_pgm(img: CutoutImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n65535\n".encode("ascii")
    return header + img.intensities.astype(">u2").tobytes()


def from_pgm(data: bytes) -> np.ndarray:
    """Parse a 16-bit binary PGM back into a uint16 grid (tests and clients)."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise CutoutError("not a binary PGM")
    width, height = (int(x) for x in parts[1].split())
    if parts[2] != b"65535":
        raise CutoutError("expected 16-bit maxval")
    grid = np.frombuffer(parts[3], dtype=">u2", count=width * height)
    return grid.astype(np.uint16).reshape(height, width)
