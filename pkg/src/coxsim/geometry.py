"""Planar line geometry and spherical orbit geometry.

Lines in the plane are parametrized by (r, theta): r is the perpendicular
distance from the origin, theta the angle of the foot of the perpendicular,
so the line is {(x, y) : x cos(theta) + y sin(theta) = r}.  Points on a line
carry an arc-length coordinate s measured from the foot point:

    p(s) = (r cos(theta) - s sin(theta), r sin(theta) + s cos(theta))

On the unit sphere, the orbit of a base point x is the great circle in the
plane orthogonal to x, parametrized by the image of the unit circle under a
canonical rotation taking the north pole e3 to x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi

UNIT_TOL = 1e-9        # rejection tolerance for non-unit sphere points
ORTHO_TOL = 1e-12      # orthogonality tolerance for rotation matrices
ANTIPODE_TOL = 1e-12   # switch to the fixed antipodal convention below this


@dataclass(frozen=True)
class LineParams:
    """A line D(r, theta): perpendicular distance r >= 0, angle theta in [0, 2*pi)."""

    r: float
    theta: float

    def __post_init__(self):
        if not (self.r >= 0.0 and math.isfinite(self.r)):
            raise ValueError(f"r must be finite and nonnegative, got {self.r}")
        if not (0.0 <= self.theta < TAU):
            raise ValueError(f"theta must lie in [0, 2*pi), got {self.theta}")


def line_point(line: LineParams, s):
    """Point(s) on the line at arc-length coordinate(s) s from the foot point.

    s may be a scalar (returns shape (2,)) or an array (returns shape (n, 2)).
    """
    ct, st = math.cos(line.theta), math.sin(line.theta)
    s = np.asarray(s, dtype=float)
    x = line.r * ct - s * st
    y = line.r * st + s * ct
    return np.stack([x, y], axis=-1)


# ---------------------------------------------------------------------------
# Windows and planar regions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    """Closed disk; usable both as an observation window and a count region."""

    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"disk radius must be positive, got {self.radius}")

    @property
    def area(self) -> float:
        return math.pi * self.radius ** 2

    measure = area

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        d = pts - np.asarray(self.center)
        return d[:, 0] ** 2 + d[:, 1] ** 2 <= self.radius ** 2

    def describe(self) -> str:
        return f"disk(c=({self.center[0]:g},{self.center[1]:g}),R={self.radius:g})"


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("rectangle requires x0 < x1 and y0 < y1")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    measure = area

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return ((pts[:, 0] >= self.x0) & (pts[:, 0] <= self.x1)
                & (pts[:, 1] >= self.y0) & (pts[:, 1] <= self.y1))

    def describe(self) -> str:
        return f"rect({self.x0:g},{self.y0:g},{self.x1:g},{self.y1:g})"


Window = Disk | Rect


@dataclass(frozen=True)
class Annulus:
    """Closed annulus r_inner <= |p - center| <= r_outer (r_inner = 0 gives a disk)."""

    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0.0 <= self.r_inner < self.r_outer):
            raise ValueError("annulus requires 0 <= r_inner < r_outer")

    @property
    def measure(self) -> float:
        return math.pi * (self.r_outer ** 2 - self.r_inner ** 2)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        d = pts - np.asarray(self.center)
        rho2 = d[:, 0] ** 2 + d[:, 1] ** 2
        return (rho2 >= self.r_inner ** 2) & (rho2 <= self.r_outer ** 2)

    def describe(self) -> str:
        return f"annulus({self.r_inner:g},{self.r_outer:g})"


def support_radius(window: Window) -> float:
    """max |p| over p in the window; lines with r beyond it miss the window."""
    if isinstance(window, Disk):
        cx, cy = window.center
        return math.hypot(cx, cy) + window.radius
    corners = [(window.x0, window.y0), (window.x0, window.y1),
               (window.x1, window.y0), (window.x1, window.y1)]
    return max(math.hypot(x, y) for x, y in corners)


def chord_interval(window: Window, line: LineParams):
    """Arc-length interval [s_lo, s_hi] of the window's chord on the line.

    Returns None when the line misses the window or touches it in a single
    point (degenerate chords count as empty).
    """
    ct, st = math.cos(line.theta), math.sin(line.theta)
    if isinstance(window, Disk):
        cx, cy = window.center
        h = line.r - (cx * ct + cy * st)       # signed normal distance to center
        if abs(h) >= window.radius:
            return None
        half = math.sqrt(window.radius ** 2 - h * h)
        s_c = cy * ct - cx * st                # tangential coordinate of the center
        return (s_c - half, s_c + half)
    # Rectangle: clip x(s) = r*ct - s*st and y(s) = r*st + s*ct against the
    # four half-planes (Liang-Barsky).
    lo, hi = -math.inf, math.inf
    for coef, base, b0, b1 in ((-st, line.r * ct, window.x0, window.x1),
                               (ct, line.r * st, window.y0, window.y1)):
        if abs(coef) < 1e-300:
            if not (b0 <= base <= b1):
                return None
            continue
        t0, t1 = (b0 - base) / coef, (b1 - base) / coef
        if t0 > t1:
            t0, t1 = t1, t0
        lo, hi = max(lo, t0), min(hi, t1)
    if not (lo < hi) or math.isinf(lo) or math.isinf(hi):
        return None
    return (lo, hi)


def chord_length(window: Window, line: LineParams) -> float:
    iv = chord_interval(window, line)
    return 0.0 if iv is None else iv[1] - iv[0]


def chord_lengths(window: Window, r: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Vectorized chord lengths for arrays of (r, theta); used by quadrature
    and by the line-process sampler."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    if isinstance(window, Disk):
        cx, cy = window.center
        h = r - (cx * ct + cy * st)
        inside = np.abs(h) < window.radius
        out = np.zeros(np.broadcast(r, theta).shape)
        out[inside] = 2.0 * np.sqrt(window.radius ** 2 - h[inside] ** 2)
        return out
    base_x, base_y = r * ct, r * st
    lo = np.full(np.broadcast(r, theta).shape, -np.inf)
    hi = np.full(np.broadcast(r, theta).shape, np.inf)
    for coef, base, b0, b1 in ((-st, base_x, window.x0, window.x1),
                               (ct, base_y, window.y0, window.y1)):
        coef = np.broadcast_to(coef, lo.shape)
        base = np.broadcast_to(base, lo.shape)
        deg = np.abs(coef) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where(deg, -np.inf, (b0 - base) / np.where(deg, 1.0, coef))
            t1 = np.where(deg, np.inf, (b1 - base) / np.where(deg, 1.0, coef))
        swap = t0 > t1
        t0, t1 = np.where(swap, t1, t0), np.where(swap, t0, t1)
        lo, hi = np.maximum(lo, t0), np.minimum(hi, t1)
        # degenerate direction: the fixed coordinate must be inside the slab
        miss = deg & ((base < b0) | (base > b1))
        hi = np.where(miss, lo, hi)
    return np.maximum(hi - lo, 0.0)


def chord_intervals(window: Window, r: np.ndarray, theta: np.ndarray):
    """Vectorized chord intervals: returns (s_lo, s_hi, nonempty mask)."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    ct, st = np.cos(theta), np.sin(theta)
    if isinstance(window, Disk):
        cx, cy = window.center
        h = r - (cx * ct + cy * st)
        ok = np.abs(h) < window.radius
        half = np.zeros_like(h)
        half[ok] = np.sqrt(window.radius ** 2 - h[ok] ** 2)
        s_c = cy * ct - cx * st
        return s_c - half, s_c + half, ok
    base_x, base_y = r * ct, r * st
    lo = np.full(r.shape, -np.inf)
    hi = np.full(r.shape, np.inf)
    ok = np.ones(r.shape, dtype=bool)
    for coef, base, b0, b1 in ((-st, base_x, window.x0, window.x1),
                               (ct, base_y, window.y0, window.y1)):
        deg = np.abs(coef) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = np.where(deg, -np.inf, (b0 - base) / np.where(deg, 1.0, coef))
            t1 = np.where(deg, np.inf, (b1 - base) / np.where(deg, 1.0, coef))
        swap = t0 > t1
        t0, t1 = np.where(swap, t1, t0), np.where(swap, t0, t1)
        lo, hi = np.maximum(lo, t0), np.minimum(hi, t1)
        ok &= ~(deg & ((base < b0) | (base > b1)))
    ok &= (lo < hi) & np.isfinite(lo) & np.isfinite(hi)
    return np.where(ok, lo, 0.0), np.where(ok, hi, 0.0), ok


# ---------------------------------------------------------------------------
# Sphere geometry
# ---------------------------------------------------------------------------

def _check_unit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise ValueError("expected a single 3-vector")
    if abs(x @ x - 1.0) > 2.0 * UNIT_TOL:
        raise ValueError(f"point must be on the unit sphere (|x|^2 = {x @ x})")
    return x


def orbit_frame(xs: np.ndarray):
    """Orthonormal frame (u, w) of the planes orthogonal to unit vectors xs.

    For xs of shape (n, 3) returns two (n, 3) arrays with u = R e1, w = R e2
    where R is the minimal rotation taking e3 to x (see rotation_to).  Rows
    with x essentially antipodal to e3 use the fixed pi-rotation convention
    u = e1, w = -e2.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    x1, x2, x3 = xs[:, 0], xs[:, 1], xs[:, 2]
    denom = 1.0 + x3
    safe = denom > ANTIPODE_TOL
    d = np.where(safe, denom, 1.0)
    u = np.stack([1.0 - x1 ** 2 / d, -x1 * x2 / d, -x1], axis=1)
    w = np.stack([-x1 * x2 / d, 1.0 - x2 ** 2 / d, -x2], axis=1)
    u[~safe] = (1.0, 0.0, 0.0)
    w[~safe] = (0.0, -1.0, 0.0)
    return u, w


def rotation_to(x: np.ndarray) -> np.ndarray:
    """Rotation matrix R with R e3 = x, minimal geodesic choice.

    The rotation axis is e3 x x, so R is continuous in x away from the south
    pole; at x = -e3 the convention is the rotation by pi about e1.  Raises
    ValueError when |x| differs from 1 by more than the unit tolerance.
    """
    x = _check_unit(x)
    u, w = orbit_frame(x)
    return np.column_stack([u[0], w[0], x])


def orbit_point(x: np.ndarray, phi) -> np.ndarray:
    """Point rotation_to(x) @ (cos phi, sin phi, 0) on the orbit of x.

    phi may be scalar (returns (3,)) or an array (returns (n, 3)).
    """
    x = _check_unit(x)
    u, w = orbit_frame(x)
    phi = np.asarray(phi, dtype=float)
    pts = (np.cos(phi)[..., None] * u[0] + np.sin(phi)[..., None] * w[0])
    return pts if pts.ndim > 1 else pts.reshape(3)


@dataclass(frozen=True)
class SphericalCap:
    """Cap {p : p . axis >= height} on the unit sphere; measure is the
    normalized surface fraction."""

    axis: tuple[float, float, float]
    height: float

    def __post_init__(self):
        if not (-1.0 < self.height < 1.0):
            raise ValueError("cap height must lie in (-1, 1)")
        a = np.asarray(self.axis, dtype=float)
        if abs(a @ a - 1.0) > 1e-6:
            raise ValueError("cap axis must be a unit vector")

    @property
    def measure(self) -> float:
        return (1.0 - self.height) / 2.0

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return pts @ np.asarray(self.axis) >= self.height

    def describe(self) -> str:
        a = self.axis
        return f"cap(axis=({a[0]:g},{a[1]:g},{a[2]:g}),h={self.height:g})"


@dataclass(frozen=True)
class LatitudeBand:
    """Band {p : z_lo <= p_z <= z_hi} on the unit sphere."""

    z_lo: float
    z_hi: float

    def __post_init__(self):
        if not (-1.0 <= self.z_lo < self.z_hi <= 1.0):
            raise ValueError("band requires -1 <= z_lo < z_hi <= 1")

    @property
    def measure(self) -> float:
        return (self.z_hi - self.z_lo) / 2.0

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        return (pts[:, 2] >= self.z_lo) & (pts[:, 2] <= self.z_hi)

    def describe(self) -> str:
        return f"band({self.z_lo:g},{self.z_hi:g})"
