"""Configurations (finite point multisets) and exact point process samplers.

A Configuration is an immutable finite multiset of points, either planar
(shape (n, 2)) or spherical (shape (n, 3)).  Multiset semantics follow the
add/remove conventions of point process theory: removing an absent point is
the identity.

Randomness is organized as counter-based streams: a (master seed, stream
index) pair keys a Philox generator, so distinct indices give independent
streams and identical pairs reproduce bit-identical output.  Replicate j of
sweep point i in lane k uses composite_index(k, i, j); see that function for
the exact layout.
"""

from __future__ import annotations

import io
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .geometry import Disk, Window

PLANE = "plane"
SPHERE = "sphere"

_DIM = {PLANE: 2, SPHERE: 3}


# ---------------------------------------------------------------------------
# Reproducible streams
# ---------------------------------------------------------------------------

LANE_BITS = 8
POINT_BITS = 16
REP_BITS = 40


def composite_index(lane: int, point: int, replicate: int) -> int:
    """Pack (lane, sweep point, replicate) into one 64-bit stream index.

    Layout: lane in the top 8 bits, sweep-point index in the next 16,
    replicate in the low 40.  Harness lanes: 0 = model samples,
    1 = calibration, 2 = reference samples, 3 = validation checks.
    """
    if not (0 <= lane < 2 ** LANE_BITS):
        raise ValueError(f"lane out of range: {lane}")
    if not (0 <= point < 2 ** POINT_BITS):
        raise ValueError(f"point index out of range: {point}")
    if not (0 <= replicate < 2 ** REP_BITS):
        raise ValueError(f"replicate index out of range: {replicate}")
    return (lane << (POINT_BITS + REP_BITS)) | (point << REP_BITS) | replicate


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (master seed, stream index)."""

    seed: int
    index: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % 2 ** 64, self.index % 2 ** 64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, lane: int, point: int = 0, replicate: int = 0) -> "RngStream":
        return RngStream(self.seed, composite_index(lane, point, replicate))


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------

class Configuration:
    """Immutable finite multiset of points with an ambient-space tag."""

    __slots__ = ("points", "space")

    def __init__(self, points, space: str):
        if space not in _DIM:
            raise ValueError(f"unknown space {space!r}")
        pts = np.asarray(points, dtype=float)
        if pts.size == 0:
            pts = np.empty((0, _DIM[space]))
        if pts.ndim != 2 or pts.shape[1] != _DIM[space]:
            raise ValueError(f"points must have shape (n, {_DIM[space]}) for {space}")
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "space", space)

    def __setattr__(self, name, value):
        raise AttributeError("Configuration is immutable")

    @classmethod
    def empty(cls, space: str = PLANE) -> "Configuration":
        return cls(np.empty((0, _DIM[space])), space)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"Configuration({len(self)} points, {self.space})"

    def _multiset(self) -> Counter:
        return Counter(map(tuple, self.points))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.space == other.space and self._multiset() == other._multiset()

    def __hash__(self):
        return hash((self.space, frozenset(self._multiset().items())))

    def add(self, p) -> "Configuration":
        p = np.asarray(p, dtype=float).reshape(1, -1)
        return Configuration(np.vstack([self.points, p]), self.space)

    def remove(self, p) -> "Configuration":
        """Remove one occurrence of p if present; identity otherwise."""
        p = np.asarray(p, dtype=float).reshape(-1)
        hits = np.flatnonzero((self.points == p).all(axis=1))
        if hits.size == 0:
            return self
        keep = np.ones(len(self), dtype=bool)
        keep[hits[0]] = False
        return Configuration(self.points[keep], self.space)

    def count_in(self, region) -> int:
        if len(self) == 0:
            return 0
        return int(region.contains(self.points).sum())


def superpose(a: Configuration, b: Configuration) -> Configuration:
    if a.space != b.space:
        raise ValueError(f"cannot superpose {a.space} and {b.space} configurations")
    return Configuration(np.vstack([a.points, b.points]), a.space)


def config_tv_distance(a: Configuration, b: Configuration) -> int:
    """|a minus b| + |b minus a| as multisets (symmetric difference size)."""
    if a.space != b.space:
        raise ValueError("configurations live in different spaces")
    ma, mb = a._multiset(), b._multiset()
    d = 0
    for key in ma.keys() | mb.keys():
        d += abs(ma.get(key, 0) - mb.get(key, 0))
    return d


def count_in(cfg: Configuration, region) -> int:
    return cfg.count_in(region)


# ---------------------------------------------------------------------------
# Model parameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Intensity bookkeeping: lambda_n (line intensity), mu_n (point intensity
    per unit length, or per orbit in the spherical model), c, and orbit count n.

    Use the planar/spherical constructors to get the couplings mu_n = c/lambda_n
    and mu_n = c/n enforced; kind records which model the params were built for
    ("custom" for hand-assembled values, accepted by either model as long as
    the coupling holds).
    """

    lambda_n: float
    mu_n: float
    c: float
    n: int
    kind: str = "custom"

    @classmethod
    def planar(cls, c: float, lambda_n: float) -> "ModelParams":
        if not (c > 0 and lambda_n > 0):
            raise ValueError("planar model requires c > 0 and lambda_n > 0")
        return cls(lambda_n=lambda_n, mu_n=c / lambda_n, c=c, n=1, kind="planar")

    @classmethod
    def spherical(cls, c: float, n: int) -> "ModelParams":
        if not (c > 0 and n >= 1):
            raise ValueError("spherical model requires c > 0 and n >= 1")
        return cls(lambda_n=float(n), mu_n=c / n, c=c, n=int(n), kind="spherical")

    def check_planar(self):
        if self.kind not in ("planar", "custom"):
            raise ValueError(f"{self.kind} params passed to the planar model")
        if abs(self.mu_n * self.lambda_n - self.c) > 1e-9 * self.c:
            raise ValueError("params violate the planar coupling mu_n = c / lambda_n")

    def check_spherical(self):
        if self.kind not in ("spherical", "custom"):
            raise ValueError(f"{self.kind} params passed to the spherical model")
        if abs(self.mu_n * self.n - self.c) > 1e-9 * self.c:
            raise ValueError("params violate the spherical coupling mu_n = c / n")


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

def uniform_in_window(window: Window, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points in the window, by inverse transform."""
    if isinstance(window, Disk):
        rho = window.radius * np.sqrt(rng.random(n))
        ang = rng.uniform(0.0, 2.0 * np.pi, n)
        cx, cy = window.center
        return np.column_stack([cx + rho * np.cos(ang), cy + rho * np.sin(ang)])
    x = rng.uniform(window.x0, window.x1, n)
    y = rng.uniform(window.y0, window.y1, n)
    return np.column_stack([x, y])


def sample_ppp_window(window: Window, lam: float, rng: np.random.Generator) -> Configuration:
    """Homogeneous PPP of intensity lam restricted to the window."""
    if lam < 0:
        raise ValueError("intensity must be nonnegative")
    n = rng.poisson(lam * window.area)
    return Configuration(uniform_in_window(window, n, rng), PLANE)


def sample_ppp_interval(s_lo: float, s_hi: float, mu: float,
                        rng: np.random.Generator) -> np.ndarray:
    """1-D PPP of per-length intensity mu on [s_lo, s_hi], as a sorted-free array."""
    if s_hi <= s_lo or mu <= 0:
        return np.empty(0)
    n = rng.poisson(mu * (s_hi - s_lo))
    return rng.uniform(s_lo, s_hi, n)


def sample_uniform_sphere(rng: np.random.Generator, n: int | None = None) -> np.ndarray:
    """Uniform point(s) on the unit sphere via normalized Gaussians."""
    m = 1 if n is None else n
    v = rng.standard_normal((m, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[0] if n is None else v


def sample_bpp(n: int, point_sampler, rng: np.random.Generator,
               space: str = PLANE) -> Configuration:
    """Binomial point process: exactly n i.i.d. draws from point_sampler.

    point_sampler(rng, size) must return an array of shape (size, dim).
    """
    if n < 1:
        raise ValueError("a BPP needs at least one point")
    return Configuration(point_sampler(rng, n), space)


def thin(cfg: Configuration, p: float, rng: np.random.Generator) -> Configuration:
    """Independent p-thinning: keep each point with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("retention probability must lie in [0, 1]")
    if len(cfg) == 0 or p == 1.0:
        return cfg
    if p == 0.0:
        return Configuration.empty(cfg.space)
    keep = rng.random(len(cfg)) < p
    return Configuration(cfg.points[keep], cfg.space)


# ---------------------------------------------------------------------------
# Batched replicate kernels (hot paths for the diagnostics engine)
# ---------------------------------------------------------------------------

def ppp_batch(window: Window, lam: float, reps: int, rng: np.random.Generator):
    """reps independent PPP(lam) samples on the window, flattened.

    Returns (counts, points, rep_ids): counts has shape (reps,), points is the
    concatenation of all replicates, rep_ids labels each point's replicate.
    """
    counts = rng.poisson(lam * window.area, reps)
    total = int(counts.sum())
    points = uniform_in_window(window, total, rng)
    rep_ids = np.repeat(np.arange(reps), counts)
    return counts, points, rep_ids


def region_counts(points: np.ndarray, rep_ids: np.ndarray, region, reps: int) -> np.ndarray:
    """Per-replicate counts of flattened points inside a region."""
    if points.shape[0] == 0:
        return np.zeros(reps, dtype=np.int64)
    mask = region.contains(points)
    return np.bincount(rep_ids[mask], minlength=reps)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def config_to_csv(cfg: Configuration) -> str:
    header = "x,y" if cfg.space == PLANE else "x,y,z"
    buf = io.StringIO()
    buf.write(header + "\n")
    for row in cfg.points:
        buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def config_from_csv(text: str) -> Configuration:
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].strip()
    if header == "x,y":
        space = PLANE
    elif header == "x,y,z":
        space = SPHERE
    else:
        raise ValueError(f"unrecognized configuration CSV header {header!r}")
    rows = [tuple(float(v) for v in ln.split(",")) for ln in lines[1:]]
    return Configuration(np.array(rows) if rows else np.empty((0, _DIM[space])), space)
