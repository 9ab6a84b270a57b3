"""Exact samplers for the two Cox constructions.

Cox-Poisson on lines: a Poisson number of lines hits the window (truncation
at r = support_radius is exact, since larger r gives an empty chord), each
line carries an independent 1-D PPP of per-length intensity mu_n on its
chord, mapped to the plane through the arc-length parametrization.

Satellites: n i.i.d. uniform base points on the sphere, each carrying a
Poisson(mu_n) number of satellites at i.i.d. uniform angles on its orbit
(the great circle orthogonal to the base point).

Note on the planar limit: for fixed theta the lines D(r, theta) with r >= 0
sweep only a half-plane, so the construction has mean measure (c/2) Leb2,
not c Leb2.  effective_intensity measures this; the experiment harness
calibrates against it by default rather than assuming either convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Window, chord_intervals, orbit_frame, support_radius
from .pointprocess import (PLANE, SPHERE, Configuration, ModelParams,
                           sample_uniform_sphere)


@dataclass(frozen=True)
class CoxLineSample:
    """One realization of the line-based Cox process clipped to a window.

    lines has shape (m, 2) with columns (r, theta); intervals has shape (m, 2)
    with the chord [s_lo, s_hi] per line (rows of zeros for missing chords,
    flagged in hits).
    """

    lines: np.ndarray
    intervals: np.ndarray
    hits: np.ndarray
    points: Configuration
    params: ModelParams
    window: Window


@dataclass(frozen=True)
class SatelliteSample:
    """One realization of the satellite model: base points and satellites."""

    orbits: np.ndarray
    points: Configuration
    params: ModelParams


def sample_cox_line(params: ModelParams, window: Window,
                    rng: np.random.Generator, r_max: float | None = None) -> CoxLineSample:
    """Sample the line-based Cox process restricted to the window.

    r_max overrides the line truncation radius (default support_radius); any
    value at least support_radius yields the same law for the clipped points.
    """
    params.check_planar()
    if r_max is None:
        r_max = support_radius(window)
    m = rng.poisson(params.lambda_n * r_max)
    r = rng.uniform(0.0, r_max, m)
    theta = rng.uniform(0.0, 2.0 * np.pi, m)
    s_lo, s_hi, hits = chord_intervals(window, r, theta)
    lengths = np.where(hits, s_hi - s_lo, 0.0)
    marks = np.zeros(m, dtype=np.int64)
    if m:
        marks = rng.poisson(params.mu_n * lengths)
    total = int(marks.sum())
    if total:
        line_idx = np.repeat(np.arange(m), marks)
        s = s_lo[line_idx] + rng.random(total) * lengths[line_idx]
        ct, st = np.cos(theta[line_idx]), np.sin(theta[line_idx])
        rr = r[line_idx]
        pts = np.column_stack([rr * ct - s * st, rr * st + s * ct])
    else:
        pts = np.empty((0, 2))
    return CoxLineSample(lines=np.column_stack([r, theta]),
                         intervals=np.column_stack([s_lo, s_hi]), hits=hits,
                         points=Configuration(pts, PLANE),
                         params=params, window=window)


def resample_marks(sample: CoxLineSample, rng: np.random.Generator) -> CoxLineSample:
    """Redraw the point marks conditionally on the line set of a sample.

    This realizes the Cox defining property: given the lines, chord counts
    are independent Poissons with mean mu_n * chord_length.
    """
    r, theta = sample.lines[:, 0], sample.lines[:, 1]
    s_lo, s_hi = sample.intervals[:, 0], sample.intervals[:, 1]
    lengths = np.where(sample.hits, s_hi - s_lo, 0.0)
    m = r.size
    marks = rng.poisson(sample.params.mu_n * lengths) if m else np.zeros(0, dtype=np.int64)
    total = int(marks.sum())
    if total:
        idx = np.repeat(np.arange(m), marks)
        s = s_lo[idx] + rng.random(total) * lengths[idx]
        ct, st = np.cos(theta[idx]), np.sin(theta[idx])
        pts = np.column_stack([r[idx] * ct - s * st, r[idx] * st + s * ct])
    else:
        pts = np.empty((0, 2))
    return CoxLineSample(lines=sample.lines, intervals=sample.intervals,
                         hits=sample.hits, points=Configuration(pts, PLANE),
                         params=sample.params, window=sample.window)


def _satellite_points(orbits: np.ndarray, marks: np.ndarray,
                      rng: np.random.Generator) -> np.ndarray:
    total = int(marks.sum())
    if total == 0:
        return np.empty((0, 3))
    u, w = orbit_frame(orbits)
    idx = np.repeat(np.arange(orbits.shape[0]), marks)
    phi = rng.uniform(0.0, 2.0 * np.pi, total)
    return np.cos(phi)[:, None] * u[idx] + np.sin(phi)[:, None] * w[idx]


def sample_satellites(params: ModelParams, rng: np.random.Generator) -> SatelliteSample:
    """Sample the satellite model: n uniform orbits, Poisson(mu_n) points each."""
    params.check_spherical()
    orbits = sample_uniform_sphere(rng, params.n)
    marks = rng.poisson(params.mu_n, params.n)
    pts = _satellite_points(orbits, marks, rng)
    return SatelliteSample(orbits=orbits, points=Configuration(pts, SPHERE),
                           params=params)


def sample_satellites_with_twin(params: ModelParams, rng: np.random.Generator):
    """Sample the satellite model together with a coupled exact-PPP twin.

    The twin keeps the satellites of single-occupancy orbits (each is exactly
    uniform on the sphere) and replaces the points of multi-occupancy orbits
    by fresh i.i.d. uniform points.  Orbit counts sum to a Poisson(c) total,
    so the twin is distributed exactly as the limiting PPP with intensity
    c * nu, while sharing all randomness except the multi-orbit positions.
    Mean differences of functionals over such pairs are unbiased for the
    model-vs-PPP gap with far smaller variance than two independent samples.
    """
    params.check_spherical()
    orbits = sample_uniform_sphere(rng, params.n)
    marks = rng.poisson(params.mu_n, params.n)
    pts = _satellite_points(orbits, marks, rng)
    sample = SatelliteSample(orbits=orbits, points=Configuration(pts, SPHERE),
                             params=params)
    multi = marks >= 2
    n_replace = int(marks[multi].sum())
    if n_replace == 0:
        twin = sample.points
    else:
        orbit_of_point = np.repeat(np.arange(params.n), marks)
        keep = ~multi[orbit_of_point]
        fresh = sample_uniform_sphere(rng, n_replace)
        twin = Configuration(np.vstack([pts[keep], fresh]), SPHERE)
    return sample, twin


def effective_intensity(model: str, params: ModelParams, window: Window | None,
                        reps: int, rng: np.random.Generator):
    """Monte Carlo intensity of a model: mean count per unit area (cox-line)
    or mean total count per unit nu-measure (satellites), with standard error.
    """
    if reps < 1000:
        raise ValueError("intensity calibration needs at least 1000 replicates")
    counts = np.empty(reps)
    if model == "cox-line":
        if window is None:
            raise ValueError("cox-line calibration needs a window")
        for i in range(reps):
            counts[i] = len(sample_cox_line(params, window, rng).points)
        denom = window.area
    elif model == "satellites":
        draws = rng.poisson(params.mu_n, (reps, params.n))
        counts[:] = draws.sum(axis=1)
        denom = 1.0
    else:
        raise ValueError(f"unknown model {model!r}")
    value = counts.mean() / denom
    stderr = counts.std(ddof=1) / np.sqrt(reps) / denom
    return float(value), float(stderr)
