"""Shared fixtures and independent reference implementations.

The oracles here deliberately re-derive results through different routes
than the package (half-plane clipping instead of the reflected Qhull
construction, Monte Carlo fading instead of the closed product form,
fan triangulation instead of the shoelace sum) so tests compare two
independent computations.
"""

from __future__ import annotations

import numpy as np
import pytest

from wavail import BoundingBox, Deployment, Point2D


@pytest.fixture
def unit_box() -> BoundingBox:
    return BoundingBox(10.0, 10.0)


@pytest.fixture
def symmetric_pair(unit_box) -> Deployment:
    """Two APs mirrored about x = 5 in the 10 x 10 box."""
    return Deployment(
        aps=(Point2D(2.5, 5.0), Point2D(7.5, 5.0)),
        box=unit_box,
        eta=4.0,
    )


# ---------------------------------------------------------------------------
# Geometry oracles
# ---------------------------------------------------------------------------

def clip_halfplane(poly: np.ndarray, keep: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Keep the part of ``poly`` at least as close to ``keep`` as to ``other``."""
    mid = 0.5 * (keep + other)
    normal = other - keep  # inside: normal . (v - mid) <= 0
    out = []
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        da = float(np.dot(normal, a - mid))
        db = float(np.dot(normal, b - mid))
        if da <= 0:
            out.append(a)
        if (da < 0 < db) or (db < 0 < da):
            t = da / (da - db)
            out.append(a + t * (b - a))
    return np.array(out) if out else np.empty((0, 2))


def voronoi_cells_by_clipping(coords: np.ndarray, box: BoundingBox) -> list[np.ndarray]:
    """Bounded Voronoi cells via successive half-plane clipping of the box."""
    base = box.corners()
    cells = []
    for i in range(len(coords)):
        poly = base
        for j in range(len(coords)):
            if j == i or len(poly) == 0:
                continue
            poly = clip_halfplane(poly, coords[i], coords[j])
        cells.append(poly)
    return cells


def fan_triangulation_area(vertices: np.ndarray) -> float:
    """Area of a convex polygon as a fan of triangles from vertex 0."""
    total = 0.0
    for k in range(1, len(vertices) - 1):
        a = vertices[k] - vertices[0]
        b = vertices[k + 1] - vertices[0]
        total += 0.5 * (a[0] * b[1] - a[1] * b[0])
    return abs(total)


def polygon_contains(poly: np.ndarray, x: float, y: float, margin: float = 0.0) -> bool:
    """Point-in-convex-polygon via consistent cross-product signs."""
    p = np.array([x, y])
    nxt = np.roll(poly, -1, axis=0)
    cross = (nxt[:, 0] - poly[:, 0]) * (p[1] - poly[:, 1]) - (
        nxt[:, 1] - poly[:, 1]
    ) * (p[0] - poly[:, 0])
    return bool((cross >= -margin).all() or (cross <= margin).all())


def random_convex_polygon(rng: np.random.Generator, n_vertices: int) -> np.ndarray:
    """Convex polygon from sorted angles on a random ellipse."""
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, n_vertices))
    a, b = rng.uniform(0.5, 3.0, 2)
    rot = rng.uniform(0.0, np.pi)
    x = a * np.cos(angles)
    y = b * np.sin(angles)
    xr = x * np.cos(rot) - y * np.sin(rot) + rng.uniform(-5, 5)
    yr = x * np.sin(rot) + y * np.cos(rot) + rng.uniform(-5, 5)
    return np.column_stack([xr, yr])


# ---------------------------------------------------------------------------
# Radio oracle
# ---------------------------------------------------------------------------

def monte_carlo_coverage(
    z: Point2D,
    dep: Deployment,
    serving: int,
    theta_linear: float,
    n_samples: int,
    rng: np.random.Generator,
) -> float:
    """Empirical P[SIR >= theta] from i.i.d. exponential fading draws.

    Evaluates the SIR definition directly (signal against the summed
    interference), bypassing the closed-form product entirely.
    """
    diff = dep.coords - z.as_array()
    d = np.hypot(diff[:, 0], diff[:, 1])
    att = d ** -dep.eta
    gains = rng.exponential(1.0, size=(n_samples, dep.n))
    signal = gains[:, serving] * att[serving]
    mask = np.ones(dep.n, dtype=bool)
    mask[serving] = False
    interference = gains[:, mask] @ att[mask]
    return float(np.mean(signal >= theta_linear * interference))
