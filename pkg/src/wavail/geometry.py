"""AP deployments and bounded Voronoi geometry.

Deployments are sets of access-point locations drawn uniformly inside a
rectangular bounding box.  Every AP owns the region of the box that is
closer to it than to any other AP (its Voronoi cell, clipped to the box);
the helpers here build those cells, measure polygon areas, and resolve
nearest-AP queries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import Voronoi

__all__ = [
    "Point2D",
    "BoundingBox",
    "Deployment",
    "VoronoiCell",
    "generate_deployment",
    "voronoi_tessellate",
    "shoelace_area",
    "nearest_ap",
    "write_deployment_csv",
    "read_deployment_points",
]

# Vertices closer than this are merged when polygon rings are cleaned up.
_VERTEX_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class Point2D:
    """A point in the plane, coordinates in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Point2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle with lower-left corner at ``origin``."""

    width: float
    height: float
    origin: Point2D = Point2D(0.0, 0.0)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"box dimensions must be positive, got {self.width} x {self.height}")

    @property
    def xmin(self) -> float:
        return self.origin.x

    @property
    def xmax(self) -> float:
        return self.origin.x + self.width

    @property
    def ymin(self) -> float:
        return self.origin.y

    @property
    def ymax(self) -> float:
        return self.origin.y + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def corners(self) -> np.ndarray:
        """Corner coordinates in counter-clockwise order, shape (4, 2)."""
        return np.array(
            [
                [self.xmin, self.ymin],
                [self.xmax, self.ymin],
                [self.xmax, self.ymax],
                [self.xmin, self.ymax],
            ]
        )

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return (
            self.xmin + margin <= x <= self.xmax - margin
            and self.ymin + margin <= y <= self.ymax - margin
        )


@dataclass(frozen=True)
class Deployment:
    """A realization of AP locations inside a bounding box.

    Attributes:
        aps: ordered AP locations; all inside ``box`` and pairwise distinct.
        box: the deployment area.
        eta: pathloss exponent (> 2).
        seed: the 64-bit seed the realization was drawn from (bookkeeping).
    """

    aps: tuple[Point2D, ...]
    box: BoundingBox
    eta: float
    seed: int = 0

    def __post_init__(self):
        if len(self.aps) < 1:
            raise ValueError("deployment needs at least one AP")
        if not self.eta > 2:
            raise ValueError(f"pathloss exponent must exceed 2, got {self.eta}")
        for i, p in enumerate(self.aps):
            if not self.box.contains(p.x, p.y):
                raise ValueError(f"AP {i} at ({p.x}, {p.y}) lies outside the box")
        coords = np.array([(p.x, p.y) for p in self.aps])
        if len(np.unique(coords, axis=0)) != len(coords):
            raise ValueError("AP locations must be pairwise distinct")

    @property
    def n(self) -> int:
        return len(self.aps)

    @cached_property
    def coords(self) -> np.ndarray:
        """AP coordinates as a read-only (N, 2) array."""
        arr = np.array([(p.x, p.y) for p in self.aps], dtype=float)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class VoronoiCell:
    """One AP's connectivity region: a convex polygon clipped to the box."""

    ap_index: int
    vertices: tuple[Point2D, ...]  # counter-clockwise
    area: float

    def vertex_array(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.vertices], dtype=float)


def generate_deployment(n: int, box: BoundingBox, eta: float = 4.0, seed: int = 0) -> Deployment:
    """Draw ``n`` AP locations i.i.d. uniform over ``box``.

    The same (n, box, seed) always yields the same deployment, bit for bit.
    """
    if n < 1:
        raise ValueError(f"number of APs must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random((n, 2))
    aps = tuple(
        Point2D(float(box.origin.x + ux * box.width), float(box.origin.y + uy * box.height))
        for ux, uy in u
    )
    return Deployment(aps=aps, box=box, eta=eta, seed=int(seed))


def shoelace_area(vertices) -> float:
    """Absolute area of a simple polygon, independent of orientation.

    Args:
        vertices: sequence of Point2D, coordinate pairs, or an (n, 2) array.
    """
    arr = _vertex_array(vertices)
    if arr.shape[0] < 3:
        raise ValueError(f"polygon needs at least 3 vertices, got {arr.shape[0]}")
    x, y = arr[:, 0], arr[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def nearest_ap(z: Point2D, dep: Deployment) -> int:
    """Index of the AP nearest to ``z``; ties go to the lowest index."""
    diff = dep.coords - z.as_array()
    d2 = diff[:, 0] ** 2 + diff[:, 1] ** 2
    return int(np.argmin(d2))  # argmin takes the first minimum


def voronoi_tessellate(dep: Deployment) -> list[VoronoiCell]:
    """Voronoi cells of all APs, clipped to the bounding box.

    Cells partition the box (up to shared boundaries).  Construction
    reflects every AP across the four box edges before triangulating,
    which makes each edge of the box an exact cell boundary, so the cells
    of the original APs come out already clipped.
    """
    box = dep.box
    if dep.n == 1:
        corners = box.corners()
        verts = tuple(Point2D(float(x), float(y)) for x, y in corners)
        return [VoronoiCell(0, verts, box.area)]

    coords = dep.coords
    vor = Voronoi(np.vstack([coords, _edge_reflections(coords, box)]))
    cells = []
    for i in range(dep.n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region:
            # Cannot happen with the reflected construction; fail loudly.
            raise RuntimeError(f"unbounded Voronoi region for AP {i}")
        verts = vor.vertices[np.asarray(region, dtype=int)]
        verts = _order_ccw(verts)
        verts = _merge_close_vertices(verts)
        np.clip(verts[:, 0], box.xmin, box.xmax, out=verts[:, 0])
        np.clip(verts[:, 1], box.ymin, box.ymax, out=verts[:, 1])
        area = shoelace_area(verts)
        cells.append(
            VoronoiCell(i, tuple(Point2D(float(x), float(y)) for x, y in verts), area)
        )
    return cells


def write_deployment_csv(dep: Deployment, path) -> None:
    """Serialize AP locations as ``ap_index,x,y`` (meters, 15 significant digits)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("ap_index,x,y\n")
        for i, p in enumerate(dep.aps):
            fh.write(f"{i},{p.x:.15g},{p.y:.15g}\n")


def read_deployment_points(path) -> tuple[Point2D, ...]:
    """Read AP locations written by :func:`write_deployment_csv`, ordered by index."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            rows.append((int(row["ap_index"]), float(row["x"]), float(row["y"])))
    rows.sort()
    return tuple(Point2D(x, y) for _, x, y in rows)


def _vertex_array(vertices) -> np.ndarray:
    if isinstance(vertices, np.ndarray):
        arr = np.asarray(vertices, dtype=float)
    elif len(vertices) and isinstance(vertices[0], Point2D):
        arr = np.array([(p.x, p.y) for p in vertices], dtype=float)
    else:
        arr = np.asarray(vertices, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("vertices must be an (n, 2) sequence of points")
    return arr


def _edge_reflections(coords: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Reflect every point across each of the four box edges; shape (4N, 2)."""
    x, y = coords[:, 0], coords[:, 1]
    return np.vstack(
        [
            np.column_stack([2 * box.xmin - x, y]),
            np.column_stack([2 * box.xmax - x, y]),
            np.column_stack([x, 2 * box.ymin - y]),
            np.column_stack([x, 2 * box.ymax - y]),
        ]
    )


def _order_ccw(verts: np.ndarray) -> np.ndarray:
    """Order convex-polygon vertices counter-clockwise around their centroid."""
    center = verts.mean(axis=0)
    angles = np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0])
    return verts[np.argsort(angles, kind="stable")].copy()


def _merge_close_vertices(verts: np.ndarray) -> np.ndarray:
    """Drop consecutive (cyclically) vertices closer than the merge tolerance."""
    keep = []
    for i in range(len(verts)):
        nxt = verts[(i + 1) % len(verts)]
        if np.hypot(*(verts[i] - nxt)) > _VERTEX_MERGE_TOL:
            keep.append(i)
    if len(keep) < 3:
        return verts
    return verts[keep]
