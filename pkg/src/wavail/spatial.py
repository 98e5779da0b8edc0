"""SIR-confidence regions and spatial availability ratios.

The available region of an AP collects every location whose coverage
confidence clears (theta, alpha); it is measured on a deterministic raster
over the bounding box.  Spatial availability is that area over the AP's
Voronoi cell area, clamped to 1 because the region may spill past the
cell.  Deployment averages select one AP uniformly per seeded realization
and reduce in realization order, so results do not depend on how many
workers ran them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import parallel
from .geometry import BoundingBox, Deployment, Point2D, generate_deployment, voronoi_tessellate
from .radio import RadioParams, _coverage_from_powers

__all__ = [
    "DEFAULT_BOX",
    "AvailabilityRegion",
    "SpatialAvailability",
    "BoundaryPoint",
    "available_region",
    "region_boundary_radial",
    "spatial_availability",
    "mean_spatial_availability",
    "mean_availability_grid",
    "write_region_pbm",
    "write_region_csv",
    "write_boundary_csv",
]

DEFAULT_BOX = BoundingBox(10.0, 10.0)

# Coarse samples per ray when scanning for the outermost confidence crossing.
_RAY_SCAN_SAMPLES = 256


@dataclass(frozen=True)
class AvailabilityRegion:
    """Rasterized membership of one AP's confidence region.

    ``membership[ix, iy]`` covers the cell centered at
    ``(xmin + (ix + 0.5) * cell_width, ymin + (iy + 0.5) * cell_height)``.
    Membership is evaluated at cell centers and may extend beyond the AP's
    own Voronoi cell.
    """

    ap_index: int
    box: BoundingBox
    grid_resolution: float
    membership: np.ndarray
    area: float

    def __post_init__(self):
        self.membership.setflags(write=False)

    @property
    def cell_width(self) -> float:
        return self.box.width / self.membership.shape[0]

    @property
    def cell_height(self) -> float:
        return self.box.height / self.membership.shape[1]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Center coordinates along x and y."""
        nx, ny = self.membership.shape
        xs = self.box.xmin + (np.arange(nx) + 0.5) * self.cell_width
        ys = self.box.ymin + (np.arange(ny) + 0.5) * self.cell_height
        return xs, ys


@dataclass(frozen=True)
class SpatialAvailability:
    """Availability ratio of one AP: region area over cell area, capped at 1."""

    ap_index: int
    a_s: float
    area_d: float
    area_v: float


@dataclass(frozen=True)
class BoundaryPoint:
    """One ray's confidence-boundary crossing."""

    angle_rad: float
    radius: float
    point: Point2D


def available_region(
    ap_index: int, dep: Deployment, params: RadioParams, resolution: float
) -> AvailabilityRegion:
    """Raster the (theta, alpha) confidence region of one AP over the box.

    Every raster cell whose center has coverage probability >= alpha is a
    member; the area is the member count times the cell area.  The raster
    spans the whole bounding box, not just the AP's Voronoi cell.
    """
    nx, ny = _grid_shape(dep.box, resolution)
    centers = _cell_centers(dep.box, nx, ny)
    d_eta = cdist(centers, dep.coords) ** dep.eta
    coverage = _coverage_from_powers(d_eta, _checked_index(ap_index, dep), params.theta_linear)
    membership = (coverage >= params.alpha).reshape(nx, ny)
    cell_area = (dep.box.width / nx) * (dep.box.height / ny)
    return AvailabilityRegion(
        ap_index=ap_index,
        box=dep.box,
        grid_resolution=resolution,
        membership=membership,
        area=float(np.count_nonzero(membership)) * cell_area,
    )


def region_boundary_radial(
    ap_index: int,
    dep: Deployment,
    params: RadioParams,
    n_rays: int = 360,
    tol: float = 1e-3,
) -> tuple[BoundaryPoint, ...]:
    """Trace the confidence boundary along equally spaced rays from the AP.

    Each ray is scanned outward to where it leaves the box and the
    outermost crossing of coverage = alpha is bisected down to ``tol``
    meters.  Rays that stay above alpha all the way out are clamped at the
    box edge; rays already below alpha at radius ``tol`` contribute
    nothing and are omitted.

    The resulting polyline is only exact for regions that are star-shaped
    around the AP; it is meant for visualization, not area measurement
    (use :func:`available_region` for areas).
    """
    if n_rays < 8:
        raise ValueError(f"need at least 8 rays, got {n_rays}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    j = _checked_index(ap_index, dep)
    theta = params.theta_linear
    origin = dep.coords[j]
    angles = 2.0 * math.pi * np.arange(n_rays) / n_rays
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    exits = _ray_exit_distances(origin, dirs, dep.box)

    def coverage_at(radii: np.ndarray, which: np.ndarray) -> np.ndarray:
        pts = origin + radii[:, None] * dirs[which]
        d_eta = cdist(pts, dep.coords) ** dep.eta
        return _coverage_from_powers(d_eta, j, theta)

    all_rays = np.arange(n_rays)
    alive = coverage_at(np.minimum(np.full(n_rays, tol), exits), all_rays) >= params.alpha

    # Coarse outward scan (vectorized over all rays) for the outermost
    # alpha crossing; clamp rays that never drop below alpha.
    steps = (np.arange(1, _RAY_SCAN_SAMPLES + 1) / _RAY_SCAN_SAMPLES)[None, :]
    radii_grid = exits[:, None] * steps
    pts = origin[None, None, :] + radii_grid[:, :, None] * dirs[:, None, :]
    d_eta = cdist(pts.reshape(-1, 2), dep.coords) ** dep.eta
    covered = (
        _coverage_from_powers(d_eta, j, theta).reshape(n_rays, _RAY_SCAN_SAMPLES)
        >= params.alpha
    )

    radius = np.full(n_rays, np.nan)
    clamped = alive & covered[:, -1]
    radius[clamped] = exits[clamped]

    to_bisect = alive & ~covered[:, -1]
    idx = np.flatnonzero(to_bisect)
    if idx.size:
        lo = np.full(idx.size, tol)
        hi = exits[idx].copy()
        for k, ray in enumerate(idx):
            inside = np.flatnonzero(covered[ray])
            if inside.size:
                last = inside[-1]
                lo[k] = radii_grid[ray, last]
                hi[k] = radii_grid[ray, last + 1]
            else:
                # Covered only between tol and the first coarse sample.
                hi[k] = radii_grid[ray, 0]
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            good = coverage_at(mid, idx) >= params.alpha
            lo = np.where(good, mid, lo)
            hi = np.where(good, hi, mid)
        radius[idx] = 0.5 * (lo + hi)

    points = []
    for k in range(n_rays):
        if math.isnan(radius[k]):
            continue
        x = float(origin[0] + radius[k] * dirs[k, 0])
        y = float(origin[1] + radius[k] * dirs[k, 1])
        points.append(BoundaryPoint(float(angles[k]), float(radius[k]), Point2D(x, y)))
    return tuple(points)


def spatial_availability(
    ap_index: int, dep: Deployment, params: RadioParams, resolution: float
) -> SpatialAvailability:
    """Availability ratio min(1, |region| / |cell|) for one AP."""
    region = available_region(ap_index, dep, params, resolution)
    area_v = voronoi_tessellate(dep)[ap_index].area
    return SpatialAvailability(
        ap_index=ap_index,
        a_s=min(1.0, region.area / area_v),
        area_d=region.area,
        area_v=area_v,
    )


def mean_spatial_availability(
    n_aps: int,
    params: RadioParams,
    n_realizations: int,
    resolution: float,
    seed: int,
    box: BoundingBox = DEFAULT_BOX,
) -> tuple[float, float]:
    """Deployment-averaged availability of a uniformly chosen AP.

    Each seeded realization draws a fresh deployment, picks one AP
    uniformly (from a stream independent of the placement draws), and
    evaluates its availability ratio.  Returns (mean, standard error);
    identical seeds give identical results regardless of worker count.
    """
    mean, stderr = mean_availability_grid(
        n_aps, [params.theta_db], [params.alpha], n_realizations, resolution, seed,
        eta=params.eta, box=box,
    )
    return float(mean[0, 0]), float(stderr[0, 0])


def mean_availability_grid(
    n_aps: int,
    thetas_db,
    alphas,
    n_realizations: int,
    resolution: float,
    seed: int,
    eta: float = 4.0,
    box: BoundingBox = DEFAULT_BOX,
) -> tuple[np.ndarray, np.ndarray]:
    """Deployment-averaged availability over a (theta, alpha) grid.

    Shares the per-realization deployments across all grid points, so the
    single-point view of the output equals :func:`mean_spatial_availability`
    called with the same seed.  Returns (mean, stderr) arrays of shape
    (len(thetas_db), len(alphas)).
    """
    if n_realizations < 1:
        raise ValueError(f"need at least one realization, got {n_realizations}")
    thetas = 10.0 ** (np.asarray(thetas_db, dtype=float) / 10.0)
    alphas = np.asarray(alphas, dtype=float)
    nx, ny = _grid_shape(box, resolution)
    centers = _cell_centers(box, nx, ny)
    cell_area = (box.width / nx) * (box.height / ny)
    seeds = _realization_seeds(seed, n_realizations)

    def one(pair: np.ndarray) -> np.ndarray:
        dep = generate_deployment(n_aps, box, eta=eta, seed=int(pair[0]))
        j = int(np.random.default_rng(pair[1]).integers(n_aps))
        area_v = voronoi_tessellate(dep)[j].area
        d_eta = cdist(centers, dep.coords) ** eta
        out = np.empty((len(thetas), len(alphas)))
        for ti, theta in enumerate(thetas):
            coverage = _coverage_from_powers(d_eta, j, theta)
            for ai, alpha in enumerate(alphas):
                area_d = float(np.count_nonzero(coverage >= alpha)) * cell_area
                out[ti, ai] = min(1.0, area_d / area_v)
        return out

    samples = np.stack(parallel.map_ordered(one, list(seeds)))
    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=0) / math.sqrt(n_realizations)
    return mean, stderr


def write_region_pbm(region: AvailabilityRegion, path) -> None:
    """Write the membership raster as a plain-text P1 bitmap.

    Rows run from the top of the box downward (image convention); a 1
    marks a member cell.
    """
    nx, ny = region.membership.shape
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"P1\n{nx} {ny}\n")
        for iy in range(ny - 1, -1, -1):
            fh.write(" ".join("1" if m else "0" for m in region.membership[:, iy]))
            fh.write("\n")


def write_region_csv(region: AvailabilityRegion, path) -> None:
    """Write per-cell membership as ``x,y,member`` rows (cell centers)."""
    xs, ys = region.cell_centers()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y,member\n")
        for ix, x in enumerate(xs):
            for iy, y in enumerate(ys):
                fh.write(f"{x:.12g},{y:.12g},{1 if region.membership[ix, iy] else 0}\n")


def write_boundary_csv(points, path) -> None:
    """Write radial boundary points as ``angle_rad,x,y`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("angle_rad,x,y\n")
        for bp in points:
            fh.write(f"{bp.angle_rad:.12g},{bp.point.x:.12g},{bp.point.y:.12g}\n")


def _grid_shape(box: BoundingBox, resolution: float) -> tuple[int, int]:
    if resolution <= 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    if resolution > min(box.width, box.height) / 4:
        raise ValueError(
            f"resolution {resolution} too coarse for a {box.width} x {box.height} box"
        )
    return max(1, round(box.width / resolution)), max(1, round(box.height / resolution))


def _cell_centers(box: BoundingBox, nx: int, ny: int) -> np.ndarray:
    xs = box.xmin + (np.arange(nx) + 0.5) * (box.width / nx)
    ys = box.ymin + (np.arange(ny) + 0.5) * (box.height / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def _realization_seeds(seed: int, n_realizations: int) -> np.ndarray:
    """Per-realization (placement, AP-choice) seed pairs, shape (n, 2)."""
    ss = np.random.SeedSequence(int(seed))
    return ss.generate_state(2 * n_realizations, np.uint64).reshape(n_realizations, 2)


def _ray_exit_distances(origin: np.ndarray, dirs: np.ndarray, box: BoundingBox) -> np.ndarray:
    """Distance from an interior point to the box boundary along each direction."""
    with np.errstate(divide="ignore"):
        tx = np.where(
            dirs[:, 0] > 0,
            (box.xmax - origin[0]) / dirs[:, 0],
            np.where(dirs[:, 0] < 0, (box.xmin - origin[0]) / dirs[:, 0], np.inf),
        )
        ty = np.where(
            dirs[:, 1] > 0,
            (box.ymax - origin[1]) / dirs[:, 1],
            np.where(dirs[:, 1] < 0, (box.ymin - origin[1]) / dirs[:, 1], np.inf),
        )
    return np.minimum(tx, ty)


def _checked_index(ap_index: int, dep: Deployment) -> int:
    if not 0 <= ap_index < dep.n:
        raise ValueError(f"AP index {ap_index} out of range for {dep.n} APs")
    return ap_index
