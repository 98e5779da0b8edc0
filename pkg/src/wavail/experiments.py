"""Seeded scenario runners that emit CSV artifacts plus a run manifest.

Each scenario reads a flat key-value config (defaults cover the standard
10 m x 10 m / eta 4 / M 10 / lambda 8 / mu 1 setup), runs deterministically
from its seed, and writes plain CSV (12 significant digits, LF endings)
into the output directory together with ``manifest.json`` listing a
checksum for every artifact.  Reruns with the same config and seed
reproduce every CSV byte for byte, independent of the worker pool size.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, ctmc, spatial
from .geometry import BoundingBox, Point2D, generate_deployment, voronoi_tessellate, write_deployment_csv
from .radio import RadioParams

__all__ = [
    "SCENARIOS",
    "ConfigError",
    "ManifestError",
    "ExperimentConfig",
    "RunManifest",
    "load_config",
    "run_scenario",
    "run_region",
    "run_spatial_sweep",
    "run_densification",
    "run_transient",
    "run_steady",
    "run_joint",
    "verify_manifest",
]

SCENARIOS = ("region", "spatial-sweep", "densification", "transient", "steady", "joint")

MANIFEST_NAME = "manifest.json"

_STEADY_AS_GRID = tuple(round(0.1 * k, 1) for k in range(1, 11))
_JOINT_AS_GRID = tuple(round(0.1 * k, 1) for k in range(0, 11))


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class ManifestError(RuntimeError):
    """Output directory does not match its manifest."""


@dataclass
class ExperimentConfig:
    """Resolved scenario parameters.

    ``theta_db`` and ``alpha`` default to the scenario's standard grid when
    left unset.  ``lambda`` is accepted as a config-file alias for ``lam``.
    """

    scenario: str
    box_width: float = 10.0
    box_height: float = 10.0
    n_aps: int = 10
    eta: float = 4.0
    theta_db: tuple[float, ...] | None = None
    alpha: tuple[float, ...] | None = None
    m_total: int = 10
    lam: float = 8.0
    mu: float = 1.0
    n_realizations: int = 10000
    resolution: float = 0.05
    seed: int = 1
    t_max: float = 5.0
    time_points: int = 200
    a_s: float = 0.7
    rho_min: float = 0.25
    rho_max: float = 64.0
    rho_points: int = 33
    m_list: tuple[int, ...] = (10, 20, 30)
    n_list: tuple[int, ...] = (20, 40, 60, 80, 100)
    target_availability: float = 0.8
    n_rays: int = 360
    boundary_tol: float = 1e-3
    ap_index: int = -1
    eps: float = 1e-10
    split_arrivals: bool = False
    output_dir: str = "out"

    def box(self) -> BoundingBox:
        return BoundingBox(self.box_width, self.box_height)

    def thetas(self) -> tuple[float, ...]:
        if self.theta_db is not None:
            return self.theta_db
        return _SCENARIO_THETAS.get(self.scenario, (0.0,))

    def alphas(self) -> tuple[float, ...]:
        if self.alpha is not None:
            return self.alpha
        return _SCENARIO_ALPHAS.get(self.scenario, (0.8,))

    def canonical_text(self) -> str:
        """Stable key=value rendering used for the config hash."""
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(f"{v:g}" if isinstance(v, float) else str(v) for v in value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"


_SCENARIO_THETAS = {
    "region": (0.0,),
    "spatial-sweep": tuple(float(t) for t in range(-5, 6)),
    "densification": (0.0,),
}

_SCENARIO_ALPHAS = {
    "region": (0.7, 0.8, 0.9),
    "spatial-sweep": (0.5, 0.7, 0.8, 0.9),
    "densification": (0.7, 0.9),
}

_LIST_FIELDS = {"theta_db", "alpha", "m_list", "n_list"}
_KEY_ALIASES = {"lambda": "lam"}


@dataclass(frozen=True)
class RunManifest:
    """Checksummed record of one scenario run."""

    scenario: str
    config_hash: str
    seed: int
    code_version: str
    wall_clock_sec: float
    outputs: dict[str, str] = field(default_factory=dict)

    def write(self, directory: Path) -> Path:
        path = directory / MANIFEST_NAME
        payload = dataclasses.asdict(self)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def load_config(scenario: str, path=None, overrides=(), seed=None, out=None) -> ExperimentConfig:
    """Build a config from defaults, an optional file, then overrides.

    Precedence, lowest to highest: defaults, config file, ``overrides``
    (``key=value`` strings, applied in order), then the ``seed`` / ``out``
    arguments.
    """
    if scenario not in SCENARIOS:
        raise ConfigError(f"config.scenario: unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    values: dict[str, object] = {}
    if path is not None:
        for key, raw in _parse_config_file(path):
            values[key] = raw
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"config.override: expected key=value, got {item!r}")
        key, raw = item.split("=", 1)
        values[key.strip()] = raw.strip()
    cfg = ExperimentConfig(scenario=scenario)
    for key, raw in values.items():
        _apply_field(cfg, key, raw)
    if seed is not None:
        cfg.seed = int(seed)
    if out is not None:
        cfg.output_dir = str(out)
    validate_config(cfg)
    return cfg


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ConfigError(f"config.{field_name}: {message}")


def validate_config(cfg: ExperimentConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError(f"config.scenario: unknown scenario {cfg.scenario!r}")
    _require(cfg.box_width > 0, "box_width", "must be positive")
    _require(cfg.box_height > 0, "box_height", "must be positive")
    _require(cfg.n_aps >= 1, "n_aps", "must be >= 1")
    _require(cfg.eta > 2, "eta", "must exceed 2")
    _require(cfg.m_total >= 1, "m_total", "must be >= 1")
    _require(cfg.lam > 0, "lambda", "must be positive")
    _require(cfg.mu > 0, "mu", "must be positive")
    _require(cfg.n_realizations >= 1, "n_realizations", "must be >= 1")
    _require(cfg.resolution > 0, "resolution", "must be positive")
    _require(
        cfg.resolution <= min(cfg.box_width, cfg.box_height) / 4,
        "resolution",
        "must be at most a quarter of the smaller box side",
    )
    _require(cfg.t_max > 0, "t_max", "must be positive")
    _require(cfg.time_points >= 2, "time_points", "must be >= 2")
    _require(0.0 <= cfg.a_s <= 1.0, "a_s", "must lie in [0, 1]")
    _require(cfg.rho_min > 0, "rho_min", "must be positive")
    _require(cfg.rho_max >= cfg.rho_min, "rho_max", "must be >= rho_min")
    _require(cfg.rho_points >= 2, "rho_points", "must be >= 2")
    _require(all(m >= 1 for m in cfg.m_list), "m_list", "entries must be >= 1")
    _require(all(n >= 1 for n in cfg.n_list), "n_list", "entries must be >= 1")
    _require(0 < cfg.target_availability < 1, "target_availability", "must lie in (0, 1)")
    _require(cfg.n_rays >= 8, "n_rays", "must be >= 8")
    _require(cfg.boundary_tol > 0, "boundary_tol", "must be positive")
    _require(cfg.eps > 0, "eps", "must be positive")
    for value in cfg.thetas():
        _require(np.isfinite(value), "theta_db", "entries must be finite")
    for value in cfg.alphas():
        _require(0 < value < 1, "alpha", "entries must lie in (0, 1)")


def run_scenario(cfg: ExperimentConfig) -> RunManifest:
    """Dispatch to the scenario runner and write the manifest."""
    runner = {
        "region": run_region,
        "spatial-sweep": run_spatial_sweep,
        "densification": run_densification,
        "transient": run_transient,
        "steady": run_steady,
        "joint": run_joint,
    }[cfg.scenario]
    return runner(cfg)


def run_region(cfg: ExperimentConfig) -> RunManifest:
    """Raster and boundary exports of one AP's confidence regions.

    For every (theta, alpha) pair, writes the membership raster (P1 bitmap
    and ``x,y,member`` CSV) and the radial boundary polyline, plus the
    chosen AP's Voronoi polygon and the deployment itself.
    """
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    box = cfg.box()
    dep = generate_deployment(cfg.n_aps, box, eta=cfg.eta, seed=cfg.seed)
    ap = cfg.ap_index
    if ap < 0:
        center = Point2D(box.xmin + box.width / 2, box.ymin + box.height / 2)
        dists = [center.distance_to(p) for p in dep.aps]
        ap = int(np.argmin(dists))
    _require(ap < dep.n, "ap_index", f"must be below n_aps={dep.n}")

    files = []
    write_deployment_csv(dep, out / "deployment.csv")
    files.append("deployment.csv")
    cell = voronoi_tessellate(dep)[ap]
    _write_polygon_csv(cell.vertex_array(), out / "voronoi_cell.csv")
    files.append("voronoi_cell.csv")
    for theta in cfg.thetas():
        for alpha in cfg.alphas():
            params = RadioParams(theta_db=theta, alpha=alpha, eta=cfg.eta)
            tag = f"theta_{theta:g}_alpha_{alpha:g}"
            region = spatial.available_region(ap, dep, params, cfg.resolution)
            spatial.write_region_pbm(region, out / f"region_{tag}.pbm")
            spatial.write_region_csv(region, out / f"region_{tag}.csv")
            boundary = spatial.region_boundary_radial(
                ap, dep, params, n_rays=cfg.n_rays, tol=cfg.boundary_tol
            )
            spatial.write_boundary_csv(boundary, out / f"boundary_{tag}.csv")
            files.extend([f"region_{tag}.pbm", f"region_{tag}.csv", f"boundary_{tag}.csv"])
    return _finish(cfg, out, files, started)


def run_spatial_sweep(cfg: ExperimentConfig) -> RunManifest:
    """Deployment-averaged availability over the (theta, alpha) grid."""
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    thetas = cfg.thetas()
    alphas = cfg.alphas()
    mean, stderr = spatial.mean_availability_grid(
        cfg.n_aps, thetas, alphas, cfg.n_realizations, cfg.resolution, cfg.seed,
        eta=cfg.eta, box=cfg.box(),
    )
    with open(out / "spatial_sweep.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("theta_db,alpha,mean_as,stderr\n")
        for ti, theta in enumerate(thetas):
            for ai, alpha in enumerate(alphas):
                fh.write(f"{theta:.12g},{alpha:.12g},{mean[ti, ai]:.12g},{stderr[ti, ai]:.12g}\n")
    return _finish(cfg, out, ["spatial_sweep.csv"], started)


def run_densification(cfg: ExperimentConfig) -> RunManifest:
    """Deployment-averaged availability versus the number of APs (theta fixed)."""
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    theta = cfg.thetas()[0]
    alphas = cfg.alphas()
    rows = []
    for n in cfg.n_list:
        mean, _ = spatial.mean_availability_grid(
            n, [theta], alphas, cfg.n_realizations, cfg.resolution, cfg.seed,
            eta=cfg.eta, box=cfg.box(),
        )
        for ai, alpha in enumerate(alphas):
            rows.append((n, alpha, mean[0, ai]))
    with open(out / "densification.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("n,alpha,mean_as\n")
        for n, alpha, value in rows:
            fh.write(f"{n},{alpha:.12g},{value:.12g}\n")
    return _finish(cfg, out, ["densification.csv"], started)


def run_transient(cfg: ExperimentConfig) -> RunManifest:
    """Availability/reliability trajectories from an all-idle start."""
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    spec = _chain_spec(cfg, cfg.a_s)
    times = np.linspace(0.0, cfg.t_max, cfg.time_points)
    result = ctmc.temporal_availability(spec, times, eps=cfg.eps)
    ctmc.write_transient_csv(result, out / "transient.csv")
    return _finish(cfg, out, ["transient.csv"], started)


def run_steady(cfg: ExperimentConfig) -> RunManifest:
    """Steady-state availability over a log grid of offered load."""
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    ratio = cfg.rho_max / cfg.rho_min
    rhos = cfg.rho_min * ratio ** (np.arange(cfg.rho_points) / (cfg.rho_points - 1))
    with open(out / "steady.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("rho,a_s,at_a,at_n\n")
        for rho in rhos:
            for a_s in _STEADY_AS_GRID:
                part = ctmc.partition_channels(a_s, cfg.m_total)
                rho_a, rho_n = _region_loads(cfg, float(rho), a_s)
                at_a = ctmc.steady_state_availability(rho_a, part.m_a) if part.m_a else 0.0
                at_n = ctmc.steady_state_availability(rho_n, part.m_n) if part.m_n else 0.0
                fh.write(f"{rho:.12g},{a_s:.12g},{at_a:.12g},{at_n:.12g}\n")
    return _finish(cfg, out, ["steady.csv"], started)


def run_joint(cfg: ExperimentConfig) -> RunManifest:
    """Steady-state availability versus the availability ratio, per channel count.

    Also reports, per channel count, the interval of the availability
    ratio on which both regions meet the target availability; the interval
    edges are located by linear interpolation on the ratio grid.
    """
    started = time.perf_counter()
    out = _prepare_dir(cfg)
    rho = cfg.lam / cfg.mu
    grid = np.array(_JOINT_AS_GRID)

    curves: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for m in cfg.m_list:
        at_a = np.empty(grid.size)
        at_n = np.empty(grid.size)
        for k, a_s in enumerate(grid):
            part = ctmc.partition_channels(float(a_s), m)
            rho_a, rho_n = _region_loads(cfg, rho, float(a_s))
            at_a[k] = ctmc.steady_state_availability(rho_a, part.m_a) if part.m_a else 0.0
            at_n[k] = ctmc.steady_state_availability(rho_n, part.m_n) if part.m_n else 0.0
        curves[m] = (at_a, at_n)

    with open(out / "joint.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("a_s,m,at_a,at_n\n")
        for m in cfg.m_list:
            at_a, at_n = curves[m]
            for k, a_s in enumerate(grid):
                fh.write(f"{a_s:.12g},{m},{at_a[k]:.12g},{at_n[k]:.12g}\n")

    sweep_rows = ctmc.steady_state_sweep(grid, cfg.m_list, rho)
    ctmc.write_steady_sweep_csv(sweep_rows, out / "steady_sweep.csv")

    with open(out / "bands.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write("m,target,a_s_low,a_s_high\n")
        for m in cfg.m_list:
            at_a, at_n = curves[m]
            low, high = _requirement_band(grid, np.minimum(at_a, at_n), cfg.target_availability)
            fh.write(f"{m},{cfg.target_availability:.12g},{low:.12g},{high:.12g}\n")

    return _finish(cfg, out, ["joint.csv", "steady_sweep.csv", "bands.csv"], started)


def verify_manifest(directory) -> RunManifest:
    """Check that a run directory matches its manifest exactly.

    Every listed output must exist with the recorded checksum and no
    unlisted files may be present.  Returns the parsed manifest.
    """
    directory = Path(directory)
    path = directory / MANIFEST_NAME
    if not path.is_file():
        raise ManifestError(f"missing {MANIFEST_NAME} in {directory}")
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    manifest = RunManifest(**payload)
    actual = {
        p.name: _sha256(p)
        for p in sorted(directory.iterdir())
        if p.is_file() and p.name != MANIFEST_NAME
    }
    missing = set(manifest.outputs) - set(actual)
    extra = set(actual) - set(manifest.outputs)
    if missing or extra:
        raise ManifestError(f"output set mismatch: missing={sorted(missing)} extra={sorted(extra)}")
    for name, digest in manifest.outputs.items():
        if actual[name] != digest:
            raise ManifestError(f"checksum mismatch for {name}")
    return manifest


def _requirement_band(grid: np.ndarray, values: np.ndarray, target: float) -> tuple[float, float]:
    """Interval of the grid where ``values`` stays at or above ``target``.

    Edges are linearly interpolated inside the first grid interval that
    crosses the target in each direction; (nan, nan) when the target is
    never reached.
    """
    above = values >= target
    if not above.any():
        return (math.nan, math.nan)
    first = int(np.argmax(above))
    last = len(values) - 1 - int(np.argmax(above[::-1]))
    if first == 0:
        low = float(grid[0])
    else:
        low = _interp_crossing(grid[first - 1], grid[first], values[first - 1], values[first], target)
    if last == len(values) - 1:
        high = float(grid[-1])
    else:
        high = _interp_crossing(grid[last], grid[last + 1], values[last], values[last + 1], target)
    return (low, high)


def _interp_crossing(x0, x1, y0, y1, target) -> float:
    if y1 == y0:
        return float(x0)
    return float(x0 + (x1 - x0) * (target - y0) / (y1 - y0))


def _chain_spec(cfg: ExperimentConfig, a_s: float) -> ctmc.ErlangChainSpec:
    part = ctmc.partition_channels(a_s, cfg.m_total)
    lam_a = lam_n = None
    if cfg.split_arrivals:
        lam_a = cfg.lam * a_s
        lam_n = cfg.lam * (1.0 - a_s)
    return ctmc.ErlangChainSpec(partition=part, lam=cfg.lam, mu=cfg.mu, lam_a=lam_a, lam_n=lam_n)


def _region_loads(cfg: ExperimentConfig, rho: float, a_s: float) -> tuple[float, float]:
    if not cfg.split_arrivals:
        return rho, rho
    return rho * a_s, rho * (1.0 - a_s)


def _write_polygon_csv(vertices: np.ndarray, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,y\n")
        for x, y in vertices:
            fh.write(f"{x:.12g},{y:.12g}\n")


def _prepare_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(cfg: ExperimentConfig, out: Path, files, started: float) -> RunManifest:
    manifest = RunManifest(
        scenario=cfg.scenario,
        config_hash=hashlib.sha256(cfg.canonical_text().encode()).hexdigest(),
        seed=cfg.seed,
        code_version=__version__,
        wall_clock_sec=time.perf_counter() - started,
        outputs={name: _sha256(out / name) for name in files},
    )
    manifest.write(out)
    return manifest


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_config_file(path):
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ConfigError(f"config:{lineno}: expected key = value, got {text!r}")
            key, raw = text.split("=", 1)
            pairs.append((key.strip(), raw.split("#", 1)[0].strip()))
    return pairs


def _apply_field(cfg: ExperimentConfig, key: str, raw) -> None:
    name = _KEY_ALIASES.get(key, key)
    if name == "scenario":
        raise ConfigError("config.scenario: set the scenario by CLI argument, not config key")
    field_types = {f.name: f.type for f in dataclasses.fields(cfg)}
    if name not in field_types:
        raise ConfigError(f"config.{key}: unknown key")
    try:
        setattr(cfg, name, _coerce(name, raw))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config.{key}: {exc}") from None


def _coerce(name: str, raw):
    if isinstance(raw, (tuple, list)):
        raw = ",".join(str(v) for v in raw)
    text = str(raw).strip()
    if name in _LIST_FIELDS:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("expected a comma-separated list")
        caster = int if name in {"m_list", "n_list"} else float
        return tuple(caster(p) for p in parts)
    if name == "split_arrivals":
        lowered = text.lower()
        if lowered in {"true", "1", "yes", "on"}:
            return True
        if lowered in {"false", "0", "no", "off"}:
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if name == "output_dir":
        return text
    if name in {"n_aps", "m_total", "n_realizations", "seed", "time_points", "rho_points",
                "n_rays", "ap_index"}:
        return int(text)
    return float(text)
