"""Space-time availability of wireless links in interference-limited deployments.

Quantifies where a service works (SIR-confidence regions over Voronoi
cells of an AP deployment) and for how long (transient and steady-state
availability/reliability of an availability-proportional channel split,
modeled as a two-region Erlang-loss chain).  Everything is seeded and
deterministic; the ``wavail`` CLI replays standard scenario sweeps to CSV.
"""

__version__ = "0.1.0"

from .geometry import (
    BoundingBox,
    Deployment,
    Point2D,
    VoronoiCell,
    generate_deployment,
    nearest_ap,
    shoelace_area,
    voronoi_tessellate,
)
from .radio import (
    FadingSample,
    RadioParams,
    coverage_probability,
    coverage_probability_field,
    draw_fading,
    is_available,
    pathloss,
    sample_sir,
)
from .spatial import (
    DEFAULT_BOX,
    AvailabilityRegion,
    BoundaryPoint,
    SpatialAvailability,
    available_region,
    mean_availability_grid,
    mean_spatial_availability,
    region_boundary_radial,
    spatial_availability,
)
from .ctmc import (
    ChannelPartition,
    ErlangChainSpec,
    GeneratorMatrix,
    TransientResult,
    TruncationError,
    UniformizedSolution,
    build_generator,
    build_state_space,
    erlang_b,
    make_absorbing,
    partition_channels,
    steady_state_availability,
    steady_state_sweep,
    temporal_availability,
    uniformized_transient,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    ManifestError,
    RunManifest,
    load_config,
    run_scenario,
    verify_manifest,
)

__all__ = [
    "__version__",
    "BoundingBox",
    "Deployment",
    "Point2D",
    "VoronoiCell",
    "generate_deployment",
    "nearest_ap",
    "shoelace_area",
    "voronoi_tessellate",
    "FadingSample",
    "RadioParams",
    "coverage_probability",
    "coverage_probability_field",
    "draw_fading",
    "is_available",
    "pathloss",
    "sample_sir",
    "DEFAULT_BOX",
    "AvailabilityRegion",
    "BoundaryPoint",
    "SpatialAvailability",
    "available_region",
    "mean_availability_grid",
    "mean_spatial_availability",
    "region_boundary_radial",
    "spatial_availability",
    "ChannelPartition",
    "ErlangChainSpec",
    "GeneratorMatrix",
    "TransientResult",
    "TruncationError",
    "UniformizedSolution",
    "build_generator",
    "build_state_space",
    "erlang_b",
    "make_absorbing",
    "partition_channels",
    "steady_state_availability",
    "steady_state_sweep",
    "temporal_availability",
    "uniformized_transient",
    "ConfigError",
    "ExperimentConfig",
    "ManifestError",
    "RunManifest",
    "load_config",
    "run_scenario",
    "verify_manifest",
]
