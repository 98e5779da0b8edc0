"""Pathloss, Rayleigh fading, SIR sampling, and SIR-confidence evaluation.

The link model is interference-limited: a probe location is served by one
AP while every other AP transmits at the same power on the same channel.
Power gains fade independently per link as unit-mean exponentials, and the
probability that the instantaneous SIR clears a threshold has a closed
product form over the interferers.  Transmit power cancels throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import Deployment, Point2D

__all__ = [
    "RadioParams",
    "FadingSample",
    "draw_fading",
    "pathloss",
    "sample_sir",
    "coverage_probability",
    "coverage_probability_field",
    "is_available",
]


@dataclass(frozen=True)
class RadioParams:
    """SIR threshold / confidence pair plus propagation constants.

    Attributes:
        theta_db: SIR threshold in dB.
        alpha: required confidence level, strictly between 0 and 1.
        eta: pathloss exponent (> 2).
        p_tx: transmit power in watts.  Informational only: every quantity
            computed here is a power ratio and the value cancels out.
    """

    theta_db: float
    alpha: float
    eta: float = 4.0
    p_tx: float = 1.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.eta > 2:
            raise ValueError(f"pathloss exponent must exceed 2, got {self.eta}")
        if not self.p_tx > 0:
            raise ValueError(f"transmit power must be positive, got {self.p_tx}")

    @property
    def theta_linear(self) -> float:
        return 10.0 ** (self.theta_db / 10.0)


@dataclass(frozen=True)
class FadingSample:
    """One power gain per AP link, drawn as unit-mean exponentials."""

    gains: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.gains, dtype=float)
        if (arr < 0).any():
            raise ValueError("fading power gains must be nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "gains", arr)

    def __getitem__(self, ap_index: int) -> float:
        return float(self.gains[ap_index])

    def __len__(self) -> int:
        return len(self.gains)


def draw_fading(n_aps: int, rng: np.random.Generator) -> FadingSample:
    """Draw one independent unit-mean exponential gain per AP.

    Uses inverse-transform sampling from ``rng`` so that parallel callers
    holding distinct streams get independent, reproducible draws.
    """
    u = rng.random(n_aps)
    return FadingSample(-np.log1p(-u))


def pathloss(a: Point2D, b: Point2D, eta: float) -> float:
    """Distance-power attenuation d(a, b)**(-eta); singular at zero distance."""
    d = a.distance_to(b)
    if d == 0.0:
        raise ValueError("pathloss is singular at zero distance")
    return d ** -eta


def sample_sir(z: Point2D, serving: int, dep: Deployment, fading: FadingSample) -> float:
    """Instantaneous SIR at ``z`` for one fading draw.

    Requires at least one interferer (N >= 2) and ``z`` distinct from every
    AP location.  Transmit power cancels between numerator and denominator.
    """
    if dep.n < 2:
        raise ValueError("SIR is undefined without interferers; single-AP coverage is certain")
    _check_serving(serving, dep.n)
    if len(fading) != dep.n:
        raise ValueError(f"fading sample covers {len(fading)} APs, deployment has {dep.n}")
    diff = dep.coords - z.as_array()
    d = np.hypot(diff[:, 0], diff[:, 1])
    if (d == 0.0).any():
        raise ValueError("SIR sample point coincides with an AP location")
    att = d ** -dep.eta
    signal = fading[serving] * att[serving]
    mask = np.ones(dep.n, dtype=bool)
    mask[serving] = False
    interference = float(np.sum(fading.gains[mask] * att[mask]))
    if interference == 0.0:
        return math.inf
    return float(signal / interference)


def coverage_probability(z: Point2D, serving: int, dep: Deployment, theta_linear: float) -> float:
    """Probability (over fading) that the SIR at ``z`` reaches ``theta_linear``.

    Closed form: the product over interferers k of
    ``d_k**eta / (d_k**eta + theta * d_serv**eta)``.  An empty interferer
    set gives exactly 1.  A probe coinciding with the serving AP has
    coverage 1, with an interferer coverage 0 (limiting conventions).
    """
    if theta_linear <= 0:
        raise ValueError(f"linear SIR threshold must be positive, got {theta_linear}")
    _check_serving(serving, dep.n)
    if dep.n == 1:
        return 1.0
    point = np.array([[z.x, z.y]])
    return float(coverage_probability_field(point, dep, serving, theta_linear)[0])


def coverage_probability_field(
    points: np.ndarray, dep: Deployment, serving: int, theta_linear: float
) -> np.ndarray:
    """Vectorized :func:`coverage_probability` over many probe points.

    Args:
        points: (m, 2) array of probe coordinates.
        dep: the deployment.
        serving: index of the serving AP (fixed for all probes).
        theta_linear: linear SIR threshold.

    Returns:
        (m,) array of coverage probabilities in (0, 1].
    """
    _check_serving(serving, dep.n)
    points = np.asarray(points, dtype=float)
    if dep.n == 1:
        return np.ones(len(points))
    d_eta = cdist(points, dep.coords) ** dep.eta
    return _coverage_from_powers(d_eta, serving, theta_linear)


def is_available(z: Point2D, serving: int, dep: Deployment, params: RadioParams) -> bool:
    """Whether coverage confidence at ``z`` meets ``params.alpha`` (boundary counts)."""
    return coverage_probability(z, serving, dep, params.theta_linear) >= params.alpha


def _coverage_from_powers(d_eta: np.ndarray, serving: int, theta_linear: float) -> np.ndarray:
    """Coverage from precomputed distance powers d**eta, shape (m, n_aps)."""
    ds = d_eta[:, serving]
    # Probe on an interferer: term 0/positive -> 0.  Probe on the serving
    # AP: 0/0 only in the serving column, overwritten below.
    with np.errstate(invalid="ignore"):
        terms = d_eta / (d_eta + theta_linear * ds[:, None])
    terms[:, serving] = 1.0
    return terms.prod(axis=1)


def _check_serving(serving: int, n: int) -> None:
    if not 0 <= serving < n:
        raise ValueError(f"serving AP index {serving} out of range for {n} APs")
