"""Two-region Erlang-loss chain: generators, transients, steady state.

An AP's channels are split between its spatially available and
non-available service regions in proportion to the availability ratio.
Each region behaves as an M/M/c/c loss system; jointly they form a finite
two-dimensional birth/death chain over busy-channel counts.  Transient
state distributions come from uniformization of the generator, reliability
from an absorbing variant that freezes the chain once a region fills up,
and the steady state from the Erlang-B blocking recursion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.special import gammaln

__all__ = [
    "ChannelPartition",
    "ErlangChainSpec",
    "GeneratorMatrix",
    "UniformizedSolution",
    "TransientResult",
    "TruncationError",
    "partition_channels",
    "build_state_space",
    "build_generator",
    "make_absorbing",
    "uniformized_transient",
    "temporal_availability",
    "erlang_b",
    "steady_state_availability",
    "steady_state_sweep",
    "write_transient_csv",
    "write_steady_sweep_csv",
]

# Generators up to this dimension are stored dense; larger ones sparse.
_DENSE_LIMIT = 4096

# Hard cap on the uniformization truncation level.
_MAX_TRUNCATION = 5_000_000


class TruncationError(ArithmeticError):
    """Raised when the requested tail tolerance is out of numerical reach."""


@dataclass(frozen=True)
class ChannelPartition:
    """Split of an AP's channels between its two service regions."""

    m_total: int
    m_a: int
    m_n: int

    def __post_init__(self):
        if self.m_total < 0 or self.m_a < 0 or self.m_n < 0:
            raise ValueError("channel counts must be nonnegative")
        if self.m_a + self.m_n != self.m_total:
            raise ValueError(
                f"partition {self.m_a} + {self.m_n} does not add up to {self.m_total}"
            )


@dataclass(frozen=True)
class ErlangChainSpec:
    """Parameters of the two-region loss chain.

    ``lam`` is the arrival rate seen by each region; ``lam_a``/``lam_n``
    override it per region (used by the optional arrival-splitting mode).
    """

    partition: ChannelPartition
    lam: float
    mu: float
    initial_state: tuple[int, int] = (0, 0)
    lam_a: float | None = None
    lam_n: float | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"arrival rate must be positive, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"service rate must be positive, got {self.mu}")
        for name, value in (("lam_a", self.lam_a), ("lam_n", self.lam_n)):
            if value is not None and value < 0:
                raise ValueError(f"{name} must be nonnegative, got {value}")
        n_a, n_n = self.initial_state
        if not (0 <= n_a <= self.partition.m_a and 0 <= n_n <= self.partition.m_n):
            raise ValueError(
                f"initial state {self.initial_state} infeasible for partition "
                f"({self.partition.m_a}, {self.partition.m_n})"
            )

    @property
    def arrival_rates(self) -> tuple[float, float]:
        return (
            self.lam if self.lam_a is None else self.lam_a,
            self.lam if self.lam_n is None else self.lam_n,
        )


@dataclass(frozen=True)
class GeneratorMatrix:
    """Transition-rate matrix over the ordered state list.

    Rows sum to zero, off-diagonals are nonnegative, and
    ``uniformization_rate`` equals the largest diagonal magnitude.
    """

    states: tuple[tuple[int, int], ...]
    matrix: object  # dense ndarray or scipy.sparse.csr_array
    uniformization_rate: float

    @property
    def dimension(self) -> int:
        return len(self.states)

    def dense(self) -> np.ndarray:
        if sparse.issparse(self.matrix):
            return self.matrix.toarray()
        return np.asarray(self.matrix)


@dataclass(frozen=True)
class UniformizedSolution:
    """State distribution at one time plus truncation diagnostics."""

    distribution: np.ndarray
    truncation_level: int
    tail_bound: float


@dataclass(frozen=True)
class TransientResult:
    """Availability and reliability trajectories on a time grid."""

    times: np.ndarray
    avail_a: np.ndarray
    avail_n: np.ndarray
    rel_a: np.ndarray
    rel_n: np.ndarray
    truncation_level: int
    tail_bound: float


def partition_channels(a_s: float, m: int) -> ChannelPartition:
    """Give round(a_s * m) channels to the available region, rest to the other.

    Rounding is half-up: an exact .5 goes to the available region.
    """
    if not 0.0 <= a_s <= 1.0:
        raise ValueError(f"availability ratio must lie in [0, 1], got {a_s}")
    if m < 1:
        raise ValueError(f"total channels must be >= 1, got {m}")
    m_a = _round_half_up(a_s * m)
    return ChannelPartition(m_total=m, m_a=m_a, m_n=m - m_a)


def build_state_space(partition: ChannelPartition) -> tuple[tuple[int, int], ...]:
    """All feasible (busy_a, busy_n) pairs in lexicographic order."""
    return tuple(
        (n_a, n_n)
        for n_a in range(partition.m_a + 1)
        for n_n in range(partition.m_n + 1)
    )


def build_generator(spec: ErlangChainSpec) -> GeneratorMatrix:
    """Transition-rate matrix of the two-region loss chain.

    Arrivals in a region admit one more busy channel at the region's
    arrival rate while it has a free channel; each busy channel releases
    independently at the service rate.
    """
    part = spec.partition
    lam_a, lam_n = spec.arrival_rates
    states = build_state_space(part)
    index = {s: k for k, s in enumerate(states)}
    dim = len(states)
    rows, cols, rates = [], [], []

    def add(src, dst, rate):
        if rate > 0:
            rows.append(index[src])
            cols.append(index[dst])
            rates.append(rate)

    for (n_a, n_n) in states:
        if n_a < part.m_a:
            add((n_a, n_n), (n_a + 1, n_n), lam_a)
        if n_n < part.m_n:
            add((n_a, n_n), (n_a, n_n + 1), lam_n)
        if n_a > 0:
            add((n_a, n_n), (n_a - 1, n_n), n_a * spec.mu)
        if n_n > 0:
            add((n_a, n_n), (n_a, n_n - 1), n_n * spec.mu)

    return _assemble(states, rows, cols, rates, dim)


def make_absorbing(gen: GeneratorMatrix, partition: ChannelPartition, region: str) -> GeneratorMatrix:
    """Freeze the chain in every state where ``region`` has no free channel.

    ``region`` is ``"a"`` or ``"n"``.  All outgoing rates of the affected
    states are zeroed (diagonal included), leaving them absorbing; the rest
    of the generator is unchanged.
    """
    axis = _region_axis(region)
    limit = partition.m_a if axis == 0 else partition.m_n
    absorbing = np.array([s[axis] == limit for s in gen.states])
    if sparse.issparse(gen.matrix):
        keep = _sparse_diag((~absorbing).astype(float))
        matrix = sparse.csr_array(keep @ gen.matrix)
    else:
        matrix = gen.dense().copy()
        matrix[absorbing, :] = 0.0
        matrix.setflags(write=False)
    q = float(np.abs(_diagonal(matrix)).max()) if len(gen.states) else 0.0
    return GeneratorMatrix(states=gen.states, matrix=matrix, uniformization_rate=q)


def uniformized_transient(
    gen: GeneratorMatrix, initial: np.ndarray, t: float, eps: float = 1e-10
) -> UniformizedSolution:
    """State distribution at time ``t`` from a Poisson mixture of jump powers.

    The generator is rescaled into the stochastic matrix
    ``R = I + Q / q`` and the matrix exponential is summed as
    ``exp(-q t) * sum_i (q t)^i / i! * initial @ R^i`` up to the smallest
    level whose Poisson tail mass is at most ``eps``.  The returned
    distribution is never renormalized; the tail bound is reported instead.
    Poisson weights are evaluated in log space, so large ``q t`` is safe.
    """
    if eps <= 0:
        raise ValueError(f"tail tolerance must be positive, got {eps}")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    initial = _checked_distribution(initial, gen.dimension)
    qt = gen.uniformization_rate * t
    if qt == 0.0:
        return UniformizedSolution(initial.copy(), 0, 0.0)
    weights, tail = _poisson_weights(qt, eps)
    r_matrix = _jump_matrix(gen)
    vec = initial.copy()
    acc = weights[0] * vec
    for w in weights[1:]:
        vec = vec @ r_matrix
        acc = acc + w * vec
    acc = np.asarray(acc).ravel()
    if (acc < -1e-12).any():
        raise ArithmeticError("uniformization produced a significantly negative probability")
    np.clip(acc, 0.0, None, out=acc)
    return UniformizedSolution(acc, len(weights) - 1, tail)


def temporal_availability(
    spec: ErlangChainSpec, times, eps: float = 1e-10
) -> TransientResult:
    """Availability and reliability of both regions over a time grid.

    A region is available while it has at least one free channel.
    Availability sums the transient distribution over its available
    states; reliability does the same on the absorbing variant of the
    chain, counting only histories that never filled the region.  A region
    with zero channels is never available.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("time grid must be nonempty")
    if (times < 0).any():
        raise ValueError("time grid must be nonnegative")
    part = spec.partition
    gen = build_generator(spec)
    states = np.array(gen.states)
    mask_a = states[:, 0] < part.m_a
    mask_n = states[:, 1] < part.m_n
    initial = np.zeros(gen.dimension)
    initial[gen.states.index(spec.initial_state)] = 1.0

    avail_a = np.empty(times.size)
    avail_n = np.empty(times.size)
    rel_a = np.empty(times.size)
    rel_n = np.empty(times.size)
    level = 0
    tail = 0.0
    chains = (
        (gen, ((avail_a, mask_a), (avail_n, mask_n))),
        (make_absorbing(gen, part, "a"), ((rel_a, mask_a),)),
        (make_absorbing(gen, part, "n"), ((rel_n, mask_n),)),
    )
    for generator, outputs in chains:
        for k, t in enumerate(times):
            sol = uniformized_transient(generator, initial, float(t), eps)
            for values, mask in outputs:
                values[k] = float(sol.distribution[mask].sum())
            level = max(level, sol.truncation_level)
            tail = max(tail, sol.tail_bound)

    return TransientResult(
        times=times,
        avail_a=avail_a,
        avail_n=avail_n,
        rel_a=rel_a,
        rel_n=rel_n,
        truncation_level=level,
        tail_bound=tail,
    )


def erlang_b(rho: float, m: int) -> float:
    """Blocking probability of an M/M/c/c loss system via the stable recursion."""
    if rho <= 0:
        raise ValueError(f"offered load must be positive, got {rho}")
    if m < 0:
        raise ValueError(f"channel count must be nonnegative, got {m}")
    b = 1.0
    for k in range(1, m + 1):
        b = rho * b / (k + rho * b)
    return b


def steady_state_availability(rho: float, m_u: int) -> float:
    """Long-run probability that a region with ``m_u`` channels has one free.

    Equals one minus the Erlang-B blocking probability; zero channels mean
    the region is never available.
    """
    if m_u == 0:
        return 0.0
    return 1.0 - erlang_b(rho, m_u)


def steady_state_sweep(a_s_values, m_values, rho: float) -> list[tuple]:
    """Steady-state availability of both regions over an (a_s, m) grid.

    Returns rows ``(a_s, m, m_a, m_n, at_a, at_n)`` ordered by m, then a_s.
    """
    rows = []
    for m in m_values:
        for a_s in a_s_values:
            part = partition_channels(float(a_s), int(m))
            rows.append(
                (
                    float(a_s),
                    int(m),
                    part.m_a,
                    part.m_n,
                    steady_state_availability(rho, part.m_a),
                    steady_state_availability(rho, part.m_n),
                )
            )
    return rows


def write_transient_csv(result: TransientResult, path) -> None:
    """Write trajectories as ``t,avail_a,avail_n,rel_a,rel_n`` rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,avail_a,avail_n,rel_a,rel_n\n")
        for k in range(result.times.size):
            fh.write(
                f"{result.times[k]:.12g},{result.avail_a[k]:.12g},"
                f"{result.avail_n[k]:.12g},{result.rel_a[k]:.12g},{result.rel_n[k]:.12g}\n"
            )


def write_steady_sweep_csv(rows, path) -> None:
    """Write :func:`steady_state_sweep` rows as ``a_s,m,m_a,m_n,at_a,at_n``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("a_s,m,m_a,m_n,at_a,at_n\n")
        for a_s, m, m_a, m_n, at_a, at_n in rows:
            fh.write(f"{a_s:.12g},{m},{m_a},{m_n},{at_a:.12g},{at_n:.12g}\n")


def _round_half_up(x: float) -> int:
    # Snap values a hair away from an exact half onto it, so the half-up
    # rule is stable against representation noise in a_s * m.
    doubled = round(2.0 * x)
    if abs(2.0 * x - doubled) < 1e-9:
        x = doubled / 2.0
    return int(math.floor(x + 0.5))


def _region_axis(region: str) -> int:
    if region == "a":
        return 0
    if region == "n":
        return 1
    raise ValueError(f"region must be 'a' or 'n', got {region!r}")


def _assemble(states, rows, cols, rates, dim) -> GeneratorMatrix:
    off_diag = sparse.coo_array((rates, (rows, cols)), shape=(dim, dim))
    outflow = np.asarray(off_diag.sum(axis=1)).ravel()
    if dim <= _DENSE_LIMIT:
        matrix = off_diag.toarray()
        matrix[np.arange(dim), np.arange(dim)] = -outflow
        matrix.setflags(write=False)
    else:
        diag = sparse.coo_array((-outflow, (np.arange(dim), np.arange(dim))), shape=(dim, dim))
        matrix = sparse.csr_array(off_diag + diag)
    q = float(outflow.max()) if dim else 0.0
    return GeneratorMatrix(states=tuple(states), matrix=matrix, uniformization_rate=q)


def _diagonal(matrix) -> np.ndarray:
    if sparse.issparse(matrix):
        return matrix.diagonal()
    return np.diagonal(matrix)


def _jump_matrix(gen: GeneratorMatrix):
    q = gen.uniformization_rate
    if sparse.issparse(gen.matrix):
        return sparse.csr_array(_sparse_diag(np.ones(gen.dimension)) + gen.matrix / q)
    return np.eye(gen.dimension) + gen.dense() / q


def _sparse_diag(values: np.ndarray):
    dim = len(values)
    idx = np.arange(dim)
    return sparse.csr_array(sparse.coo_array((values, (idx, idx)), shape=(dim, dim)))


def _checked_distribution(initial, dim: int) -> np.ndarray:
    arr = np.asarray(initial, dtype=float).ravel()
    if arr.size != dim:
        raise ValueError(f"distribution has {arr.size} entries, chain has {dim} states")
    if (arr < 0).any():
        raise ValueError("distribution entries must be nonnegative")
    if abs(arr.sum() - 1.0) > 1e-12:
        raise ValueError(f"distribution must sum to 1, got {arr.sum()!r}")
    return arr


def _poisson_weights(qt: float, eps: float) -> tuple[np.ndarray, float]:
    """Poisson(qt) pmf values 0..N_c with tail mass at most eps."""
    # Chebyshev-style overshoot past the mean keeps the first guess cheap
    # while the loop below guarantees the bound.
    guess = int(qt + 12.0 * math.sqrt(qt + 1.0) + 50.0)
    while True:
        if guess > _MAX_TRUNCATION:
            raise TruncationError(
                f"truncation level beyond {_MAX_TRUNCATION} needed for tail <= {eps}"
            )
        levels = np.arange(guess + 1)
        log_w = -qt + levels * math.log(qt) - gammaln(levels + 1.0)
        weights = np.exp(log_w)
        cum = np.cumsum(weights)
        hit = np.searchsorted(cum, 1.0 - eps)
        if hit < len(cum):
            n_c = int(hit)
            return weights[: n_c + 1], float(max(0.0, 1.0 - cum[n_c]))
        guess *= 2
