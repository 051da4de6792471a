"""Tail-bound calculators, empirical tail verification, random projection,
and Erdos-Renyi random-graph experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .distributions import DistributionSpec, dist_sample
from .errors import DomainError
from .rng import RandomStream

__all__ = [
    "Markov", "Chebyshev", "SubGaussian", "SubExponential",
    "ChiSquaredRelative", "ChernoffBinomial", "TailBound", "tail_bound",
    "EmpiricalTail", "empirical_tail",
    "JLConfig", "jl_target_dim", "jl_project", "JLTrialResult", "jl_trial",
    "ErdosRenyiGraph", "er_sample", "ErMetrics", "er_metrics",
    "regular_degree_constant", "load_points_csv", "write_graph_csv",
]


# -- closed-form tail bounds ---------------------------------------------------


@dataclass(frozen=True)
class Markov:
    mean: float

    def __post_init__(self):
        if self.mean <= 0:
            raise DomainError("Markov bound needs a positive mean")

    def raw(self, t: float) -> float:
        return self.mean / t


@dataclass(frozen=True)
class Chebyshev:
    variance: float

    def __post_init__(self):
        if self.variance <= 0:
            raise DomainError("Chebyshev bound needs a positive variance")

    def raw(self, t: float) -> float:
        return self.variance / t ** 2


@dataclass(frozen=True)
class SubGaussian:
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sub-Gaussian parameter must be positive")

    def raw(self, t: float) -> float:
        return 2.0 * math.exp(-t * t / (2.0 * self.sigma ** 2))


@dataclass(frozen=True)
class SubExponential:
    nu: float
    beta: float

    def __post_init__(self):
        if self.nu <= 0 or self.beta <= 0:
            raise DomainError("sub-exponential parameters must be positive")

    def raw(self, t: float) -> float:
        # Gaussian branch for small deviations, exponential branch past nu^2/beta.
        if t < self.nu ** 2 / self.beta:
            return 2.0 * math.exp(-t * t / (2.0 * self.nu ** 2))
        return 2.0 * math.exp(-t / (2.0 * self.beta))


@dataclass(frozen=True)
class ChiSquaredRelative:
    """Deviation of a chi-squared variable from its mean, per degree of freedom."""

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise DomainError("degrees of freedom must be >= 1")

    def raw(self, t: float) -> float:
        if t < 1.0:
            return 2.0 * math.exp(-self.k * t * t / 8.0)
        return 2.0 * math.exp(-self.k * t / 8.0)


@dataclass(frozen=True)
class ChernoffBinomial:
    """Multiplicative deviation of a binomial/Poisson count from its mean lam.

    ``t`` is the absolute deviation; the bound applies for t < lam.
    """

    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("mean count must be positive")

    def raw(self, t: float) -> float:
        eps = t / self.lam
        if eps >= 1.0:
            raise DomainError("Chernoff branch requires t < lam")
        return 2.0 * math.exp(-eps * eps * self.lam / 3.0)


TailBoundKind = Union[Markov, Chebyshev, SubGaussian, SubExponential,
                      ChiSquaredRelative, ChernoffBinomial]


@dataclass(frozen=True)
class TailBound:
    raw: float
    clamped: float


def tail_bound(kind: TailBoundKind, t: float) -> TailBound:
    """Closed-form tail probability bound at deviation ``t`` > 0.

    ``raw`` is the formula value (possibly > 1); ``clamped`` caps it at 1 so
    it can be read as a probability.
    """
    if t <= 0:
        raise DomainError("deviation t must be positive")
    raw = kind.raw(float(t))
    return TailBound(raw=raw, clamped=min(1.0, raw))


# -- empirical tails -----------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalTail:
    t_grid: np.ndarray
    frequency: np.ndarray
    standard_error: np.ndarray
    n_samples: int


_TAIL_CHUNK = 1 << 20


def empirical_tail(
    spec: Union[DistributionSpec, Sequence[DistributionSpec]],
    center: float,
    t_grid,
    n_samples: int,
    stream: RandomStream,
) -> EmpiricalTail:
    """Frequency of ``|X - center| >= t`` per grid point.

    ``spec`` may be a sequence of specs, in which case X is the sum of one
    independent draw from each.
    """
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    t_grid = np.sort(np.asarray(t_grid, dtype=float))
    specs = [spec] if isinstance(spec, DistributionSpec) else list(spec)
    counts = np.zeros(t_grid.size, dtype=np.int64)
    done = 0
    while done < n_samples:
        take = min(_TAIL_CHUNK, n_samples - done)
        x = np.zeros(take)
        for s in specs:
            x += dist_sample(s, stream, take)
        dev = np.sort(np.abs(x - center))
        # count of dev >= t for each t
        counts += take - np.searchsorted(dev, t_grid, side="left")
        done += take
    freq = counts / n_samples
    se = np.sqrt(freq * (1.0 - freq) / n_samples)
    return EmpiricalTail(t_grid=t_grid, frequency=freq, standard_error=se,
                         n_samples=n_samples)


# -- Johnson-Lindenstrauss ------------------------------------------------------


def jl_target_dim(n: int, epsilon: float, delta: float) -> int:
    """Smallest projection dimension with all-pairs distortion guarantee.

    Solves ``n (n-1) exp(-m eps^2 / 8) = delta`` for m and rounds up.
    """
    if n < 2:
        raise DomainError("need at least two points")
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise DomainError("epsilon and delta must lie in (0, 1)")
    m = (8.0 / epsilon ** 2) * math.log(n * (n - 1) / delta)
    return max(1, math.ceil(m))


@dataclass(frozen=True)
class JLConfig:
    n_points: int
    ambient_dim: int
    epsilon: float
    delta: float
    m: int = field(init=False)

    def __post_init__(self):
        if self.ambient_dim < 1:
            raise DomainError("ambient dimension must be >= 1")
        object.__setattr__(self, "m", jl_target_dim(self.n_points, self.epsilon, self.delta))


def jl_projection_matrix(ambient_dim: int, m: int, stream: RandomStream) -> np.ndarray:
    """The random linear map as an (m, ambient_dim) matrix, scaled by 1/sqrt(m)."""
    if m < 1 or ambient_dim < 1:
        raise DomainError("dimensions must be >= 1")
    a = stream.normals(m * ambient_dim).reshape(m, ambient_dim)
    return a / math.sqrt(m)


def jl_project(points: np.ndarray, m: int, stream: RandomStream) -> np.ndarray:
    """Project each row of ``points`` through one random Gaussian map."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    f = jl_projection_matrix(points.shape[1], m, stream)
    return points @ f.T


@dataclass(frozen=True)
class JLTrialResult:
    max_distortion: float
    success: bool
    skipped_pairs: int


def jl_trial(config: JLConfig, stream: RandomStream, points: np.ndarray | None = None) -> JLTrialResult:
    """One projection of a point cloud; success iff every pairwise squared
    distance ratio lies in [1 - eps, 1 + eps]. Coincident pairs carry no
    constraint and are skipped (counted in ``skipped_pairs``)."""
    if points is None:
        points = stream.normals(config.n_points * config.ambient_dim)
        points = points.reshape(config.n_points, config.ambient_dim)
    else:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[0] != config.n_points:
            raise DomainError("point count does not match the configuration")
    projected = jl_project(points, config.m, stream)
    iu = np.triu_indices(config.n_points, k=1)
    before = ((points[iu[0]] - points[iu[1]]) ** 2).sum(axis=1)
    after = ((projected[iu[0]] - projected[iu[1]]) ** 2).sum(axis=1)
    nonzero = before > 0.0
    skipped = int(np.size(before) - np.count_nonzero(nonzero))
    if not np.any(nonzero):
        return JLTrialResult(max_distortion=0.0, success=True, skipped_pairs=skipped)
    ratio = after[nonzero] / before[nonzero]
    max_distortion = float(np.max(np.abs(ratio - 1.0)))
    return JLTrialResult(
        max_distortion=max_distortion,
        success=bool(max_distortion <= config.epsilon),
        skipped_pairs=skipped,
    )


# -- Erdos-Renyi graphs ---------------------------------------------------------


@dataclass(frozen=True)
class ErdosRenyiGraph:
    n_vertices: int
    p: float
    edges: np.ndarray  # (m, 2) int array, each row i < j

    def __post_init__(self):
        e = self.edges
        if e.size and (np.any(e[:, 0] >= e[:, 1]) or np.any(e < 0) or np.any(e >= self.n_vertices)):
            raise DomainError("edge list must hold ordered pairs of distinct vertices")


@lru_cache(maxsize=4)
def _potential_edges(n_vertices: int) -> tuple[np.ndarray, np.ndarray]:
    iu = np.triu_indices(n_vertices, k=1)
    return iu[0].astype(np.int64), iu[1].astype(np.int64)


def er_sample(n_vertices: int, p: float, stream: RandomStream) -> ErdosRenyiGraph:
    """Include each of the n(n-1)/2 potential edges independently with
    probability p, iterating pairs in lexicographic order."""
    if n_vertices < 2:
        raise DomainError("need at least two vertices")
    if not 0.0 <= p <= 1.0:
        raise DomainError("edge probability must lie in [0, 1]")
    rows, cols = _potential_edges(n_vertices)
    keep = stream.uniforms(rows.size) < p
    edges = np.column_stack([rows[keep], cols[keep]])
    return ErdosRenyiGraph(n_vertices=n_vertices, p=p, edges=edges)


@dataclass(frozen=True)
class ErMetrics:
    edge_count: int
    degree_sequence: np.ndarray
    mean_degree: float
    is_connected: bool


def er_metrics(graph: ErdosRenyiGraph) -> ErMetrics:
    n = graph.n_vertices
    edges = graph.edges
    degrees = np.bincount(edges.ravel(), minlength=n) if edges.size else np.zeros(n, dtype=np.int64)
    return ErMetrics(
        edge_count=int(edges.shape[0]),
        degree_sequence=degrees,
        mean_degree=float(degrees.mean()),
        is_connected=_connected(n, edges),
    )


def _connected(n: int, edges: np.ndarray) -> bool:
    if n <= 1:
        return True
    if edges.shape[0] < n - 1:
        return False
    # breadth-first traversal, expanding whole frontiers at once
    heads = np.concatenate([edges[:, 0], edges[:, 1]])
    tails = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.argsort(heads, kind="stable")
    tails = tails[order]
    starts = np.searchsorted(heads[order], np.arange(n + 1))
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    frontier = np.array([0])
    seen = 1
    while frontier.size and seen < n:
        neighbors = np.concatenate([tails[starts[v]:starts[v + 1]] for v in frontier])
        fresh = np.unique(neighbors[~visited[neighbors]])
        visited[fresh] = True
        seen += fresh.size
        frontier = fresh
    return seen == n


def regular_degree_constant(epsilon: float, delta: float) -> float:
    """Degree threshold multiplier C so that mean degree >= C ln N makes
    all vertex degrees stay within a factor (1 +- epsilon) of the mean
    with probability at least 1 - delta."""
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise DomainError("epsilon and delta must lie in (0, 1)")
    return 3.0 * math.log(4.0 / delta) / (epsilon ** 2 * math.log(2.0))


# -- CSV interfaces --------------------------------------------------------------


def load_points_csv(path) -> np.ndarray:
    """Point cloud with one row per point, comma separated."""
    return np.atleast_2d(np.loadtxt(path, delimiter=",", dtype=float))


def write_graph_csv(graph: ErdosRenyiGraph, path) -> None:
    """Edge list preceded by a single ``N,p`` header line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{graph.n_vertices},{graph.p}\n")
        for i, j in graph.edges:
            fh.write(f"{i},{j}\n")


def read_graph_csv(path) -> ErdosRenyiGraph:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip().split(",")
        n_vertices, p = int(first[0]), float(first[1])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    edges = np.array([[int(a), int(b)] for a, b in rows], dtype=np.int64)
    if edges.size == 0:
        edges = edges.reshape(0, 2)
    return ErdosRenyiGraph(n_vertices=n_vertices, p=p, edges=edges)
