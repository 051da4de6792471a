"""Likelihood-ratio tests for normal-model hypotheses, ANOVA, variance-ratio
tests, and empirical validation of the chi-squared asymptotics of the
log-likelihood-ratio statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .distributions import ChiSquared, DistributionSpec, FisherF, dist_cdf
from .errors import DegenerateSampleError, DomainError, NestingError
from .results import TestReport
from .rng import RandomStream, stream_split

__all__ = [
    "TestReport", "ks_statistic", "lrt_mean", "f_test_variances",
    "anova_one_way", "lrt_generic", "wilks_null_simulation", "WilksSimulation",
    "load_groups_csv",
]


def load_groups_csv(path) -> list:
    """Observations as ``group,value`` rows with a header line; returns one
    array per group, ordered by first appearance."""
    groups: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "group":
            raise DomainError("first CSV column must be named 'group'")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            label, value = line.split(",", 1)
            groups.setdefault(label, []).append(float(value))
    return [np.asarray(v) for v in groups.values()]


def ks_statistic(sample, law: Union[DistributionSpec, Callable]) -> float:
    """One-sample Kolmogorov-Smirnov distance to a continuous law."""
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise DegenerateSampleError("empty sample")
    cdf = law if callable(law) else (lambda t: dist_cdf(law, t))
    f = np.asarray(cdf(x), dtype=float)
    steps = np.arange(1, n + 1) / n
    return float(max(np.max(steps - f), np.max(f - (steps - 1.0 / n))))


def _upper_tail(null_law: DistributionSpec, statistic: float) -> float:
    return float(1.0 - dist_cdf(null_law, statistic))


def lrt_mean(sample, mu0: float, sigma_known: float | None = None) -> TestReport:
    """Two-sided test of a normal mean.

    With ``sigma_known`` the squared standardized mean is referred to a
    chi-squared with one degree of freedom (exactly, not asymptotically).
    Otherwise the squared studentized mean is referred to F(1, n-1); the
    equivalent monotone log-ratio value ``h`` is reported alongside.
    """
    x = np.asarray(sample, dtype=float)
    n = x.size
    if sigma_known is not None:
        if n < 1:
            raise DegenerateSampleError("need at least one observation")
        if sigma_known <= 0:
            raise DomainError("known sigma must be positive")
        z = (x.mean() - mu0) / (sigma_known / math.sqrt(n))
        stat = z * z
        null_law = ChiSquared(1)
        return TestReport(stat, null_law, _upper_tail(null_law, stat),
                          kind="mean_z_squared", extras={"z": float(z)})
    if n < 2:
        raise DegenerateSampleError("studentized test needs n >= 2")
    sd = x.std(ddof=1)
    if sd == 0.0:
        raise DegenerateSampleError("zero sample standard deviation")
    t = (x.mean() - mu0) / (sd / math.sqrt(n))
    stat = t * t
    null_law = FisherF(1, n - 1)
    h = n * math.log1p(stat / (n - 1))
    return TestReport(stat, null_law, _upper_tail(null_law, stat),
                      kind="mean_t_squared", extras={"t": float(t), "h": h})


def f_test_variances(sample_x, sample_y) -> TestReport:
    """Equal-tailed two-sided test of equality of two normal variances."""
    x = np.asarray(sample_x, dtype=float)
    y = np.asarray(sample_y, dtype=float)
    if x.size < 2 or y.size < 2:
        raise DegenerateSampleError("both samples need at least two points")
    vx, vy = x.var(ddof=1), y.var(ddof=1)
    if vx == 0.0 or vy == 0.0:
        raise DegenerateSampleError("zero sample variance")
    stat = vx / vy
    null_law = FisherF(x.size - 1, y.size - 1)
    lower = float(dist_cdf(null_law, stat))
    p = min(1.0, 2.0 * min(lower, 1.0 - lower))
    return TestReport(stat, null_law, p, kind="variance_ratio_two_sided")


def anova_one_way(groups: Sequence) -> TestReport:
    """Equality of several normal means under a shared variance.

    Accepts two groups as well, where the statistic reduces to the square
    of the pooled two-sample t statistic.
    """
    arrays = [np.asarray(g, dtype=float) for g in groups]
    p = len(arrays)
    if p < 2:
        raise DomainError("need at least two groups")
    if any(a.size < 1 for a in arrays):
        raise DegenerateSampleError("every group needs at least one observation")
    n = sum(a.size for a in arrays)
    if n <= p:
        raise DegenerateSampleError("within-group degrees of freedom exhausted")
    grand = sum(a.sum() for a in arrays) / n
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    ss_between = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_total = sum(float(((a - grand) ** 2).sum()) for a in arrays)
    if ss_within == 0.0:
        raise DegenerateSampleError("no within-group variation")
    stat = (ss_between / (p - 1)) / (ss_within / (n - p))
    null_law = FisherF(p - 1, n - p)
    return TestReport(stat, null_law, _upper_tail(null_law, stat),
                      kind="anova_one_way",
                      extras={"ss_total": ss_total, "ss_within": ss_within,
                              "ss_between": float(ss_between)})


def lrt_generic(loglik_full: float, loglik_null: float, df_diff: int) -> TestReport:
    """Twice the log-likelihood gap of nested fits against chi-squared."""
    if df_diff < 1:
        raise DomainError("degrees-of-freedom difference must be >= 1")
    gap = loglik_full - loglik_null
    if gap < -1e-8:
        raise NestingError(
            f"full log-likelihood below null by {-gap:.3e}; models are not nested"
        )
    stat = max(0.0, 2.0 * gap)
    null_law = ChiSquared(df_diff)
    return TestReport(stat, null_law, _upper_tail(null_law, stat),
                      kind="likelihood_ratio")


@dataclass(frozen=True)
class WilksSimulation:
    ks_distance: float
    qq_table: np.ndarray  # columns: level, empirical quantile, reference quantile
    df: int


_QQ_LEVELS = np.arange(1, 20) / 20.0


def wilks_null_simulation(scenario: str, n: int, replicates: int,
                          stream: RandomStream) -> WilksSimulation:
    """Distribution of the log-likelihood-ratio statistic under a simulated
    null, compared with its limiting chi-squared law.

    Scenarios: ``"z"`` (normal mean, variance known; the statistic is
    exactly chi-squared), ``"t"`` (normal mean, variance unknown), and
    ``"logistic"`` (two true-zero slopes dropped from a logistic fit).
    """
    if replicates < 100:
        raise DomainError("need at least 100 replicates")
    if scenario == "z":
        stats = _simulate_z(n, replicates, stream)
        df = 1
    elif scenario == "t":
        stats = _simulate_t(n, replicates, stream)
        df = 1
    elif scenario == "logistic":
        stats = _simulate_logistic_gap(n, replicates, stream)
        df = 2
    else:
        raise DomainError(f"unknown scenario {scenario!r}")
    law = ChiSquared(df)
    ks = ks_statistic(stats, law)
    from .distributions import dist_quantile

    empirical = np.quantile(stats, _QQ_LEVELS)
    reference = np.array([dist_quantile(law, u) for u in _QQ_LEVELS])
    table = np.column_stack([_QQ_LEVELS, empirical, reference])
    return WilksSimulation(ks_distance=ks, qq_table=table, df=df)


def _simulate_z(n: int, replicates: int, stream: RandomStream) -> np.ndarray:
    if n < 1:
        raise DomainError("n must be >= 1")
    stats = np.empty(replicates)
    chunk = max(1, (1 << 22) // n)
    for start in range(0, replicates, chunk):
        stop = min(start + chunk, replicates)
        sub = stream_split(stream, start)
        x = sub.normals((stop - start) * n).reshape(stop - start, n)
        stats[start:stop] = n * x.mean(axis=1) ** 2
    return stats


def _simulate_t(n: int, replicates: int, stream: RandomStream) -> np.ndarray:
    if n < 2:
        raise DomainError("n must be >= 2")
    stats = np.empty(replicates)
    chunk = max(1, (1 << 22) // n)
    for start in range(0, replicates, chunk):
        stop = min(start + chunk, replicates)
        sub = stream_split(stream, start)
        x = sub.normals((stop - start) * n).reshape(stop - start, n)
        t2 = n * x.mean(axis=1) ** 2 / x.var(axis=1, ddof=1)
        stats[start:stop] = n * np.log1p(t2 / (n - 1))
    return stats


def _simulate_logistic_gap(n: int, replicates: int, stream: RandomStream) -> np.ndarray:
    from .glm import bernoulli_logit, glm_fit
    from .regression import design_matrix

    beta_true = np.array([0.3, 0.5, 0.0, 0.0])
    spec = bernoulli_logit()
    stats = np.empty(replicates)
    for r in range(replicates):
        sub = stream_split(stream, r)
        covariates = sub.normals(n * 3).reshape(n, 3)
        design_full = design_matrix(covariates)
        eta = design_full.matrix @ beta_true
        prob = 1.0 / (1.0 + np.exp(-eta))
        y = (sub.uniforms(n) < prob).astype(float)
        full = glm_fit(spec, design_full, y)
        null = glm_fit(spec, design_matrix(covariates[:, :1]), y)
        stats[r] = lrt_generic(full.log_likelihood, null.log_likelihood, 2).statistic
    return stats
