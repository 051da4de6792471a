"""Parameterized univariate distributions.

Each spec is an immutable tagged value carrying its parameters; the module
functions ``dist_pdf``/``dist_cdf``/``dist_quantile``/``dist_moments``/
``dist_sample`` dispatch on the spec. Densities follow the convention of
being 0 outside the support (never an error). Sampling is driven entirely
by a :class:`~statforge.rng.RandomStream`, so every draw sequence is a pure
function of (root_seed, stream_id, counter).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import special as sp

from .errors import DomainError, UndefinedMomentError
from .rng import RandomStream

__all__ = [
    "Normal", "LogNormal", "Gamma", "ChiSquared", "StudentT", "FisherF",
    "Beta", "Exponential", "Bernoulli", "Binomial", "Poisson", "Geometric",
    "Uniform01", "DistributionSpec", "Moments",
    "dist_moments", "dist_pdf", "dist_cdf", "dist_quantile", "dist_sample",
]

_QUANTILE_TOL = 1e-12


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DomainError(message)


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _maybe_scalar(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


class _Spec:
    """Common machinery; concrete families fill in the private hooks."""

    is_discrete = False

    def moments(self) -> Moments:
        raise NotImplementedError

    def pdf(self, x):
        arr, scalar = _as_array(x)
        return _maybe_scalar(self._pdf(arr), scalar)

    def cdf(self, x):
        arr, scalar = _as_array(x)
        return _maybe_scalar(self._cdf(arr), scalar)

    def quantile(self, u):
        arr, scalar = _as_array(u)
        if np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise DomainError("quantile argument must lie strictly inside (0, 1)")
        if self.is_discrete:
            values = np.array([self._discrete_quantile(ui) for ui in arr], dtype=float)
        else:
            values = np.array([self._invert_cdf(ui) for ui in arr], dtype=float)
        return _maybe_scalar(values, scalar)

    def sample(self, stream: RandomStream, count: int) -> np.ndarray:
        if count < 0:
            raise DomainError("sample count must be nonnegative")
        return self._sample(stream, count)

    # hooks ---------------------------------------------------------------

    def _pdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _sample(self, stream: RandomStream, count: int) -> np.ndarray:
        raise NotImplementedError

    def _support(self) -> tuple[float, float]:
        """Open interval carrying all mass (continuous families)."""
        raise NotImplementedError

    # generic continuous quantile: bracket, bisect, polish with Newton ----

    def _invert_cdf(self, u: float) -> float:
        lo, hi = self._bracket(u)
        for _ in range(120):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            if float(self._cdf(np.array([mid]))[0]) < u:
                lo = mid
            else:
                hi = mid
        q = 0.5 * (lo + hi)
        for _ in range(4):
            density = float(self._pdf(np.array([q]))[0])
            if density <= 0.0 or not math.isfinite(density):
                break
            step = (u - float(self._cdf(np.array([q]))[0])) / density
            candidate = q + step
            if not lo <= candidate <= hi:
                break
            q = candidate
            if abs(step) < _QUANTILE_TOL * (1.0 + abs(q)):
                break
        return q

    def _bracket(self, u: float) -> tuple[float, float]:
        lo, hi = self._support()
        if math.isinf(lo):
            lo = -1.0
            while float(self._cdf(np.array([lo]))[0]) >= u:
                lo *= 2.0
        if math.isinf(hi):
            hi = 1.0
            while float(self._cdf(np.array([hi]))[0]) < u:
                hi *= 2.0
        return lo, hi

    def _discrete_quantile(self, u: float) -> int:
        lo = self._support_min() - 1  # cdf(lo) = 0 by convention
        hi = self._support_min()
        while float(self._cdf(np.array([float(hi)]))[0]) < u:
            lo = hi
            hi = 2 * hi + 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if float(self._cdf(np.array([float(mid)]))[0]) < u:
                lo = mid
            else:
                hi = mid
        return hi

    def _support_min(self) -> int:
        return 0


DistributionSpec = _Spec


# -- continuous families ----------------------------------------------------


@dataclass(frozen=True)
class Normal(_Spec):
    mu: float
    sigma2: float

    def __post_init__(self):
        _require(self.sigma2 > 0, "Normal requires sigma2 > 0")

    def moments(self) -> Moments:
        return Moments(self.mu, self.sigma2)

    def _pdf(self, x):
        sd = math.sqrt(self.sigma2)
        z = (x - self.mu) / sd
        return np.exp(-0.5 * z * z) / (sd * math.sqrt(2.0 * math.pi))

    def _cdf(self, x):
        return sp.ndtr((x - self.mu) / math.sqrt(self.sigma2))

    def _support(self):
        return (-math.inf, math.inf)

    def _sample(self, stream, count):
        return self.mu + math.sqrt(self.sigma2) * stream.normals(count)


@dataclass(frozen=True)
class LogNormal(_Spec):
    mu: float
    sigma2: float

    def __post_init__(self):
        _require(self.sigma2 > 0, "LogNormal requires sigma2 > 0")

    def moments(self) -> Moments:
        mean = math.exp(self.mu + 0.5 * self.sigma2)
        var = (math.exp(self.sigma2) - 1.0) * math.exp(2.0 * self.mu + self.sigma2)
        return Moments(mean, var)

    def _pdf(self, x):
        sd = math.sqrt(self.sigma2)
        out = np.zeros_like(x)
        pos = x > 0.0
        z = (np.log(x[pos]) - self.mu) / sd
        out[pos] = np.exp(-0.5 * z * z) / (x[pos] * sd * math.sqrt(2.0 * math.pi))
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = sp.ndtr((np.log(x[pos]) - self.mu) / math.sqrt(self.sigma2))
        return out

    def _support(self):
        return (0.0, math.inf)

    def _sample(self, stream, count):
        return np.exp(self.mu + math.sqrt(self.sigma2) * stream.normals(count))


@dataclass(frozen=True)
class Gamma(_Spec):
    """Gamma law with inverse-scale (rate) ``alpha`` and shape ``lam``."""

    alpha: float
    lam: float

    def __post_init__(self):
        _require(self.alpha > 0, "Gamma requires rate alpha > 0")
        _require(self.lam > 0, "Gamma requires shape lam > 0")

    def moments(self) -> Moments:
        return Moments(self.lam / self.alpha, self.lam / self.alpha ** 2)

    def _pdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0.0
        log_pdf = (
            self.lam * math.log(self.alpha)
            - sp.gammaln(self.lam)
            + (self.lam - 1.0) * np.log(x[pos])
            - self.alpha * x[pos]
        )
        out[pos] = np.exp(log_pdf)
        at_zero = x == 0.0
        if np.any(at_zero):
            if self.lam == 1.0:
                out[at_zero] = self.alpha
            elif self.lam < 1.0:
                out[at_zero] = np.inf
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        pos = x > 0.0
        out[pos] = sp.gammainc(self.lam, self.alpha * x[pos])
        return out

    def _support(self):
        return (0.0, math.inf)

    def _sample(self, stream, count):
        return _standard_gamma(stream, self.lam, count) / self.alpha


@dataclass(frozen=True)
class ChiSquared(_Spec):
    k: int

    def __post_init__(self):
        _require(isinstance(self.k, (int, np.integer)) and self.k >= 1,
                 "ChiSquared requires a positive integer k")

    def _as_gamma(self) -> Gamma:
        return Gamma(alpha=0.5, lam=self.k / 2.0)

    def moments(self) -> Moments:
        return Moments(float(self.k), 2.0 * self.k)

    def _pdf(self, x):
        return self._as_gamma()._pdf(x)

    def _cdf(self, x):
        return self._as_gamma()._cdf(x)

    def _support(self):
        return (0.0, math.inf)

    def _sample(self, stream, count):
        return 2.0 * _standard_gamma(stream, self.k / 2.0, count)


@dataclass(frozen=True)
class StudentT(_Spec):
    k: int

    def __post_init__(self):
        _require(isinstance(self.k, (int, np.integer)) and self.k >= 1,
                 "StudentT requires a positive integer k")

    def moments(self) -> Moments:
        if self.k < 2:
            raise UndefinedMomentError("StudentT mean undefined for k < 2")
        if self.k < 3:
            raise UndefinedMomentError("StudentT variance undefined for k < 3")
        return Moments(0.0, self.k / (self.k - 2.0))

    def _pdf(self, x):
        k = float(self.k)
        log_c = sp.gammaln((k + 1.0) / 2.0) - sp.gammaln(k / 2.0) - 0.5 * math.log(k * math.pi)
        return np.exp(log_c - 0.5 * (k + 1.0) * np.log1p(x * x / k))

    def _cdf(self, x):
        k = float(self.k)
        tail = 0.5 * sp.betainc(k / 2.0, 0.5, k / (k + x * x))
        return np.where(x >= 0.0, 1.0 - tail, tail)

    def _support(self):
        return (-math.inf, math.inf)

    def _sample(self, stream, count):
        z = stream.normals(count)
        w = 2.0 * _standard_gamma(stream, self.k / 2.0, count)
        return z / np.sqrt(w / self.k)


@dataclass(frozen=True)
class FisherF(_Spec):
    k1: int
    k2: int

    def __post_init__(self):
        ok = all(isinstance(k, (int, np.integer)) and k >= 1 for k in (self.k1, self.k2))
        _require(ok, "FisherF requires positive integer degrees of freedom")

    def moments(self) -> Moments:
        if self.k2 <= 2:
            raise UndefinedMomentError("FisherF mean undefined for k2 <= 2")
        if self.k2 <= 4:
            raise UndefinedMomentError("FisherF variance undefined for k2 <= 4")
        k1, k2 = float(self.k1), float(self.k2)
        mean = k2 / (k2 - 2.0)
        var = 2.0 * k2 ** 2 * (k1 + k2 - 2.0) / (k1 * (k2 - 2.0) ** 2 * (k2 - 4.0))
        return Moments(mean, var)

    def _pdf(self, x):
        k1, k2 = float(self.k1), float(self.k2)
        out = np.zeros_like(x)
        pos = x > 0.0
        log_c = (
            sp.gammaln((k1 + k2) / 2.0) - sp.gammaln(k1 / 2.0) - sp.gammaln(k2 / 2.0)
            + (k1 / 2.0) * math.log(k1 / k2)
        )
        out[pos] = np.exp(
            log_c + (k1 / 2.0 - 1.0) * np.log(x[pos])
            - ((k1 + k2) / 2.0) * np.log1p(k1 * x[pos] / k2)
        )
        return out

    def _cdf(self, x):
        k1, k2 = float(self.k1), float(self.k2)
        out = np.zeros_like(x)
        pos = x > 0.0
        ratio = k1 * x[pos]
        out[pos] = sp.betainc(k1 / 2.0, k2 / 2.0, ratio / (ratio + k2))
        return out

    def _support(self):
        return (0.0, math.inf)

    def _sample(self, stream, count):
        w1 = 2.0 * _standard_gamma(stream, self.k1 / 2.0, count)
        w2 = 2.0 * _standard_gamma(stream, self.k2 / 2.0, count)
        return (w1 / self.k1) / (w2 / self.k2)


@dataclass(frozen=True)
class Beta(_Spec):
    alpha: float
    beta: float

    def __post_init__(self):
        _require(self.alpha > 0 and self.beta > 0, "Beta requires positive shapes")

    def moments(self) -> Moments:
        a, b = self.alpha, self.beta
        return Moments(a / (a + b), a * b / ((a + b) ** 2 * (a + b + 1.0)))

    def _pdf(self, x):
        a, b = self.alpha, self.beta
        out = np.zeros_like(x)
        inside = (x > 0.0) & (x < 1.0)
        log_c = sp.gammaln(a + b) - sp.gammaln(a) - sp.gammaln(b)
        out[inside] = np.exp(
            log_c + (a - 1.0) * np.log(x[inside]) + (b - 1.0) * np.log1p(-x[inside])
        )
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        out[x >= 1.0] = 1.0
        inside = (x > 0.0) & (x < 1.0)
        out[inside] = sp.betainc(self.alpha, self.beta, x[inside])
        return out

    def _support(self):
        return (0.0, 1.0)

    def _sample(self, stream, count):
        ga = _standard_gamma(stream, self.alpha, count)
        gb = _standard_gamma(stream, self.beta, count)
        return ga / (ga + gb)


@dataclass(frozen=True)
class Exponential(_Spec):
    lam: float

    def __post_init__(self):
        _require(self.lam > 0, "Exponential requires lam > 0")

    def moments(self) -> Moments:
        return Moments(1.0 / self.lam, 1.0 / self.lam ** 2)

    def _pdf(self, x):
        out = np.zeros_like(x)
        on = x >= 0.0
        out[on] = self.lam * np.exp(-self.lam * x[on])
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        on = x >= 0.0
        out[on] = -np.expm1(-self.lam * x[on])
        return out

    def _support(self):
        return (0.0, math.inf)

    def _invert_cdf(self, u):
        return -math.log1p(-u) / self.lam

    def _sample(self, stream, count):
        return -np.log(stream.uniforms_open(count)) / self.lam


@dataclass(frozen=True)
class Uniform01(_Spec):

    def moments(self) -> Moments:
        return Moments(0.5, 1.0 / 12.0)

    def _pdf(self, x):
        return np.where((x >= 0.0) & (x <= 1.0), 1.0, 0.0)

    def _cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def _support(self):
        return (0.0, 1.0)

    def _invert_cdf(self, u):
        return u

    def _sample(self, stream, count):
        return stream.uniforms(count)


# -- discrete families -------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli(_Spec):
    p: float
    is_discrete = True

    def __post_init__(self):
        _require(0.0 < self.p < 1.0, "Bernoulli requires p in (0,1)")

    def moments(self) -> Moments:
        return Moments(self.p, self.p * (1.0 - self.p))

    def _pdf(self, x):
        out = np.zeros_like(x)
        out[x == 0.0] = 1.0 - self.p
        out[x == 1.0] = self.p
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        out[x >= 0.0] = 1.0 - self.p
        out[x >= 1.0] = 1.0
        return out

    def _sample(self, stream, count):
        return (stream.uniforms(count) < self.p).astype(float)


@dataclass(frozen=True)
class Binomial(_Spec):
    p: float
    n: int
    is_discrete = True

    def __post_init__(self):
        _require(0.0 < self.p < 1.0, "Binomial requires p in (0,1)")
        _require(isinstance(self.n, (int, np.integer)) and self.n >= 1,
                 "Binomial requires a positive integer n")

    def moments(self) -> Moments:
        return Moments(self.n * self.p, self.n * self.p * (1.0 - self.p))

    def _pdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        on = (x == k) & (k >= 0) & (k <= self.n)
        kk = k[on]
        log_pmf = (
            sp.gammaln(self.n + 1.0) - sp.gammaln(kk + 1.0) - sp.gammaln(self.n - kk + 1.0)
            + kk * math.log(self.p) + (self.n - kk) * math.log1p(-self.p)
        )
        out[on] = np.exp(log_pmf)
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        out[k >= self.n] = 1.0
        mid = (k >= 0) & (k < self.n)
        kk = k[mid]
        out[mid] = sp.betainc(self.n - kk, kk + 1.0, 1.0 - self.p)
        return out

    def _sample(self, stream, count):
        out = np.zeros(count)
        chunk = max(1, (1 << 24) // max(1, self.n))
        for start in range(0, count, chunk):
            stop = min(start + chunk, count)
            u = stream.uniforms((stop - start) * self.n)
            out[start:stop] = (u.reshape(stop - start, self.n) < self.p).sum(axis=1)
        return out


@dataclass(frozen=True)
class Poisson(_Spec):
    lam: float
    is_discrete = True

    def __post_init__(self):
        _require(self.lam > 0, "Poisson requires lam > 0")

    def moments(self) -> Moments:
        return Moments(self.lam, self.lam)

    def _pdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        on = (x == k) & (k >= 0)
        kk = k[on]
        out[on] = np.exp(kk * math.log(self.lam) - self.lam - sp.gammaln(kk + 1.0))
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        on = k >= 0
        out[on] = sp.gammaincc(k[on] + 1.0, self.lam)
        return out

    def _sample(self, stream, count):
        if self.lam <= 30.0:
            return _poisson_inversion(stream, self.lam, count)
        return _poisson_ptrs(stream, self.lam, count)


@dataclass(frozen=True)
class Geometric(_Spec):
    """Number of Bernoulli trials up to and including the first success."""

    p: float
    is_discrete = True

    def __post_init__(self):
        _require(0.0 < self.p < 1.0, "Geometric requires p in (0,1)")

    def moments(self) -> Moments:
        return Moments(1.0 / self.p, (1.0 - self.p) / self.p ** 2)

    def _pdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        on = (x == k) & (k >= 1)
        out[on] = np.exp((k[on] - 1.0) * math.log1p(-self.p)) * self.p
        return out

    def _cdf(self, x):
        out = np.zeros_like(x)
        k = np.floor(x)
        on = k >= 1
        out[on] = -np.expm1(k[on] * math.log1p(-self.p))
        return out

    def _support_min(self):
        return 1

    def _sample(self, stream, count):
        u = stream.uniforms_open(count)
        draws = np.ceil(np.log(u) / math.log1p(-self.p))
        return np.maximum(draws, 1.0)


# -- samplers shared between families ----------------------------------------


def _standard_gamma(stream: RandomStream, shape: float, count: int) -> np.ndarray:
    """Unit-rate gamma draws; Marsaglia-Tsang squeeze for any shape."""
    if count == 0:
        return np.empty(0)
    if shape < 1.0:
        boost = stream.uniforms_open(count) ** (1.0 / shape)
        return _standard_gamma(stream, shape + 1.0, count) * boost
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(count)
    pending = np.arange(count)
    while pending.size:
        z = stream.normals(pending.size)
        u = stream.uniforms_open(pending.size)
        v = (1.0 + c * z) ** 3
        ok = (z > -1.0 / c) & (
            np.log(u) < 0.5 * z * z + d - d * np.where(v > 0, v, 1.0)
            + d * np.log(np.where(v > 0, v, 1.0))
        )
        out[pending[ok]] = d * v[ok]
        pending = pending[~ok]
    return out


def _poisson_inversion(stream: RandomStream, lam: float, count: int) -> np.ndarray:
    u = stream.uniforms(count)
    out = np.zeros(count)
    pmf = np.full(count, math.exp(-lam))
    cum = pmf.copy()
    k = 0
    active = cum < u
    # Exceedingly deep tails are cut off; P(X > lam + 40*sqrt(lam)) is
    # negligible against the 2**-53 resolution of the uniforms.
    cap = int(lam + 40.0 * math.sqrt(lam) + 50.0)
    while np.any(active) and k < cap:
        k += 1
        pmf[active] *= lam / k
        cum[active] += pmf[active]
        out[active] = k
        active = cum < u
    return out


def _poisson_ptrs(stream: RandomStream, lam: float, count: int) -> np.ndarray:
    """Hormann's transformed rejection with squeeze, valid for lam >= 10."""
    log_lam = math.log(lam)
    b = 0.931 + 2.53 * math.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    out = np.empty(count)
    pending = np.arange(count)
    while pending.size:
        u = stream.uniforms(pending.size) - 0.5
        v = stream.uniforms_open(pending.size)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a / us + b) * u + lam + 0.43)
        accept = np.zeros(pending.size, dtype=bool)
        fast = (us >= 0.07) & (v <= v_r)
        accept |= fast
        maybe = ~fast & (k >= 0) & ((us >= 0.013) | (v <= us))
        if np.any(maybe):
            km = k[maybe]
            lhs = np.log(v[maybe] * inv_alpha / (a / (us[maybe] ** 2) + b))
            rhs = -lam + km * log_lam - sp.gammaln(km + 1.0)
            sub = np.zeros(pending.size, dtype=bool)
            sub[np.flatnonzero(maybe)[lhs <= rhs]] = True
            accept |= sub
        accept &= k >= 0
        out[pending[accept]] = k[accept]
        pending = pending[~accept]
    return out


# -- module-level operations --------------------------------------------------


def dist_moments(spec: DistributionSpec) -> Moments:
    """Closed-form mean and variance; raises if a moment does not exist."""
    return spec.moments()


def dist_pdf(spec: DistributionSpec, x) -> Union[float, np.ndarray]:
    """Density (probability mass for discrete tags), 0 outside the support."""
    return spec.pdf(x)


def dist_cdf(spec: DistributionSpec, x) -> Union[float, np.ndarray]:
    return spec.cdf(x)


@lru_cache(maxsize=4096)
def _scalar_quantile(spec: DistributionSpec, u: float) -> float:
    return spec.quantile(u)


def dist_quantile(spec: DistributionSpec, u) -> Union[float, np.ndarray]:
    """Inverse cdf at probability ``u`` in (0,1).

    For discrete tags this is the smallest support point with cdf >= u.
    Scalar lookups are cached; the same quantile recurs across replicates.
    """
    if np.isscalar(u) or (isinstance(u, np.ndarray) and u.ndim == 0):
        return _scalar_quantile(spec, float(u))
    return spec.quantile(u)


def dist_sample(spec: DistributionSpec, stream: RandomStream, count: int) -> np.ndarray:
    return spec.sample(stream, count)
