"""Brownian paths, stochastic integrals, geometric Brownian motion,
path-integral Monte Carlo, option pricing, and the dimension-free
concentration experiment for Lipschitz functionals of Gaussian vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sp

from .errors import DomainError
from .rng import RandomStream, stream_split

__all__ = [
    "TimeGrid", "uniform_grid", "BrownianPath", "brownian_sample",
    "quadratic_variation", "ito_integral", "GBMPath", "gbm_sample",
    "MCEstimate", "feynman_kac_mc", "BSParams", "BSPrice",
    "black_scholes_price", "bs_mc_price", "bs_pde_residual",
    "GaussianConcentrationResult", "gaussian_concentration_experiment",
    "write_path_csv",
]

# Fixed fan-out unit for path-chunked Monte Carlo; results depend on this
# constant and the seed only, never on worker count.
PATH_CHUNK = 1 << 16


@dataclass(frozen=True)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise DomainError("grid needs at least two time points")
        if t[0] != 0.0:
            raise DomainError("grid must start at time 0")
        if np.any(np.diff(t) <= 0.0):
            raise DomainError("grid times must increase strictly")
        object.__setattr__(self, "times", t)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return self.times.size - 1

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.times)

    @property
    def mesh(self) -> float:
        return float(self.increments.max())

    @property
    def is_uniform(self) -> bool:
        inc = self.increments
        return bool(np.allclose(inc, inc[0], rtol=1e-12, atol=0.0))


def uniform_grid(horizon: float, n_steps: int) -> TimeGrid:
    if horizon <= 0 or n_steps < 1:
        raise DomainError("need horizon > 0 and at least one step")
    return TimeGrid(np.linspace(0.0, horizon, n_steps + 1))


@dataclass(frozen=True)
class BrownianPath:
    grid: TimeGrid
    values: np.ndarray  # (n_steps + 1, dim), first row zero

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.times.size:
            raise DomainError("one value row per grid time required")
        if np.any(v[0] != 0.0):
            raise DomainError("paths start at the origin")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def brownian_sample(grid: TimeGrid, dim: int, stream: RandomStream) -> BrownianPath:
    """Independent centered normal increments with variance equal to the
    step length, accumulated from the origin."""
    if dim < 1:
        raise DomainError("dimension must be >= 1")
    k = grid.n_steps
    z = stream.normals(k * dim).reshape(k, dim)
    increments = z * np.sqrt(grid.increments)[:, None]
    values = np.vstack([np.zeros((1, dim)), np.cumsum(increments, axis=0)])
    return BrownianPath(grid=grid, values=values)


def quadratic_variation(path: BrownianPath, coordinate: int = 0) -> float:
    """Sum of squared increments along the grid."""
    if not 0 <= coordinate < path.dim:
        raise DomainError("coordinate out of range")
    steps = np.diff(path.values[:, coordinate])
    return float((steps ** 2).sum())


def ito_integral(integrand, path: BrownianPath, coordinate: int = 0) -> float:
    """Left-endpoint stochastic integral of an adapted integrand.

    ``integrand`` holds one value per increment, evaluated at the left grid
    point; adaptedness (value j computed from path history up to j) is the
    caller's contract.
    """
    if not 0 <= coordinate < path.dim:
        raise DomainError("coordinate out of range")
    f = np.asarray(integrand, dtype=float)
    if f.shape != (path.grid.n_steps,):
        raise DomainError("integrand needs one value per increment")
    steps = np.diff(path.values[:, coordinate])
    return float(f @ steps)


@dataclass(frozen=True)
class GBMPath:
    grid: TimeGrid
    values: np.ndarray
    method: str
    nonpositive: bool  # Euler paths may cross zero; exact paths never do


def gbm_sample(mu: float, sigma: float, s0: float, grid: TimeGrid,
               stream: RandomStream, method: str = "exact") -> GBMPath:
    """Geometric Brownian motion along the grid.

    ``exact`` exponentiates a Brownian path of the drift-corrected
    exponent; ``euler`` applies the first-order scheme and flags any
    nonpositive value it produces.
    """
    if s0 <= 0:
        raise DomainError("initial value must be positive")
    if sigma < 0:
        raise DomainError("volatility must be nonnegative")
    base = brownian_sample(grid, 1, stream).values[:, 0]
    if method == "exact":
        values = s0 * np.exp((mu - 0.5 * sigma * sigma) * grid.times + sigma * base)
        return GBMPath(grid=grid, values=values, method=method, nonpositive=False)
    if method == "euler":
        steps = np.diff(base)
        values = np.empty(grid.times.size)
        values[0] = s0
        factors = 1.0 + mu * grid.increments + sigma * steps
        values[1:] = s0 * np.cumprod(factors)
        return GBMPath(grid=grid, values=values, method=method,
                       nonpositive=bool(np.any(values <= 0.0)))
    raise DomainError(f"unknown method {method!r}")


# -- path-integral Monte Carlo ----------------------------------------------------


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    standard_error: float
    n_paths: int


def feynman_kac_mc(potential: Callable, payoff: Callable, t: float, x0,
                   dim: int, n_paths: int, steps: int,
                   stream: RandomStream) -> MCEstimate:
    """Average of ``exp(-time integral of potential) * payoff(endpoint)``
    over Brownian paths started at ``x0``.

    The time integral uses the left-endpoint rule on the simulation grid,
    matching the adapted convention of the stochastic integral; its
    discretization bias is O(mesh). Paths are generated in fixed-size
    chunks, chunk ``c`` from ``stream_split(stream, c)``, so the estimate
    is invariant to how chunks are distributed across workers.
    """
    if steps < 1:
        raise DomainError("need at least one step")
    if n_paths < 1:
        raise DomainError("need at least one path")
    if t <= 0:
        raise DomainError("time horizon must be positive")
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (dim,))
    dt = t / steps
    sqrt_dt = math.sqrt(dt)
    total = 0.0
    total_sq = 0.0
    sums = []
    sums_sq = []
    for chunk_index, start in enumerate(range(0, n_paths, PATH_CHUNK)):
        stop = min(start + PATH_CHUNK, n_paths)
        take = stop - start
        sub = stream_split(stream, chunk_index)
        z = sub.normals(take * steps * dim).reshape(take, steps, dim)
        paths = np.cumsum(z * sqrt_dt, axis=1) + x0
        # left endpoints: x0, then all but the final point
        integral = np.asarray(potential(np.broadcast_to(x0, (take, dim))), dtype=float).copy()
        for j in range(steps - 1):
            integral += np.asarray(potential(paths[:, j, :]), dtype=float)
        integral *= dt
        values = np.exp(-integral) * np.asarray(payoff(paths[:, -1, :]), dtype=float)
        sums.append(float(values.sum()))
        sums_sq.append(float((values ** 2).sum()))
    total = math.fsum(sums)
    total_sq = math.fsum(sums_sq)
    mean = total / n_paths
    if n_paths > 1:
        var = max(0.0, (total_sq - n_paths * mean * mean) / (n_paths - 1))
        se = math.sqrt(var / n_paths)
    else:
        se = math.inf
    return MCEstimate(estimate=mean, standard_error=se, n_paths=n_paths)


# -- option pricing -----------------------------------------------------------------


@dataclass(frozen=True)
class BSParams:
    """European call inputs. ``strike`` may be zero (the payoff degenerates
    to the asset itself) and ``volatility`` may be zero (deterministic
    growth); both limits are priced in closed form."""

    spot: float
    strike: float
    rate: float
    volatility: float
    maturity: float
    valuation_time: float = 0.0

    def __post_init__(self):
        if self.spot <= 0:
            raise DomainError("spot must be positive")
        if self.strike < 0:
            raise DomainError("strike must be nonnegative")
        if self.rate < 0:
            raise DomainError("rate must be nonnegative")
        if self.volatility < 0:
            raise DomainError("volatility must be nonnegative")
        if self.maturity <= 0:
            raise DomainError("maturity must be positive")
        if not 0.0 <= self.valuation_time < self.maturity:
            raise DomainError("valuation time must lie in [0, maturity)")

    @property
    def time_left(self) -> float:
        return self.maturity - self.valuation_time

    def to_dict(self) -> dict:
        return {"spot": self.spot, "strike": self.strike, "rate": self.rate,
                "volatility": self.volatility, "maturity": self.maturity,
                "valuation_time": self.valuation_time}


@dataclass(frozen=True)
class BSPrice:
    price: float
    delta: float
    bond_position: float

    def to_dict(self) -> dict:
        return {"price": self.price, "delta": self.delta,
                "bond_position": self.bond_position}


def _phi(x: float) -> float:
    return float(sp.ndtr(x))


def black_scholes_price(params: BSParams) -> BSPrice:
    """Closed-form call value with its replicating portfolio.

    ``delta`` is the stock holding; ``bond_position`` counts unit bonds
    (value 1 at time zero growing at the risk-free rate), so the portfolio
    identity reads ``price = delta * spot + bond_position * exp(r t)``.
    """
    s, k, r = params.spot, params.strike, params.rate
    tau = params.time_left
    sigma = params.volatility
    if k == 0.0:
        price, delta = s, 1.0
    elif sigma == 0.0:
        forward = s * math.exp(r * tau)
        if forward > k:
            price = s - k * math.exp(-r * tau)
            delta = 1.0
        else:
            price = 0.0
            delta = 0.0
    else:
        root_tau = math.sqrt(tau)
        g = (math.log(s / k) + (r + 0.5 * sigma * sigma) * tau) / (sigma * root_tau)
        h = g - sigma * root_tau
        price = s * _phi(g) - k * math.exp(-r * tau) * _phi(h)
        delta = _phi(g)
    bond_value = price - delta * s
    bond_position = bond_value * math.exp(-r * params.valuation_time)
    return BSPrice(price=price, delta=delta, bond_position=bond_position)


def bs_mc_price(params: BSParams, n_paths: int, stream: RandomStream) -> MCEstimate:
    """Discounted expected payoff under growth at the risk-free rate,
    sampling the terminal asset value exactly (one lognormal draw per
    path)."""
    if n_paths < 2:
        raise DomainError("need at least two paths")
    tau = params.time_left
    drift = (params.rate - 0.5 * params.volatility ** 2) * tau
    spread = params.volatility * math.sqrt(tau)
    discount = math.exp(-params.rate * tau)
    if spread == 0.0:
        payoff = discount * max(params.spot * math.exp(drift) - params.strike, 0.0)
        return MCEstimate(estimate=payoff, standard_error=0.0, n_paths=n_paths)
    sums = []
    sums_sq = []
    for chunk_index, start in enumerate(range(0, n_paths, PATH_CHUNK)):
        stop = min(start + PATH_CHUNK, n_paths)
        sub = stream_split(stream, chunk_index)
        terminal = params.spot * np.exp(drift + spread * sub.normals(stop - start))
        payoff = discount * np.maximum(terminal - params.strike, 0.0)
        sums.append(float(payoff.sum()))
        sums_sq.append(float((payoff ** 2).sum()))
    mean = math.fsum(sums) / n_paths
    var = max(0.0, (math.fsum(sums_sq) - n_paths * mean * mean) / (n_paths - 1))
    return MCEstimate(estimate=mean, standard_error=math.sqrt(var / n_paths),
                      n_paths=n_paths)


def bs_pde_residual(params: BSParams, step: float = 1e-4) -> float:
    """Finite-difference residual of the pricing equation at the valuation
    point: time derivative plus diffusion and drift terms minus discounting."""
    s, r, sigma = params.spot, params.rate, params.volatility
    t = params.valuation_time

    def u(tt, xx):
        return black_scholes_price(
            BSParams(spot=xx, strike=params.strike, rate=r, volatility=sigma,
                     maturity=params.maturity, valuation_time=tt)).price

    u0 = u(t, s)
    du_dt = (u(t + step, s) - u(t - step, s)) / (2.0 * step) if t >= step else \
        (u(t + step, s) - u0) / step
    du_dx = (u(t, s + step) - u(t, s - step)) / (2.0 * step)
    d2u_dx2 = (u(t, s + step) - 2.0 * u0 + u(t, s - step)) / (step * step)
    return du_dt + 0.5 * sigma * sigma * s * s * d2u_dx2 + r * s * du_dx - r * u0


# -- Gaussian concentration ------------------------------------------------------------


_FUNCTIONALS = {
    "coordinate": (lambda x: x[:, 0], 1.0),
    "max": (lambda x: x.max(axis=1), 1.0),
    "norm": (lambda x: np.sqrt((x ** 2).sum(axis=1)), 1.0),
    "constant": (lambda x: np.zeros(x.shape[0]), 0.0),
}


@dataclass(frozen=True)
class GaussianConcentrationResult:
    tau_grid: np.ndarray
    empirical: np.ndarray
    standard_error: np.ndarray
    bound: np.ndarray
    lipschitz: float
    center: float


def gaussian_concentration_experiment(func_tag: str, k: int, n_samples: int,
                                      tau_grid, stream: RandomStream
                                      ) -> GaussianConcentrationResult:
    """Tail frequency of a Lipschitz functional of a standard normal vector
    against the dimension-free bound ``2 exp(-tau^2 / (2 L^2))``.

    Centering uses the empirical mean of the functional values; the exact
    mean is generally unavailable and the centering error is far below the
    Monte Carlo resolution at these sample sizes.
    """
    if func_tag not in _FUNCTIONALS:
        raise DomainError(f"unknown functional {func_tag!r}")
    if k < 1 or n_samples < 1:
        raise DomainError("need k >= 1 and n_samples >= 1")
    func, lipschitz = _FUNCTIONALS[func_tag]
    tau_grid = np.sort(np.asarray(tau_grid, dtype=float))
    values = np.empty(n_samples)
    chunk = max(1, (1 << 23) // k)
    done = 0
    while done < n_samples:
        take = min(chunk, n_samples - done)
        x = stream.normals(take * k).reshape(take, k)
        values[done:done + take] = func(x)
        done += take
    center = float(values.mean())
    deviations = np.sort(np.abs(values - center))
    counts = n_samples - np.searchsorted(deviations, tau_grid, side="right")
    empirical = counts / n_samples
    se = np.sqrt(empirical * (1.0 - empirical) / n_samples)
    if lipschitz > 0.0:
        bound = 2.0 * np.exp(-tau_grid ** 2 / (2.0 * lipschitz ** 2))
    else:
        bound = np.where(tau_grid > 0.0, 0.0, 2.0)
    return GaussianConcentrationResult(tau_grid=tau_grid, empirical=empirical,
                                       standard_error=se, bound=bound,
                                       lipschitz=lipschitz, center=center)


def write_path_csv(path_obj, file) -> None:
    """Time column followed by one column per dimension."""
    values = np.atleast_2d(path_obj.values)
    if values.shape[0] == 1:
        values = values.T
    table = np.column_stack([path_obj.grid.times, values])
    header = "t," + ",".join(f"x{i}" for i in range(values.shape[1]))
    np.savetxt(file, table, delimiter=",", header=header, comments="")
