"""One-parameter exponential families with canonical links, Newton/Fisher
scoring fits, Wald intervals, and two-parameter logistic ability scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy import special as sp

from .distributions import Moments, Normal, dist_quantile
from .errors import (ConvergenceError, DomainError, NoFiniteMLEError,
                     SeparationError)
from .regression import DesignMatrix
from .results import ConfidenceInterval

__all__ = [
    "ExpFamilySpec", "bernoulli_logit", "poisson_log", "normal_identity",
    "gamma_neglog", "expfam_moments", "GLMFit", "glm_fit", "glm_wald_ci",
    "IRTItemBank", "IRTAbilityFit", "irt_ability_fit",
    "load_item_bank_csv", "load_responses_csv",
]

_PROB_CLAMP = 1e-12


@dataclass(frozen=True)
class ExpFamilySpec:
    """Canonical-link exponential family described by its cumulant function.

    ``mean``/``mean_slope`` are the first two derivatives of the cumulant
    with respect to the natural parameter; the response variance is
    ``dispersion * mean_slope``.
    """

    name: str
    dispersion: float

    def __post_init__(self):
        if self.dispersion <= 0:
            raise DomainError("dispersion must be positive")

    # natural-parameter side -------------------------------------------------

    def natural_ok(self, xi: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(xi)))

    def mean(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean_slope(self, xi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # link side ----------------------------------------------------------------

    def link(self, mu: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate_y(self, y: np.ndarray) -> None:
        raise NotImplementedError

    def loglik(self, y: np.ndarray, xi: np.ndarray) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class _BernoulliLogit(ExpFamilySpec):
    def mean(self, xi):
        return sp.expit(xi)

    def mean_slope(self, xi):
        mu = sp.expit(xi)
        return mu * (1.0 - mu)

    def link(self, mu):
        return sp.logit(mu)

    def validate_y(self, y):
        if not np.all((y == 0.0) | (y == 1.0)):
            raise DomainError("binary family needs 0/1 responses")

    def loglik(self, y, xi):
        # y*xi - log(1 + e^xi), stable through logaddexp
        return float(np.sum(y * xi - np.logaddexp(0.0, xi)))


@dataclass(frozen=True)
class _PoissonLog(ExpFamilySpec):
    def mean(self, xi):
        return np.exp(xi)

    def mean_slope(self, xi):
        return np.exp(xi)

    def link(self, mu):
        return np.log(mu)

    def validate_y(self, y):
        if np.any(y < 0) or np.any(y != np.floor(y)):
            raise DomainError("count family needs nonnegative integer responses")

    def loglik(self, y, xi):
        return float(np.sum(y * xi - np.exp(xi) - sp.gammaln(y + 1.0)))


@dataclass(frozen=True)
class _NormalIdentity(ExpFamilySpec):
    def mean(self, xi):
        return xi

    def mean_slope(self, xi):
        return np.ones_like(xi)

    def link(self, mu):
        return mu

    def validate_y(self, y):
        if not np.all(np.isfinite(y)):
            raise DomainError("responses must be finite")

    def loglik(self, y, xi):
        s2 = self.dispersion
        return float(np.sum(-0.5 * np.log(2.0 * math.pi * s2)
                            - (y - xi) ** 2 / (2.0 * s2)))


@dataclass(frozen=True)
class _GammaNegLog(ExpFamilySpec):
    shape: float = 1.0

    def __post_init__(self):
        super().__post_init__()
        if self.shape <= 0:
            raise DomainError("gamma shape must be positive")

    def natural_ok(self, xi):
        return bool(np.all(np.isfinite(xi)) and np.all(xi < 0.0))

    def mean(self, xi):
        return -self.shape / xi

    def mean_slope(self, xi):
        return self.shape / xi ** 2

    def link(self, mu):
        return -self.shape / mu

    def validate_y(self, y):
        if np.any(y <= 0):
            raise DomainError("gamma family needs strictly positive responses")

    def loglik(self, y, xi):
        lam = self.shape
        alpha = -xi  # rate implied by the natural parameter
        return float(np.sum(lam * np.log(alpha) - sp.gammaln(lam)
                            + (lam - 1.0) * np.log(y) - alpha * y))


def bernoulli_logit() -> ExpFamilySpec:
    return _BernoulliLogit(name="bernoulli_logit", dispersion=1.0)


def poisson_log() -> ExpFamilySpec:
    return _PoissonLog(name="poisson_log", dispersion=1.0)


def normal_identity(dispersion: float = 1.0) -> ExpFamilySpec:
    return _NormalIdentity(name="normal_identity", dispersion=dispersion)


def gamma_neglog(shape: float) -> ExpFamilySpec:
    """Gamma responses with known shape; the natural parameter is minus the
    rate, so linear predictors must stay negative."""
    return _GammaNegLog(name="gamma_neglog", dispersion=1.0, shape=shape)


def expfam_moments(spec: ExpFamilySpec, theta: float) -> Moments:
    """Mean and variance at an interior natural parameter value."""
    xi = np.asarray([theta], dtype=float)
    if not spec.natural_ok(xi):
        raise DomainError(f"{theta} is outside the natural domain of {spec.name}")
    mean = float(spec.mean(xi)[0])
    variance = float(spec.dispersion * spec.mean_slope(xi)[0])
    return Moments(mean, variance)


# -- fitting ------------------------------------------------------------------


@dataclass(frozen=True)
class GLMFit:
    family: str
    design: DesignMatrix
    y: np.ndarray
    beta: np.ndarray
    mu: np.ndarray
    fisher_info: np.ndarray
    iterations: int
    converged: bool
    log_likelihood: float
    loglik_trace: np.ndarray


_MAX_ITER = 200
_MAX_HALVINGS = 30
_SEPARATION_NORM = 1e3


def _working_weights(spec: ExpFamilySpec, eta: np.ndarray) -> np.ndarray:
    slope = spec.mean_slope(eta)
    if spec.name == "bernoulli_logit":
        # clamp only inside the weights; reported means are untouched
        mu = np.clip(spec.mean(eta), _PROB_CLAMP, 1.0 - _PROB_CLAMP)
        slope = mu * (1.0 - mu)
    return slope / spec.dispersion


def glm_fit(spec: ExpFamilySpec, x: DesignMatrix, y) -> GLMFit:
    """Newton/Fisher scoring on the canonical score equations, with
    step-halving whenever a full step would lower the log-likelihood."""
    y = np.asarray(y, dtype=float)
    if y.shape != (x.n,):
        raise DomainError("response length must match the design")
    spec.validate_y(y)
    x.require_full_rank()
    m = x.matrix
    beta = _initial_beta(spec, x, y)
    eta = m @ beta
    ll = spec.loglik(y, eta)
    trace = [ll]
    tol = 1e-10 * (1.0 + np.abs(m.T @ y).max() / spec.dispersion)
    converged = False
    iterations = 0
    for _ in range(_MAX_ITER):
        iterations += 1
        mu = spec.mean(eta)
        score = m.T @ (y - mu) / spec.dispersion
        if np.abs(score).max() <= tol:
            if spec.name == "bernoulli_logit" and np.abs(y - mu).max() < 1e-6:
                # the score only vanishes with all cases classified exactly
                # when the likelihood has no finite maximizer
                raise SeparationError(
                    "separation detected: responses perfectly classified, "
                    "coefficients diverge")
            converged = True
            break
        info = m.T @ (m * _working_weights(spec, eta)[:, None])
        step = np.linalg.solve(info, score)
        new_beta, new_eta, new_ll = _halved_step(spec, m, y, beta, step, ll)
        if new_ll is None:
            if float(np.linalg.norm(beta)) > _SEPARATION_NORM:
                raise SeparationError(
                    "separation detected: coefficients diverge while the "
                    "score stalls")
            raise ConvergenceError("no ascent direction found", last_iterate=beta)
        beta, eta, ll = new_beta, new_eta, new_ll
        trace.append(ll)
        if np.linalg.norm(beta) > _SEPARATION_NORM and spec.name == "bernoulli_logit":
            raise SeparationError(
                "separation detected: coefficient norm exceeded "
                f"{_SEPARATION_NORM:g} before the score vanished")
    else:
        raise ConvergenceError("scoring iterations exhausted", last_iterate=beta)
    info = m.T @ (m * _working_weights(spec, eta)[:, None])
    return GLMFit(family=spec.name, design=x, y=y, beta=beta,
                  mu=np.asarray(spec.mean(eta)), fisher_info=info,
                  iterations=iterations, converged=converged,
                  log_likelihood=ll, loglik_trace=np.array(trace))


def _initial_beta(spec: ExpFamilySpec, x: DesignMatrix, y: np.ndarray) -> np.ndarray:
    if spec.name == "gamma_neglog":
        # start from a response-driven predictor to keep eta negative
        eta0 = spec.link(np.maximum(y, np.percentile(y, 5)))
        beta, *_ = np.linalg.lstsq(x.matrix, eta0, rcond=None)
        if spec.natural_ok(x.matrix @ beta):
            return beta
        # fall back to a constant negative predictor
        beta = np.zeros(x.n_columns)
        if x.has_intercept:
            beta[0] = float(spec.link(np.array([y.mean()]))[0])
        return beta
    return np.zeros(x.n_columns)


def _halved_step(spec, m, y, beta, step, ll_old):
    scale = 1.0
    for _ in range(_MAX_HALVINGS):
        candidate = beta + scale * step
        eta = m @ candidate
        if spec.natural_ok(eta):
            ll = spec.loglik(y, eta)
            if ll >= ll_old - 1e-13 * (1.0 + abs(ll_old)):
                return candidate, eta, ll
        scale *= 0.5
    return None, None, None


def glm_wald_ci(fit: GLMFit, j: int, delta: float) -> ConfidenceInterval:
    """Large-sample interval from the inverse information at the fit."""
    if not fit.converged:
        raise DomainError("Wald interval needs a converged fit")
    if not 0 <= j < fit.beta.size:
        raise DomainError("coefficient index out of range")
    cov = np.linalg.inv(fit.fisher_info)
    half = float(dist_quantile(Normal(0.0, 1.0), 1.0 - delta / 2.0)) * math.sqrt(cov[j, j])
    center = float(fit.beta[j])
    return ConfidenceInterval(center - half, center + half, 1.0 - delta,
                              "glm_wald")


# -- two-parameter logistic ability scoring ------------------------------------


@dataclass(frozen=True)
class IRTItemBank:
    """Calibrated items: discrimination ``a`` (positive) and difficulty ``b``."""

    a: np.ndarray
    b: np.ndarray
    calibrated: bool = True

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != b.shape or a.ndim != 1 or a.size == 0:
            raise DomainError("item parameters must be matching nonempty vectors")
        if np.any(a <= 0):
            raise DomainError("discriminations must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_items(self) -> int:
        return self.a.size

    def success_probability(self, ability: float) -> np.ndarray:
        return sp.expit(self.a * (ability - self.b))


@dataclass(frozen=True)
class IRTAbilityFit:
    gamma_hat: float
    se: float
    iterations: int


def irt_ability_fit(bank: IRTItemBank, responses) -> IRTAbilityFit:
    """Newton solve of the weighted-score equation for one examinee."""
    y = np.asarray(responses, dtype=float)
    if y.shape != (bank.n_items,):
        raise DomainError("one response per item required")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise DomainError("responses must be 0/1")
    if np.all(y == 1.0) or np.all(y == 0.0):
        raise NoFiniteMLEError(
            "all-correct or all-incorrect responses admit no finite ability")
    gamma = 0.0
    tol = 1e-10 * (1.0 + bank.a.sum())
    target = float(bank.a @ y)
    for iteration in range(1, 101):
        prob = bank.success_probability(gamma)
        score = target - float(bank.a @ prob)
        info = float((bank.a ** 2 * prob * (1.0 - prob)).sum())
        if abs(score) <= tol:
            return IRTAbilityFit(gamma_hat=gamma, se=1.0 / math.sqrt(info),
                                 iterations=iteration)
        gamma += score / info
    raise ConvergenceError("ability iteration did not converge", last_iterate=gamma)


# -- CSV interfaces ---------------------------------------------------------------


def load_item_bank_csv(path) -> IRTItemBank:
    """Items as rows of an ``a,b`` CSV with header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if header[:2] != ["a", "b"]:
        raise DomainError("item bank CSV must start with columns a,b")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return IRTItemBank(a=data[:, 0], b=data[:, 1])


def load_responses_csv(path) -> np.ndarray:
    """0/1 response matrix, one row per examinee."""
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    if not np.all((data == 0.0) | (data == 1.0)):
        raise DomainError("responses must be 0/1")
    return data
