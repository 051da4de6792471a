"""Ordinary least squares with full inference, ridge, LASSO, and
prediction-error bound experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular

from .distributions import FisherF, StudentT, dist_quantile
from .errors import (ConvergenceError, DegenerateSampleError, DomainError,
                     NestingError, SingularDesignError)
from .results import ConfidenceInterval, TestReport
from .rng import RandomStream, stream_split

__all__ = [
    "DesignMatrix", "design_matrix", "LinearFit", "ols_fit",
    "coef_interval", "response_band", "f_test_nested",
    "RidgeFit", "ridge_fit", "LassoFit", "lasso_fit", "soft_threshold",
    "estimate_restricted_eigenvalue", "lasso_penalty_rule",
    "PredictionErrorResult", "prediction_error_experiment",
    "load_regression_csv",
]

_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """Regressor array; column 0 is all ones when ``has_intercept``."""

    matrix: np.ndarray
    has_intercept: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] < 1:
            raise DomainError("design must be a nonempty 2-d array")
        object.__setattr__(self, "matrix", m)
        if self.has_intercept and not np.all(m[:, 0] == 1.0):
            raise DomainError("intercept designs must carry a leading ones column")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    def require_full_rank(self) -> None:
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if sv[-1] <= _RANK_RTOL * sv[0]:
            _, _, vt = np.linalg.svd(self.matrix)
            null = np.abs(vt[-1])
            involved = np.flatnonzero(null > 0.1 * null.max())
            raise SingularDesignError(
                f"singular design: columns {involved.tolist()} are linearly dependent"
            )


def design_matrix(x, intercept: bool = True) -> DesignMatrix:
    """Assemble a design from raw regressors, prepending ones by default.

    A 1-d input is treated as a single regressor column.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if intercept:
        x = np.column_stack([np.ones(x.shape[0]), x])
    return DesignMatrix(matrix=x, has_intercept=intercept)


@dataclass(frozen=True)
class LinearFit:
    design: DesignMatrix
    y: np.ndarray
    beta: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    gram_inverse: np.ndarray
    hat_diagonal: np.ndarray
    ss_total: float
    ss_reg: float
    ss_res: float
    r2: float
    r2_adj: float
    sigma2_hat: Optional[float]
    cov_beta: Optional[np.ndarray]

    @property
    def df_residual(self) -> int:
        return self.design.n - self.design.n_columns

    def to_dict(self) -> dict:
        return {
            "beta": self.beta.tolist(),
            "sigma2_hat": self.sigma2_hat,
            "r2": self.r2,
            "r2_adj": self.r2_adj,
            "ss_total": self.ss_total,
            "ss_reg": self.ss_reg,
            "ss_res": self.ss_res,
            "df_residual": self.df_residual,
        }


def ols_fit(x: DesignMatrix, y) -> LinearFit:
    """Least squares through a Householder QR factorization.

    The Gram inverse is recovered from the triangular factor rather than by
    forming and inverting the normal equations.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (x.n,):
        raise DomainError("response length must match the design")
    x.require_full_rank()
    q, r = np.linalg.qr(x.matrix)
    beta = solve_triangular(r, q.T @ y)
    fitted = x.matrix @ beta
    residuals = y - fitted
    r_inv = solve_triangular(r, np.eye(x.n_columns))
    gram_inverse = r_inv @ r_inv.T
    hat_diagonal = (q ** 2).sum(axis=1)
    center = y.mean() if x.has_intercept else 0.0
    ss_total = float(((y - center) ** 2).sum())
    ss_res = float((residuals ** 2).sum())
    ss_reg = float(((fitted - center) ** 2).sum())
    r2 = 1.0 - ss_res / ss_total if ss_total > 0 else 1.0
    df = x.n - x.n_columns
    if df >= 1:
        sigma2 = ss_res / df
        r2_adj = 1.0 - (x.n - 1) / df * (1.0 - r2)
        cov_beta = sigma2 * gram_inverse
    else:
        sigma2 = None
        r2_adj = float("nan")
        cov_beta = None
    return LinearFit(design=x, y=y, beta=beta, fitted=fitted, residuals=residuals,
                     gram_inverse=gram_inverse, hat_diagonal=hat_diagonal,
                     ss_total=ss_total, ss_reg=ss_reg, ss_res=ss_res,
                     r2=r2, r2_adj=r2_adj, sigma2_hat=sigma2, cov_beta=cov_beta)


def _require_inference(fit: LinearFit) -> float:
    if fit.sigma2_hat is None:
        raise DegenerateSampleError(
            "no residual degrees of freedom: inference needs n >= columns + 1")
    return fit.sigma2_hat


def coef_interval(fit: LinearFit, j: int, delta: float) -> ConfidenceInterval:
    """Studentized interval for one coefficient."""
    sigma2 = _require_inference(fit)
    if not 0 <= j < fit.beta.size:
        raise DomainError("coefficient index out of range")
    scale = math.sqrt(sigma2 * fit.gram_inverse[j, j])
    quantile = float(dist_quantile(StudentT(fit.df_residual), 1.0 - delta / 2.0))
    center = float(fit.beta[j])
    half = quantile * scale
    return ConfidenceInterval(center - half, center + half, 1.0 - delta,
                              "coef_t")


def response_band(fit: LinearFit, x0, kind: str, delta: float) -> ConfidenceInterval:
    """Interval around the regression surface at one regressor point.

    ``mean_pointwise`` covers the mean response at ``x0``;
    ``mean_scheffe`` widens to hold simultaneously over all points;
    ``prediction`` covers a future response drawn at ``x0``.
    """
    sigma2 = _require_inference(fit)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (fit.design.n_columns,):
        raise DomainError("x0 must include every design column, intercept first")
    q = float(x0 @ fit.gram_inverse @ x0)
    sigma = math.sqrt(sigma2)
    df = fit.df_residual
    if kind == "mean_pointwise":
        half = float(dist_quantile(StudentT(df), 1.0 - delta / 2.0)) * sigma * math.sqrt(q)
    elif kind == "mean_scheffe":
        d = fit.design.n_columns
        f_quant = float(dist_quantile(FisherF(d, df), 1.0 - delta))
        half = sigma * math.sqrt(d * f_quant) * math.sqrt(q)
    elif kind == "prediction":
        half = float(dist_quantile(StudentT(df), 1.0 - delta / 2.0)) * sigma * math.sqrt(1.0 + q)
    else:
        raise DomainError(f"unknown band kind {kind!r}")
    center = float(x0 @ fit.beta)
    return ConfidenceInterval(center - half, center + half, 1.0 - delta,
                              f"response_{kind}")


def f_test_nested(fit_full: LinearFit, fit_null: LinearFit) -> TestReport:
    """Compare nested least-squares fits on the same response."""
    if not np.array_equal(fit_full.y, fit_null.y):
        raise NestingError("fits must share the response vector")
    full_cols = fit_full.design.matrix
    null_cols = fit_null.design.matrix
    for jn in range(null_cols.shape[1]):
        column = null_cols[:, jn]
        if not any(np.array_equal(column, full_cols[:, jf])
                   for jf in range(full_cols.shape[1])):
            raise NestingError(f"null design column {jn} is not a full-design column")
    df_diff = fit_full.design.n_columns - fit_null.design.n_columns
    df_res = fit_full.df_residual
    if df_res < 1:
        raise DegenerateSampleError("full fit has no residual degrees of freedom")
    if df_diff == 0:
        return TestReport(0.0, FisherF(1, df_res), 1.0, kind="f_nested",
                          extras={"df_diff": 0})
    stat = ((fit_null.ss_res - fit_full.ss_res) / df_diff) / (fit_full.ss_res / df_res)
    stat = max(0.0, float(stat))
    from .distributions import dist_cdf

    law = FisherF(df_diff, df_res)
    p = float(1.0 - dist_cdf(law, stat))
    return TestReport(stat, law, p, kind="f_nested", extras={"df_diff": df_diff})


# -- ridge ------------------------------------------------------------------------


@dataclass(frozen=True)
class RidgeFit:
    beta: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    penalty: float


def ridge_fit(x: DesignMatrix, y, penalty: float) -> RidgeFit:
    """Quadratically penalized least squares.

    Solves ``(X'X + 2 penalty I) beta = X'y``; the factor 2 reflects the
    half-squared-error objective, so ``penalty`` multiplies ``||beta||^2``
    against ``0.5 ||y - X beta||^2``. Every coefficient is penalized,
    including the intercept.
    """
    if penalty < 0:
        raise DomainError("penalty must be nonnegative")
    y = np.asarray(y, dtype=float)
    if penalty == 0.0:
        x.require_full_rank()
    gram = x.matrix.T @ x.matrix + 2.0 * penalty * np.eye(x.n_columns)
    beta = np.linalg.solve(gram, x.matrix.T @ y)
    fitted = x.matrix @ beta
    return RidgeFit(beta=beta, fitted=fitted, residuals=y - fitted, penalty=penalty)


# -- lasso ------------------------------------------------------------------------


def soft_threshold(value: float, threshold: float) -> float:
    if value > threshold:
        return value - threshold
    if value < -threshold:
        return value + threshold
    return 0.0


@dataclass(frozen=True)
class LassoFit:
    beta: np.ndarray
    active_set: np.ndarray
    iterations: int
    objective: float
    objective_trace: np.ndarray


def lasso_objective(x: DesignMatrix, y, beta, penalty: float) -> float:
    resid = y - x.matrix @ beta
    slopes = beta[1:] if x.has_intercept else beta
    return float((resid ** 2).sum() / (2.0 * x.n) + penalty * np.abs(slopes).sum())


def lasso_fit(x: DesignMatrix, y, penalty: float, tol: float = 1e-10,
              max_sweeps: int = 100_000) -> LassoFit:
    """L1-penalized least squares by cyclic coordinate descent.

    Minimizes ``||y - X beta||^2 / (2n) + penalty * ||slopes||_1`` with the
    intercept never penalized. Each coordinate update is the exact
    univariate soft-threshold minimizer, so the objective cannot increase.
    """
    y = np.asarray(y, dtype=float)
    if penalty < 0:
        raise DomainError("penalty must be nonnegative")
    if penalty == 0.0:
        x.require_full_rank()
    m = x.matrix
    n, d = m.shape
    col_ms = (m ** 2).sum(axis=0) / n
    if np.any(col_ms == 0.0):
        raise SingularDesignError("zero design column")
    beta = np.zeros(d)
    resid = y.copy()
    free = {0} if x.has_intercept else set()
    trace = []
    for sweep in range(1, max_sweeps + 1):
        max_change = 0.0
        for j in range(d):
            old = beta[j]
            rho = (m[:, j] @ resid) / n + col_ms[j] * old
            if j in free:
                new = rho / col_ms[j]
            else:
                new = soft_threshold(rho, penalty) / col_ms[j]
            if new != old:
                resid -= (new - old) * m[:, j]
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        trace.append(lasso_objective(x, y, beta, penalty))
        if max_change <= tol * (1.0 + np.abs(beta).max()):
            return LassoFit(beta=beta, active_set=np.flatnonzero(beta),
                            iterations=sweep, objective=trace[-1],
                            objective_trace=np.array(trace))
    raise ConvergenceError("coordinate descent did not converge",
                           last_iterate=beta)


def lasso_penalty_rule(n: int, p: int, sigma: float, t: float,
                       column_bound: float = 1.0) -> float:
    """Penalty level that dominates the correlation of noise with any
    normalized column, up to failure probability 2 exp(-t^2 / 2)."""
    if n < 1 or p < 1 or sigma <= 0 or t <= 0 or column_bound <= 0:
        raise DomainError("all rule inputs must be positive")
    lam2 = 8.0 * column_bound ** 2 * sigma ** 2 * (math.log(p) / n + t * t / (2.0 * n))
    return math.sqrt(lam2)


def estimate_restricted_eigenvalue(x: DesignMatrix, support, n_probes: int,
                                   stream: RandomStream) -> float:
    """Randomized lower-envelope search for min ||Xv||^2 / (n ||v||^2) over
    the cone where off-support mass is at most three times support mass."""
    m = x.matrix[:, 1:] if x.has_intercept else x.matrix
    n, p = m.shape
    support = np.asarray(support, dtype=int)
    mask = np.zeros(p, dtype=bool)
    mask[support] = True
    best = math.inf
    for _ in range(n_probes):
        v = np.zeros(p)
        v_s = stream.normals(support.size)
        v[mask] = v_s
        budget = 3.0 * np.abs(v_s).sum() * stream.uniforms(1)[0]
        rest = stream.normals(p - support.size)
        l1 = np.abs(rest).sum()
        if l1 > 0:
            v[~mask] = rest * (budget / l1)
        ratio = float((m @ v) @ (m @ v) / (n * (v @ v)))
        best = min(best, ratio)
    return best


# -- prediction error experiments ---------------------------------------------------


@dataclass(frozen=True)
class PredictionErrorResult:
    mean_error: float
    bound_value: float
    violation_rate: float
    errors: np.ndarray
    penalty: Optional[float] = None
    restricted_eigenvalue: Optional[float] = None


def prediction_error_experiment(true_beta, x: DesignMatrix, noise_sigma: float,
                                estimator: str, replicates: int,
                                stream: RandomStream, *, t: float = 2.0,
                                column_bound: float = 1.0,
                                re_probes: int = 2000) -> PredictionErrorResult:
    """In-sample prediction risk of a fitted surface against its bound.

    OLS is compared with the exact expected risk ``sigma^2 d / n``. The
    LASSO path draws its penalty from :func:`lasso_penalty_rule` and is
    compared with the sparse oracle bound ``9 penalty^2 s / kappa`` with
    ``kappa`` estimated by randomized cone search.
    """
    if replicates < 1:
        raise DomainError("need at least one replicate")
    true_beta = np.asarray(true_beta, dtype=float)
    n, d = x.matrix.shape
    signal = x.matrix @ true_beta
    penalty = None
    kappa = None
    if estimator == "ols":
        bound = noise_sigma ** 2 * d / n
    elif estimator == "lasso":
        slopes = true_beta[1:] if x.has_intercept else true_beta
        support = np.flatnonzero(slopes)
        sparsity = max(1, support.size)
        p = slopes.size
        penalty = lasso_penalty_rule(n, p, noise_sigma, t, column_bound)
        kappa = estimate_restricted_eigenvalue(x, support, re_probes,
                                               stream.split(0xE16E))
        bound = 9.0 * penalty ** 2 * sparsity / kappa
    else:
        raise DomainError(f"unknown estimator {estimator!r}")
    errors = np.empty(replicates)
    for r in range(replicates):
        sub = stream_split(stream, r)
        y = signal + noise_sigma * sub.normals(n)
        if estimator == "ols":
            beta_hat = ols_fit(x, y).beta
        else:
            beta_hat = lasso_fit(x, y, penalty, tol=1e-8).beta
        gap = x.matrix @ (beta_hat - true_beta)
        errors[r] = float((gap ** 2).sum() / n)
    return PredictionErrorResult(
        mean_error=float(errors.mean()),
        bound_value=float(bound),
        violation_rate=float(np.mean(errors > bound)),
        errors=errors,
        penalty=penalty,
        restricted_eigenvalue=kappa,
    )


# -- CSV ingestion -------------------------------------------------------------------


def load_regression_csv(path, intercept: bool = True):
    """Header CSV whose first column is named ``y``; remaining columns are
    regressors. Returns ``(DesignMatrix, y, names)``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    if not header or header[0] != "y":
        raise DomainError("first CSV column must be named 'y'")
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=float, ndmin=2)
    y = data[:, 0]
    x = data[:, 1:]
    return design_matrix(x, intercept=intercept), y, header[1:]
