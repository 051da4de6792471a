"""Configuration-driven experiment runners.

Every experiment draws exclusively from replicate-indexed child streams of
one root seed, so a report is a pure function of (config, seed) and is
invariant to how replicates are distributed across workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

import numpy as np

from . import concentration as con
from . import distributions as d
from . import estimation as est
from . import glm
from . import hypothesis as hyp
from . import regression as reg
from . import stochastic as sto
from .errors import DomainError
from .rng import RandomStream, stream_split

__all__ = ["ExperimentConfig", "Metric", "ReportEnvelope", "run_experiment",
           "experiment_tags", "parse_config_text", "parse_config_file",
           "EXPERIMENTS"]


# -- config -------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict
    replicates: Optional[int] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise DomainError(f"unknown experiment tag {self.experiment!r}")
        schema = EXPERIMENTS[self.experiment].schema
        for key in self.params:
            if key not in schema:
                raise DomainError(
                    f"unknown key {key!r} for experiment {self.experiment!r}")

    def resolved_params(self) -> dict:
        schema = EXPERIMENTS[self.experiment].schema
        values = {name: default for name, (_, default) in schema.items()}
        values.update(self.params)
        if self.replicates is not None and "replicates" in schema:
            values["replicates"] = self.replicates
        for name, value in values.items():
            kind, _ = schema[name]
            if not isinstance(value, kind):
                raise DomainError(
                    f"key {name!r} expects {kind.__name__}, got {value!r}")
        return values


def _parse_scalar(text: str):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"malformed value {text!r}") from None


def parse_config_text(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment. ``overrides``
    (typically command-line flags) win over file values."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise DomainError(f"line {lineno}: expected key = value")
        key, value = body.split("=", 1)
        raw[key.strip()] = _parse_scalar(value)
    raw.update(overrides or {})
    if "experiment" not in raw:
        raise DomainError("config is missing the key 'experiment'")
    if "seed" not in raw:
        raise DomainError("config is missing the key 'seed' (no wall-clock default)")
    experiment = raw.pop("experiment")
    seed = raw.pop("seed")
    if not isinstance(seed, int):
        raise DomainError("key 'seed' must be an integer")
    replicates = raw.pop("replicates", None)
    if replicates is not None and not isinstance(replicates, int):
        raise DomainError("key 'replicates' must be an integer")
    out = raw.pop("out", None)
    return ExperimentConfig(experiment=experiment, seed=seed, params=raw,
                            replicates=replicates, out=out)


def parse_config_file(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), overrides)


# -- reports --------------------------------------------------------------------


@dataclass(frozen=True)
class Metric:
    name: str
    value: float
    method: str
    tolerance: Optional[float] = None
    target: Optional[float] = None
    se: Optional[float] = None
    passed: Optional[bool] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class ReportEnvelope:
    experiment: str
    seed: int
    params: dict
    metrics: tuple
    wall_time_s: float

    @property
    def passed(self) -> bool:
        return all(m.passed is not False for m in self.metrics)

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "seed": self.seed,
            "params": self.params,
            "metrics": [m.to_dict() for m in self.metrics],
            "passed": self.passed,
            "wall_time_s": self.wall_time_s,
        }


def _aux(root: RandomStream, k: int) -> RandomStream:
    """Auxiliary child stream outside the replicate id namespace."""
    return root.split((1 << 48) + k)


def _within(name, value, target, tolerance, method, se=None) -> Metric:
    return Metric(name=name, value=float(value), target=float(target),
                  tolerance=float(tolerance), se=se, method=method,
                  passed=bool(abs(value - target) <= tolerance))


def _at_most(name, value, ceiling, method, se=None) -> Metric:
    return Metric(name=name, value=float(value), target=float(ceiling),
                  tolerance=0.0, se=se, method=method,
                  passed=bool(value <= ceiling))


def _at_least(name, value, floor, method, se=None) -> Metric:
    return Metric(name=name, value=float(value), target=float(floor),
                  tolerance=0.0, se=se, method=method,
                  passed=bool(value >= floor))


# -- fan-out ----------------------------------------------------------------------


def fan_out(task: Callable, n_replicates: int, root: RandomStream,
            workers: int = 1) -> list:
    """Run ``task(replicate_index, child_stream)`` for every replicate.

    Replicate r always receives ``stream_split(root, r)`` and results come
    back in replicate order, so the output is identical for any worker
    count; ``workers > 1`` only distributes the labor.
    """
    if workers <= 1:
        return [task(r, stream_split(root, r)) for r in range(n_replicates)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(partial(_fan_one, task, root), range(n_replicates),
                             chunksize=max(1, n_replicates // (8 * workers))))


def _fan_one(task, root, r):
    return task(r, stream_split(root, r))


# -- individual experiments ---------------------------------------------------------


def _run_mse_variance(p, root, workers):
    n, reps, sigma2 = p["n"], p["replicates"], 1.0
    draws = root.normals(reps * n).reshape(reps, n)
    ss = ((draws - draws.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
    cs = [1.0 / (n + 1), 1.0 / n, 1.0 / (n - 1)]
    labels = ["c_over_n_plus_1", "c_over_n", "c_over_n_minus_1"]
    metrics = []
    empirical = []
    for c, label in zip(cs, labels):
        emp = float(((c * ss - sigma2) ** 2).mean())
        empirical.append(emp)
        theory = est.variance_mse(n, c, sigma2)
        metrics.append(_within(f"mse_{label}", emp, theory, p["rel_tol"] * theory,
                               method="scaled_deviation_mse"))
    metrics.append(Metric(name="empirical_min_at_shrunk_scale",
                          value=float(np.argmin(empirical)), target=0.0,
                          tolerance=0.0, method="mse_minimizer",
                          passed=bool(np.argmin(empirical) == 0)))
    return metrics


def _task_ci_cover(n, delta, r, stream):
    return est.ci_mean_t(stream.normals(n), delta).covers(0.0)


def _run_ci_coverage(p, root, workers):
    hits = fan_out(partial(_task_ci_cover, p["n"], p["delta"]),
                   p["replicates"], root, workers)
    rate = float(np.mean(hits))
    return [_within("coverage", rate, 1.0 - p["delta"], p["tolerance"],
                    method="studentized_interval",
                    se=math.sqrt(rate * (1 - rate) / len(hits)))]


def _task_jl(cfg, r, stream):
    return con.jl_trial(cfg, stream).success


def _run_jl(p, root, workers):
    cfg = con.JLConfig(n_points=p["n_points"], ambient_dim=p["ambient_dim"],
                       epsilon=p["epsilon"], delta=p["delta"])
    wins = fan_out(partial(_task_jl, cfg), p["replicates"], root, workers)
    rate = float(np.mean(wins))
    return [
        Metric(name="target_dim", value=float(cfg.m), method="distortion_dim_rule"),
        _at_least("success_rate", rate, 1.0 - cfg.delta,
                  method="all_pairs_distortion",
                  se=math.sqrt(max(rate * (1 - rate), 1e-12) / len(wins))),
    ]


def _task_er_connected(n_vertices, prob, r, stream):
    return con.er_metrics(con.er_sample(n_vertices, prob, stream)).is_connected


def _run_er(p, root, workers):
    n = p["n_vertices"]
    metrics = []
    for label, c, check, floor_or_ceil in (
        ("subcritical", p["c_low"], _at_most, p["max_freq_low"]),
        ("supercritical", p["c_high"], _at_least, p["min_freq_high"]),
    ):
        prob = min(1.0, c * math.log(n) / n)
        task = partial(_task_er_connected, n, prob)
        sub_root = _aux(root, 1 if label == "subcritical" else 2)
        hits = fan_out(task, p["graphs"], sub_root, workers)
        freq = float(np.mean(hits))
        metrics.append(check(f"connectivity_{label}", freq, floor_or_ceil,
                             method="edge_threshold_scan"))
    return metrics


def _run_mle(p, root, workers):
    alpha, lam, n, reps = p["alpha"], p["lam"], p["n"], p["replicates"]
    spec = d.Gamma(alpha, lam)
    standardized = np.empty((reps, 2))
    for r in range(reps):
        fit = est.mle_fit("gamma", d.dist_sample(spec, stream_split(root, r), n))
        se = fit.standard_errors()
        standardized[r] = (fit.estimate - np.array([alpha, lam])) / se
    law = d.Normal(0.0, 1.0)
    ks_alpha = hyp.ks_statistic(standardized[:, 0], law)
    ks_lam = hyp.ks_statistic(standardized[:, 1], law)
    return [
        _at_most("ks_rate_component", ks_alpha, p["ks_tol"], method="standardized_mle_ks"),
        _at_most("ks_shape_component", ks_lam, p["ks_tol"], method="standardized_mle_ks"),
    ]


def _run_regression(p, root, workers):
    n, n_slopes, reps = p["n"], p["n_slopes"], p["replicates"]
    design = reg.design_matrix(_aux(root, 1).normals(n * n_slopes).reshape(n, n_slopes))
    beta = np.concatenate([[1.0], np.linspace(0.5, 1.5, n_slopes)])
    null_design = reg.design_matrix(design.matrix[:, 1:2], intercept=True)
    df = n - n_slopes - 1
    estimates = np.empty((reps, n_slopes + 1))
    scaled_var = np.empty(reps)
    covered = 0
    size_hits = 0
    for r in range(reps):
        sub = stream_split(root, r)
        noise = sub.normals(n)
        y = design.matrix @ beta + noise
        fit = reg.ols_fit(design, y)
        estimates[r] = fit.beta
        scaled_var[r] = df * fit.sigma2_hat
        covered += reg.coef_interval(fit, 1, 0.05).covers(beta[1])
        y0 = 1.0 + 0.7 * design.matrix[:, 1] + sub.normals(n)
        report = reg.f_test_nested(reg.ols_fit(design, y0),
                                   reg.ols_fit(null_design, y0))
        size_hits += report.reject(0.05)
    se_beta = estimates.std(axis=0, ddof=1) / math.sqrt(reps)
    bias = np.abs(estimates.mean(axis=0) - beta)
    ks = hyp.ks_statistic(scaled_var, d.ChiSquared(df))
    coverage = covered / reps
    size = size_hits / reps
    return [
        _at_most("max_beta_bias_in_se", float((bias / se_beta).max()), 4.0,
                 method="unbiasedness_check"),
        _at_most("sigma2_ks", ks, p["ks_tol"], method="residual_chi2_law"),
        _within("coef_coverage", coverage, 0.95, p["coverage_tol"],
                method="coef_t_interval",
                se=math.sqrt(coverage * (1 - coverage) / reps)),
        _within("nested_f_size", size, 0.05, p["size_tol"],
                method="nested_f_test",
                se=math.sqrt(size * (1 - size) / reps)),
    ]


def _task_lasso_error(true_beta, matrix, penalty, r, stream):
    y = matrix @ true_beta + stream.normals(matrix.shape[0])
    design = reg.DesignMatrix(matrix, has_intercept=False)
    beta_hat = reg.lasso_fit(design, y, penalty, tol=1e-8).beta
    gap = matrix @ (beta_hat - true_beta)
    return float((gap ** 2).sum() / matrix.shape[0])


def _run_lasso_bound(p, root, workers):
    n, n_regressors, sparsity, t = p["n"], p["p"], p["s"], p["t"]
    m = _aux(root, 1).normals(n * n_regressors).reshape(n, n_regressors)
    m /= np.sqrt((m ** 2).sum(axis=0) / n)
    beta = np.zeros(n_regressors)
    beta[:sparsity] = np.linspace(1.0, 2.0, sparsity)
    design = reg.DesignMatrix(m, has_intercept=False)
    penalty = reg.lasso_penalty_rule(n, n_regressors, 1.0, t)
    kappa = reg.estimate_restricted_eigenvalue(design, np.arange(sparsity),
                                               p["re_probes"], _aux(root, 2))
    bound = 9.0 * penalty ** 2 * sparsity / kappa
    errors = fan_out(partial(_task_lasso_error, beta, m, penalty),
                     p["replicates"], root, workers)
    violation = float(np.mean(np.asarray(errors) > bound))
    ceiling = 2.0 * math.exp(-t * t / 2.0) + 3.0 * math.sqrt(
        0.25 / p["replicates"])
    q, _ = np.linalg.qr(_aux(root, 3).normals(40 * 4).reshape(40, 4))
    ortho = q * math.sqrt(40)
    y = ortho @ np.array([1.0, -0.5, 0.0, 0.0]) + _aux(root, 4).normals(40)
    fit = reg.lasso_fit(reg.DesignMatrix(ortho, has_intercept=False), y, 0.1)
    oracle = np.array([reg.soft_threshold(ortho[:, j] @ y / 40.0, 0.1)
                       for j in range(4)])
    oracle_gap = float(np.abs(fit.beta - oracle).max())
    return [
        Metric(name="penalty", value=penalty, method="noise_domination_rule"),
        Metric(name="restricted_eigenvalue", value=kappa, method="cone_search"),
        _at_most("violation_rate", violation, ceiling, method="sparse_risk_bound"),
        _at_most("soft_threshold_gap", oracle_gap, 1e-8,
                 method="orthonormal_oracle"),
    ]


def _run_glm(p, root, workers):
    n, n_slopes, reps = p["n"], p["n_slopes"], p["replicates"]
    covariates = _aux(root, 1).normals(n * n_slopes).reshape(n, n_slopes)
    design = reg.design_matrix(covariates)
    beta = np.concatenate([[0.3], np.linspace(-0.5, 0.8, n_slopes)])
    prob = 1.0 / (1.0 + np.exp(-(design.matrix @ beta)))
    spec = glm.bernoulli_logit()
    covered = 0
    worst_residual = 0.0
    for r in range(reps):
        y = (stream_split(root, r).uniforms(n) < prob).astype(float)
        fit = glm.glm_fit(spec, design, y)
        residual = np.abs(design.matrix.T @ (y - fit.mu)).max()
        scale = 1.0 + np.abs(design.matrix.T @ y).max()
        worst_residual = max(worst_residual, residual / scale)
        covered += glm.glm_wald_ci(fit, 1, 0.05).covers(beta[1])
    coverage = covered / reps
    y = (_aux(root, 2).uniforms(n) < prob).astype(float)
    fit = glm.glm_fit(spec, design, y)
    h = 1e-5
    dim = fit.beta.size
    hess = np.empty((dim, dim))
    loglik = lambda b: spec.loglik(y, design.matrix @ b)
    for i in range(dim):
        for j in range(dim):
            ei = np.zeros(dim); ei[i] = h
            ej = np.zeros(dim); ej[j] = h
            hess[i, j] = (loglik(fit.beta + ei + ej) - loglik(fit.beta + ei - ej)
                          - loglik(fit.beta - ei + ej) + loglik(fit.beta - ei - ej)) / (4 * h * h)
    info_gap = float((np.abs(-hess - fit.fisher_info) / np.abs(fit.fisher_info)).max())
    return [
        _at_most("max_score_residual", worst_residual, 1e-8,
                 method="canonical_score"),
        _within("wald_coverage", coverage, 0.95, p["coverage_tol"],
                method="wald_interval",
                se=math.sqrt(coverage * (1 - coverage) / reps)),
        _at_most("information_fd_gap", info_gap, 1e-4,
                 method="observed_information"),
    ]


def _run_irt(p, root, workers):
    bank = glm.IRTItemBank(a=0.5 + _aux(root, 1).uniforms(p["items"]) * 1.5,
                           b=_aux(root, 2).normals(p["items"]))
    gamma_true = p["ability"]
    prob = bank.success_probability(gamma_true)
    inside = 0
    usable = 0
    for r in range(p["examinees"]):
        y = (stream_split(root, r).uniforms(p["items"]) < prob).astype(float)
        if y.min() == y.max():
            continue
        fit = glm.irt_ability_fit(bank, y)
        usable += 1
        inside += abs(fit.gamma_hat - gamma_true) <= 3.0 * fit.se
    return [_at_least("three_se_capture_rate", inside / usable, p["min_rate"],
                      method="ability_newton_solve")]


def _run_test_size(p, root, workers):
    reps = p["replicates"]
    rejections = {("z", 0.05): 0, ("z", 0.01): 0, ("t", 0.05): 0, ("t", 0.01): 0,
                  ("f", 0.05): 0, ("f", 0.01): 0, ("anova", 0.05): 0, ("anova", 0.01): 0}
    n = p["n"]
    for r in range(reps):
        sub = stream_split(root, r)
        x = sub.normals(n)
        y = sub.normals(n + 2)
        reports = {
            "z": hyp.lrt_mean(x, 0.0, sigma_known=1.0),
            "t": hyp.lrt_mean(x, 0.0),
            "f": hyp.f_test_variances(x, y),
            "anova": hyp.anova_one_way([x[: n // 2], x[n // 2:], y]),
        }
        for name, report in reports.items():
            for alpha in (0.05, 0.01):
                rejections[(name, alpha)] += report.reject(alpha)
    metrics = []
    for (name, alpha), count in rejections.items():
        rate = count / reps
        se = math.sqrt(alpha * (1 - alpha) / reps)
        metrics.append(_within(f"size_{name}_{alpha}", rate, alpha, 3.0 * se,
                               method="null_rejection_rate", se=se))
    return metrics


def _run_wilks(p, root, workers):
    res_z = hyp.wilks_null_simulation("z", p["n_z"], p["replicates_z"],
                                      _aux(root, 1))
    res_t = hyp.wilks_null_simulation("t", p["n_t"], p["replicates_t"],
                                      _aux(root, 2))
    res_l = hyp.wilks_null_simulation("logistic", p["n_logistic"],
                                      p["replicates_logistic"],
                                      _aux(root, 3))
    return [
        _at_most("ks_z", res_z.ks_distance, p["ks_z_tol"], method="exact_chi2_law"),
        _at_most("ks_t", res_t.ks_distance, p["ks_t_tol"], method="large_sample_chi2"),
        _at_most("ks_logistic", res_l.ks_distance, p["ks_logistic_tol"],
                 method="large_sample_chi2"),
    ]


def _run_brownian(p, root, workers):
    grid = sto.uniform_grid(p["horizon"], p["steps"])
    qv_gaps = []
    for r in range(p["paths"]):
        path = sto.brownian_sample(grid, 1, stream_split(root, r))
        qv_gaps.append(abs(sto.quadratic_variation(path) - p["horizon"]))
    terminal = sto.brownian_sample(sto.uniform_grid(p["horizon"], 2), 100_000,
                                   _aux(root, 1)).values[-1]
    var_tol = 4.0 * math.sqrt(2.0) * p["horizon"] / math.sqrt(terminal.size)
    return [
        _at_most("mean_qv_gap", float(np.mean(qv_gaps)), p["qv_tol"],
                 method="squared_increment_sum"),
        _within("terminal_variance", float(terminal.var()), p["horizon"], var_tol,
                method="increment_accumulation"),
    ]


def _run_ito(p, root, workers):
    grid = sto.uniform_grid(1.0, p["steps"])
    identity_gaps = []
    integrals = []
    for r in range(p["paths"]):
        path = sto.brownian_sample(grid, 1, stream_split(root, r))
        b = path.values[:, 0]
        value = sto.ito_integral(b[:-1], path)
        integrals.append(value)
        identity_gaps.append(abs(value - (0.5 * b[-1] ** 2 - 0.5)))
    integrals = np.asarray(integrals)
    se_mean = integrals.std(ddof=1) / math.sqrt(integrals.size)
    second = integrals ** 2
    se_second = second.std(ddof=1) / math.sqrt(second.size)
    return [
        _at_most("mean_identity_gap", float(np.mean(identity_gaps)),
                 p["identity_tol"], method="left_endpoint_sum"),
        _within("martingale_mean", float(integrals.mean()), 0.0, 4.0 * se_mean,
                method="zero_expectation", se=se_mean),
        _within("second_moment", float(second.mean()), 0.5, 4.0 * se_second,
                method="squared_integral_energy", se=se_second),
    ]


def _run_feynman_kac(p, root, workers):
    res = sto.feynman_kac_mc(lambda x: np.zeros(len(x)),
                             lambda x: (np.abs(x[:, 0]) <= 1.0).astype(float),
                             1.0, 0.0, 1, p["paths"], p["steps"],
                             _aux(root, 1))
    target = float(d.dist_cdf(d.Normal(0.0, 1.0), 1.0) - d.dist_cdf(d.Normal(0.0, 1.0), -1.0))
    controlled = sto.feynman_kac_mc(lambda x: np.full(len(x), 0.5),
                                    lambda x: (np.abs(x[:, 0]) <= 1.0).astype(float),
                                    1.0, 0.0, 1, p["paths_control"], p["steps"],
                                    _aux(root, 2))
    ceiling = math.exp(-0.5) + 4.0 * controlled.standard_error
    return [
        _within("interval_mass", res.estimate, target,
                4.0 * res.standard_error, method="path_integral_mean",
                se=res.standard_error),
        _at_most("exponential_control", abs(controlled.estimate), ceiling,
                 method="damped_payoff_bound", se=controlled.standard_error),
    ]


def _run_bs_price(p, root, workers):
    params = sto.BSParams(spot=p["spot"], strike=p["strike"], rate=p["rate"],
                          volatility=p["volatility"], maturity=p["maturity"])
    closed = sto.black_scholes_price(params)
    mc = sto.bs_mc_price(params, p["paths"], _aux(root, 1))
    residuals = [
        abs(sto.bs_pde_residual(sto.BSParams(
            spot=x, strike=1.0, rate=p["rate"], volatility=p["volatility"],
            maturity=1.0, valuation_time=t)))
        for x in np.linspace(0.6, 1.6, 10)
        for t in np.linspace(0.05, 0.9, 10)
    ]
    return [
        Metric(name="closed_form_price", value=closed.price, method="terminal_payoff_transform"),
        Metric(name="delta", value=closed.delta, method="terminal_payoff_transform"),
        _within("mc_gap", mc.estimate, closed.price, 3.0 * mc.standard_error,
                method="risk_neutral_mc", se=mc.standard_error),
        _at_most("max_pde_residual", max(residuals), p["pde_tol"],
                 method="finite_difference_pde"),
    ]


def _run_gauss_conc(p, root, workers):
    grid = np.linspace(0.0, 4.0, p["grid_points"])
    res = sto.gaussian_concentration_experiment("norm", p["k"], p["samples"],
                                                grid, _aux(root, 1))
    excess = res.empirical - (res.bound + 3.0 * res.standard_error)
    return [_at_most("max_excess_over_bound", float(excess.max()), 0.0,
                     method="lipschitz_tail_bound")]


def _task_js_loss(p_dim, r, stream):
    x = stream.normals(p_dim)
    return float((est.james_stein(x, 1.0) ** 2).sum())


def _run_james_stein(p, root, workers):
    losses = fan_out(partial(_task_js_loss, p["dim"]), p["replicates"], root,
                     workers)
    mse = float(np.mean(losses))
    # risk of the shrunk estimate at a zero mean: dim - (dim - 2) = 2
    return [_within("shrunk_mse", mse, p["dim"] - (p["dim"] - 2.0),
                    p["tolerance"], method="quadratic_risk",
                    se=float(np.std(losses, ddof=1) / math.sqrt(len(losses))))]


def _run_bayes(p, root, workers):
    n = p["n"]
    succ = est.conjugate_update(est.BetaPosterior(1.0, 1.0), successes=n, trials=n)
    rule = succ.predictive_success
    prior = est.NormalPosterior(mean=0.0, variance=1.0)
    reps = p["replicates"]
    post_losses = np.empty(reps)
    mle_losses = np.empty(reps)
    for r in range(reps):
        sub = stream_split(root, r)
        mu = sub.normals(1)[0]  # the prior really generates the target
        x = mu + sub.normals(n)
        post = est.conjugate_update(prior, sample_mean=float(x.mean()), n=n,
                                    noise_variance=1.0)
        post_losses[r] = (post.mean - mu) ** 2
        mle_losses[r] = (x.mean() - mu) ** 2
    return [
        _within("rule_of_succession", rule, (n + 1.0) / (n + 2.0), 1e-12,
                method="conjugate_posterior_mean"),
        _at_most("posterior_mean_risk_ratio",
                 float(post_losses.mean() / mle_losses.mean()), 1.0,
                 method="bayes_risk_comparison"),
    ]


# -- registry -------------------------------------------------------------------------


@dataclass(frozen=True)
class Experiment:
    tag: str
    runner: Callable
    schema: dict  # name -> (type, default)


EXPERIMENTS = {
    e.tag: e for e in [
        Experiment("mse-variance", _run_mse_variance,
                   {"n": (int, 10), "replicates": (int, 200_000),
                    "rel_tol": (float, 0.02)}),
        Experiment("ci-coverage", _run_ci_coverage,
                   {"n": (int, 5), "delta": (float, 0.05),
                    "replicates": (int, 100_000), "tolerance": (float, 0.01)}),
        Experiment("jl", _run_jl,
                   {"n_points": (int, 50), "ambient_dim": (int, 1000),
                    "epsilon": (float, 0.25), "delta": (float, 0.05),
                    "replicates": (int, 200)}),
        Experiment("er", _run_er,
                   {"n_vertices": (int, 2000), "graphs": (int, 200),
                    "c_low": (float, 0.7), "c_high": (float, 1.3),
                    "max_freq_low": (float, 0.05), "min_freq_high": (float, 0.8)}),
        Experiment("mle", _run_mle,
                   {"alpha": (float, 3.0), "lam": (float, 2.0), "n": (int, 5000),
                    "replicates": (int, 500), "ks_tol": (float, 0.05)}),
        Experiment("regression", _run_regression,
                   {"n": (int, 50), "n_slopes": (int, 3),
                    "replicates": (int, 10_000), "ks_tol": (float, 0.02),
                    "coverage_tol": (float, 0.01), "size_tol": (float, 0.007)}),
        Experiment("lasso-bound", _run_lasso_bound,
                   {"n": (int, 100), "p": (int, 200), "s": (int, 3),
                    "t": (float, 2.0), "replicates": (int, 200),
                    "re_probes": (int, 2000)}),
        Experiment("glm", _run_glm,
                   {"n": (int, 2000), "n_slopes": (int, 3),
                    "replicates": (int, 5000), "coverage_tol": (float, 0.015)}),
        Experiment("irt", _run_irt,
                   {"items": (int, 40), "examinees": (int, 10_000),
                    "ability": (float, 0.5), "min_rate": (float, 0.99)}),
        Experiment("test-size", _run_test_size,
                   {"n": (int, 10), "replicates": (int, 10_000)}),
        Experiment("wilks", _run_wilks,
                   {"n_z": (int, 8), "replicates_z": (int, 20_000),
                    "n_t": (int, 200), "replicates_t": (int, 20_000),
                    "n_logistic": (int, 2000), "replicates_logistic": (int, 5000),
                    "ks_z_tol": (float, 0.01), "ks_t_tol": (float, 0.02),
                    "ks_logistic_tol": (float, 0.02)}),
        Experiment("brownian", _run_brownian,
                   {"horizon": (float, 1.0), "steps": (int, 100_000),
                    "paths": (int, 100), "qv_tol": (float, 0.02)}),
        Experiment("ito", _run_ito,
                   {"steps": (int, 100_000), "paths": (int, 100),
                    "identity_tol": (float, 0.02)}),
        Experiment("feynman-kac", _run_feynman_kac,
                   {"paths": (int, 1_000_000), "paths_control": (int, 100_000),
                    "steps": (int, 100)}),
        Experiment("bs-price", _run_bs_price,
                   {"spot": (float, 100.0), "strike": (float, 100.0),
                    "rate": (float, 0.05), "volatility": (float, 0.2),
                    "maturity": (float, 1.0), "paths": (int, 1_000_000),
                    "pde_tol": (float, 1e-5)}),
        Experiment("gauss-conc", _run_gauss_conc,
                   {"k": (int, 100), "samples": (int, 1_000_000),
                    "grid_points": (int, 17)}),
        Experiment("james-stein", _run_james_stein,
                   {"dim": (int, 10), "replicates": (int, 100_000),
                    "tolerance": (float, 0.05)}),
        Experiment("bayes", _run_bayes,
                   {"n": (int, 50), "replicates": (int, 2000)}),
    ]
}


def experiment_tags() -> list[str]:
    return sorted(EXPERIMENTS)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ReportEnvelope:
    """Execute one experiment; the report depends only on (config, seed)."""
    params = config.resolved_params()
    root = RandomStream(config.seed)
    start = time.perf_counter()
    metrics = EXPERIMENTS[config.experiment].runner(params, root, workers)
    elapsed = time.perf_counter() - start
    return ReportEnvelope(experiment=config.experiment, seed=config.seed,
                          params=params, metrics=tuple(metrics),
                          wall_time_s=elapsed)
