"""Experiment grids, simulation scenario runners, and CSV reporting.

Each runner simulates a selection problem over a parameter grid, applies
the configured inference methods per trial, and aggregates interval widths
and coverage into ResultRow records.  All randomness derives from the
config seed through named substreams, so a (config, seed) pair pins the
statistical content of the output exactly.

Scenario notes
--------------
* winner / filedrawer grids: the mean profile has range C at the reference
  size m = 10; when m grows the same per-index formula is reused without
  rescaling, so extra candidates land far below the maximum.
* winner-np: samples are signal_frac * mu01 + (1 - signal_frac) * xi with
  xi ~ Beta(a, b) iid, keeping everything inside [0, 1]; mu01 is the mean
  profile mapped affinely onto [0, 1].
* conditional baselines run only where defined: iid Gaussian winner
  problems and the two-candidate setting; the nonparametric runner uses
  the normal-approximation heuristic arm that is being stress-tested.
"""

from __future__ import annotations

import csv
import math
import os
import time
from dataclasses import dataclass, fields, replace

import numpy as np

from .erm import LossMatrix, erm_risk_bound, load_loss_matrix
from .lasso import (
    Design,
    column_max_quantile,
    enumerate_plausible_models,
    lasso_solve,
    posi_intervals,
    projection_truth,
)
from .sphere import SphereProblem, cap_quantile, sphere_interval
from .stats_core import (
    GaussianNoise,
    RngSpec,
    betting_capital_peaks,
    betting_interval_from_peaks,
    bentkus_width,
    conservative_rank,
    hoeffding_width,
    max_abs_quantile_iid,
    normal_quantile,
)
from .theory_core import BudgetSplit
from .winner import (
    SampleMatrix,
    conditional_winner_interval,
    np_filedrawer_region,
    np_winner_interval,
    two_candidate_interval,
)

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "ConfigError",
    "generate_mu",
    "generate_mu_reference_scaled",
    "rbf_covariance",
    "run_experiment",
    "run_coverage",
    "write_csv",
    "read_csv",
    "load_config",
    "CSV_HEADER",
]

CSV_HEADER = ("scenario,method,param_theta,param_C,param_m,param_phi,"
              "median_width,q05_width,q95_width,coverage,runtime_ms")

KINDS = ("figure1", "winner", "filedrawer", "winner-np", "filedrawer-np",
         "lasso", "erm", "sphere", "coverage")


class ConfigError(ValueError):
    """Bad experiment configuration."""


@dataclass
class ExperimentConfig:
    kind: str = "winner"
    alpha: float = 0.1
    nu: float = None          # defaults to 0.1 * alpha
    trials: int = 100
    seed: int = 0
    out: str = None
    n_draws: int = 10_000
    # winner / filedrawer grids
    theta_grid: tuple = (0.5, 2.0, 4.0)
    c_grid: tuple = (10.0, 30.0)
    m_grid: tuple = (10, 100)
    cov_kinds: tuple = ("iid", "rbf")
    phi: float = 20.0
    threshold: float = -1.0
    # figure1
    delta_grid: tuple = tuple(float(v) for v in range(11))
    # nonparametric
    n_grid: tuple = (100, 1000)
    m: int = 50
    beta_a: float = 2.0
    beta_b: float = 5.0
    signal_frac: float = 0.9
    bound_kind: str = "bentkus"
    ci_kind: str = "betting"
    # lasso
    d: int = 8
    n: int = 200
    lambda0: float = 6.0
    sparsity: float = 0.5
    p_max: int = 2000
    sigma: float = 1.0
    # erm
    n_hypotheses: int = 50
    # sphere
    d_grid: tuple = (3, 5)
    mu_norm: float = 3.0
    # coverage dispatch and user data
    problem: str = "winner"
    data: str = None

    def budget(self) -> BudgetSplit:
        nu = 0.1 * self.alpha if self.nu is None else self.nu
        try:
            return BudgetSplit(self.alpha, nu)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown problem kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        self.budget()
        return self


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    method: str
    param_theta: float = None
    param_C: float = None
    param_m: int = None
    param_phi: float = None
    median_width: float = None
    q05_width: float = None
    q95_width: float = None
    coverage: float = None
    runtime_ms: int = 0

    def __post_init__(self):
        ok = [w for w in (self.q05_width, self.median_width, self.q95_width)
              if w is not None and not math.isnan(w)]
        if len(ok) == 3 and not (ok[0] <= ok[1] <= ok[2]):
            raise ValueError("width quantiles must be ordered q05 <= median <= q95")
        if self.coverage is not None and not math.isnan(self.coverage):
            if not (0.0 <= self.coverage <= 1.0):
                raise ValueError("coverage must lie in [0, 1]")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return ""
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def write_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in (
                r.scenario, r.method, r.param_theta, r.param_C, r.param_m,
                r.param_phi, r.median_width, r.q05_width, r.q95_width,
                r.coverage, r.runtime_ms)) + "\n")


def read_csv(path):
    """Round-trip reader for the documented schema."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER.split(","):
            raise ConfigError("unexpected CSV header")
        for rec in reader:
            def num(key, cast=float):
                v = rec[key]
                return None if v == "" else cast(v)
            rows.append(ResultRow(
                rec["scenario"], rec["method"],
                num("param_theta"), num("param_C"),
                num("param_m", lambda s: int(float(s))), num("param_phi"),
                num("median_width"), num("q05_width"), num("q95_width"),
                num("coverage"), num("runtime_ms", lambda s: int(float(s))) or 0))
    return rows


# ---------------------------------------------------------------------------
# Config files: flat "key = value" lines
# ---------------------------------------------------------------------------

_TUPLE_KEYS = {"theta_grid", "c_grid", "m_grid", "cov_kinds", "delta_grid",
               "n_grid", "d_grid"}
_STR_KEYS = {"kind", "out", "bound_kind", "ci_kind", "problem", "data"}
_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _parse_scalar(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def load_config(path, base: ExperimentConfig = None) -> ExperimentConfig:
    """Parse a flat key=value config file ('#' starts a comment).

    LOCSIM_SEED in the environment overrides any configured seed.
    """
    cfg = base if base is not None else ExperimentConfig()
    updates = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_NAMES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in _TUPLE_KEYS:
                items = [v for v in (s.strip() for s in value.split(",")) if v]
                updates[key] = tuple(_parse_scalar(v) for v in items)
            elif key in _STR_KEYS:
                updates[key] = value
            else:
                updates[key] = _parse_scalar(value)
    cfg = replace(cfg, **updates)
    return apply_env_seed(cfg)


def apply_env_seed(cfg: ExperimentConfig) -> ExperimentConfig:
    env = os.environ.get("LOCSIM_SEED")
    if env is not None:
        try:
            cfg = replace(cfg, seed=int(env))
        except ValueError:
            raise ConfigError(f"LOCSIM_SEED must be an integer, got {env!r}") from None
    return cfg


# ---------------------------------------------------------------------------
# Mean profiles and covariances
# ---------------------------------------------------------------------------

def generate_mu(m: int, theta: float, C: float) -> np.ndarray:
    """Mean profile -|i - (m+1)/2|^theta rescaled so max - min = C exactly."""
    if m < 2:
        raise ConfigError("m must be >= 2")
    if theta <= 0 or C <= 0:
        raise ConfigError("theta and C must be positive")
    i = np.arange(1, m + 1, dtype=float)
    raw = -np.abs(i - 0.5 * (m + 1)) ** theta
    spread = raw.max() - raw.min()
    if spread == 0.0:
        raise ConfigError("degenerate mean profile (all entries equal)")
    mu = raw * (C / spread)
    return mu - mu.max()


def generate_mu_reference_scaled(m: int, theta: float, C: float,
                                 m_ref: int = 10) -> np.ndarray:
    """Mean profile whose scale is fixed at the reference size m_ref.

    For m > m_ref the range exceeds C: the added candidates fall far below
    the maximum instead of compressing the profile.
    """
    if m < 2:
        raise ConfigError("m must be >= 2")
    i_ref = np.arange(1, m_ref + 1, dtype=float)
    raw_ref = -np.abs(i_ref - 0.5 * (m_ref + 1)) ** theta
    scale = C / (raw_ref.max() - raw_ref.min())
    i = np.arange(1, m + 1, dtype=float)
    mu = -np.abs(i - 0.5 * (m + 1)) ** theta * scale
    return mu - mu.max()


def rbf_covariance(m: int, phi: float) -> np.ndarray:
    idx = np.arange(m, dtype=float)
    diff = idx[:, None] - idx[None, :]
    return np.exp(-(diff**2) / (2.0 * phi**2))


# ---------------------------------------------------------------------------
# Shared helpers for the simulation runners
# ---------------------------------------------------------------------------

def _width_row(scenario, method, widths, covered, runtime_ms, **params) -> ResultRow:
    widths = np.asarray(widths, dtype=float)
    widths = widths[~np.isnan(widths)]
    if widths.size == 0:
        med = q05 = q95 = None
    else:
        # Order statistics, no interpolation: infinite widths (degenerate
        # conditional intervals) stay representable.
        med = float(np.quantile(widths, 0.5, method="lower"))
        q05 = float(np.quantile(widths, 0.05, method="lower"))
        q95 = float(np.quantile(widths, 0.95, method="lower"))
    cov = float(np.mean(covered)) if covered is not None else None
    return ResultRow(scenario, method, median_width=med, q05_width=q05,
                     q95_width=q95, coverage=cov, runtime_ms=runtime_ms, **params)


class _SharedMaxStat:
    """Shared draw table for per-trial subset quantiles of max |Z_i|/sigma_i.

    One table of standardized draws serves every trial of a grid cell:
    restricting a joint Gaussian draw to a subset of coordinates is an exact
    draw from the restricted covariance, and the conservative rank keeps the
    quantile estimate upward biased.
    """

    def __init__(self, noise: GaussianNoise, rng: RngSpec, n_draws: int):
        gen = rng.generator()
        z = noise.sample(gen, n_draws)
        self.abs_std = np.abs(z) / noise.marginal_scales
        self.n_draws = n_draws

    def quantile(self, alpha: float, mask=None) -> float:
        stats = (self.abs_std if mask is None else self.abs_std[:, mask]).max(axis=1)
        rank = conservative_rank(alpha, self.n_draws)
        return float(np.partition(stats, rank - 1)[rank - 1])


def _iid_quantile_cache(alpha: float):
    cache = {}

    def q(k: int) -> float:
        if k not in cache:
            cache[k] = max_abs_quantile_iid(k, alpha)
        return cache[k]

    return q


# ---------------------------------------------------------------------------
# figure1: two candidates, vary the mean gap
# ---------------------------------------------------------------------------

def run_figure1(config: ExperimentConfig):
    budget = config.budget()
    alpha, nu = budget.alpha, budget.nu
    rows = []
    q_sim = 2.0 * max_abs_quantile_iid(2, alpha)
    q_nom = 2.0 * max_abs_quantile_iid(1, alpha)
    for di, delta in enumerate(config.delta_grid):
        t0 = time.perf_counter()
        mu = np.array([0.0, float(delta)])
        gen = RngSpec(config.seed, 100 + di).generator()
        ys = mu + gen.standard_normal((config.trials, 2))
        widths = {k: [] for k in ("local", "simultaneous", "conditional", "nominal")}
        covered = {k: [] for k in widths}
        for y in ys:
            win = int(np.argmax(y))
            truth = mu[win]
            iv = two_candidate_interval(y, budget, 1.0)
            widths["local"].append(iv.widths[0])
            covered["local"].append(abs(truth - iv.centers[0]) <= iv.half_widths[0])
            widths["simultaneous"].append(q_sim)
            covered["simultaneous"].append(abs(truth - y[win]) <= q_sim / 2.0)
            lo, hi = conditional_winner_interval(y, 1.0, alpha)
            widths["conditional"].append(hi - lo)
            covered["conditional"].append(lo <= truth <= hi)
            widths["nominal"].append(q_nom)
            covered["nominal"].append(abs(truth - y[win]) <= q_nom / 2.0)
        ms = int(1000 * (time.perf_counter() - t0))
        for method in widths:
            rows.append(_width_row(f"figure1:delta={delta:g}", method,
                                   widths[method], covered[method], ms))
    return rows


# ---------------------------------------------------------------------------
# winner & file-drawer grids (parametric)
# ---------------------------------------------------------------------------

def _winner_cell(config, budget, theta, C, m, cov_kind, stream):
    alpha, nu = budget.alpha, budget.nu
    t0 = time.perf_counter()
    mu = generate_mu_reference_scaled(m, theta, C)
    trials = config.trials
    gen = RngSpec(config.seed, stream).generator()
    if cov_kind == "iid":
        ys = mu + gen.standard_normal((trials, m))
        q_iid_loc = _iid_quantile_cache(budget.inference_level)
        margin = 4.0 * max_abs_quantile_iid(m, nu)
        half_sim = max_abs_quantile_iid(m, alpha)
        shared = None
    elif cov_kind == "rbf":
        noise = GaussianNoise(rbf_covariance(m, config.phi))
        ys = mu + noise.sample(gen, trials)
        shared = _SharedMaxStat(noise, RngSpec(config.seed, stream).child(1),
                                config.n_draws)
        margin = 4.0 * shared.quantile(nu)
        half_sim = shared.quantile(alpha)
    else:
        raise ConfigError(f"unknown covariance kind {cov_kind!r}")
    half_nom = max_abs_quantile_iid(1, alpha)

    widths = {"local": [], "simultaneous": [], "nominal": []}
    covered = {"local": [], "simultaneous": [], "nominal": []}
    run_conditional = cov_kind == "iid" and m >= 2
    if run_conditional:
        widths["conditional"] = []
        covered["conditional"] = []
    for y in ys:
        win = int(np.argmax(y))
        truth = mu[win]
        err = abs(y[win] - truth)
        mask = y >= y[win] - margin
        if cov_kind == "iid":
            half_loc = q_iid_loc(int(mask.sum()))
        else:
            half_loc = shared.quantile(budget.inference_level, mask)
        widths["local"].append(2.0 * half_loc)
        covered["local"].append(err <= half_loc)
        widths["simultaneous"].append(2.0 * half_sim)
        covered["simultaneous"].append(err <= half_sim)
        widths["nominal"].append(2.0 * half_nom)
        covered["nominal"].append(err <= half_nom)
        if run_conditional:
            lo, hi = conditional_winner_interval(y, 1.0, alpha)
            widths["conditional"].append(hi - lo)
            covered["conditional"].append(lo <= truth <= hi)
    ms = int(1000 * (time.perf_counter() - t0))
    phi = config.phi if cov_kind == "rbf" else None
    return [
        _width_row(f"winner:{cov_kind}", method, widths[method], covered[method],
                   ms, param_theta=theta, param_C=C, param_m=m, param_phi=phi)
        for method in widths
    ]


def run_winner(config: ExperimentConfig):
    budget = config.budget()
    rows = []
    stream = 1000
    for cov_kind in config.cov_kinds:
        for theta in config.theta_grid:
            for C in config.c_grid:
                for m in config.m_grid:
                    rows.extend(_winner_cell(config, budget, float(theta),
                                             float(C), int(m), cov_kind, stream))
                    stream += 1
    return rows


def _filedrawer_cell(config, budget, theta, C, m, cov_kind, stream):
    alpha, nu = budget.alpha, budget.nu
    t0 = time.perf_counter()
    mu = generate_mu_reference_scaled(m, theta, C)
    T = config.threshold
    trials = config.trials
    gen = RngSpec(config.seed, stream).generator()
    if cov_kind == "iid":
        ys = mu + gen.standard_normal((trials, m))
        q_iid_loc = _iid_quantile_cache(budget.inference_level)
        margin = 2.0 * max_abs_quantile_iid(m, nu)
        half_sim = max_abs_quantile_iid(m, alpha)
        shared = None
    else:
        noise = GaussianNoise(rbf_covariance(m, config.phi))
        ys = mu + noise.sample(gen, trials)
        shared = _SharedMaxStat(noise, RngSpec(config.seed, stream).child(1),
                                config.n_draws)
        margin = 2.0 * shared.quantile(nu)
        half_sim = shared.quantile(alpha)

    widths = {"local": [], "simultaneous": []}
    covered = {"local": [], "simultaneous": []}
    for y in ys:
        realized = y >= T
        plausible = y >= T - margin
        if cov_kind == "iid":
            half_loc = q_iid_loc(int(plausible.sum())) if plausible.any() else float("nan")
        else:
            half_loc = shared.quantile(budget.inference_level, plausible) \
                if plausible.any() else float("nan")
        if realized.any():
            errs = np.abs(y[realized] - mu[realized])
            covered["local"].append(bool(np.all(errs <= half_loc)))
            covered["simultaneous"].append(bool(np.all(errs <= half_sim)))
            widths["local"].append(2.0 * half_loc)
            widths["simultaneous"].append(2.0 * half_sim)
        else:
            covered["local"].append(True)
            covered["simultaneous"].append(True)
            widths["local"].append(float("nan"))
            widths["simultaneous"].append(float("nan"))
    ms = int(1000 * (time.perf_counter() - t0))
    phi = config.phi if cov_kind == "rbf" else None
    return [
        _width_row(f"filedrawer:{cov_kind}", method,
                   np.asarray(widths[method])[np.isfinite(widths[method])],
                   covered[method], ms,
                   param_theta=theta, param_C=C, param_m=m, param_phi=phi)
        for method in widths
    ]


def run_filedrawer(config: ExperimentConfig):
    budget = config.budget()
    rows = []
    stream = 2000
    for cov_kind in config.cov_kinds:
        for theta in config.theta_grid:
            for C in config.c_grid:
                for m in config.m_grid:
                    rows.extend(_filedrawer_cell(config, budget, float(theta),
                                                 float(C), int(m), cov_kind, stream))
                    stream += 1
    return rows


# ---------------------------------------------------------------------------
# Nonparametric winner (bounded samples)
# ---------------------------------------------------------------------------

def _np_theta_means(config, theta):
    mu = generate_mu(config.m, theta, 1.0)
    mu01 = mu - mu.min()  # range exactly 1, in [0, 1]
    return config.signal_frac * mu01


def run_winner_np(config: ExperimentConfig):
    budget = config.budget()
    alpha, nu = budget.alpha, budget.nu
    m = config.m
    noise_mean = config.beta_a / (config.beta_a + config.beta_b)
    rows = []
    stream = 3000
    for n in config.n_grid:
        n = int(n)
        for theta in config.theta_grid:
            t0 = time.perf_counter()
            signal = _np_theta_means(config, float(theta))
            truth_all = signal + (1.0 - config.signal_frac) * noise_mean
            w_margin = (bentkus_width(n, nu / m) if config.bound_kind == "bentkus"
                        else hoeffding_width(n, nu / m))
            widths = {k: [] for k in ("local", "simultaneous", "conditional", "nominal")}
            covered = {k: [] for k in widths}
            gen = RngSpec(config.seed, stream).generator()
            stream += 1
            for _ in range(config.trials):
                xi = gen.beta(config.beta_a, config.beta_b, size=(n, m))
                data = signal[None, :] + (1.0 - config.signal_frac) * xi
                means = data.mean(axis=0)
                win = int(np.argmax(means))
                truth = truth_all[win]
                plausible = int(np.sum(means >= means[win] - 4.0 * w_margin))
                col = data[:, win]
                if config.ci_kind == "betting":
                    # One capital profile serves all three levels.
                    grid, peaks = betting_capital_peaks(col)
                for method, level in (("local", budget.inference_level / plausible),
                                      ("simultaneous", alpha / m),
                                      ("nominal", alpha)):
                    if config.ci_kind == "betting":
                        lo, hi = betting_interval_from_peaks(grid, peaks, level,
                                                             means[win])
                    else:
                        w = hoeffding_width(n, level)
                        lo, hi = means[win] - w, means[win] + w
                    widths[method].append(hi - lo)
                    covered[method].append(lo <= truth <= hi)
                sd_pool = float(np.mean(data.std(axis=0, ddof=1))) / math.sqrt(n)
                lo, hi = conditional_winner_interval(means, sd_pool, alpha)
                widths["conditional"].append(hi - lo)
                covered["conditional"].append(lo <= truth <= hi)
            ms = int(1000 * (time.perf_counter() - t0))
            for method in widths:
                rows.append(_width_row(f"winner-np:n={n}", method, widths[method],
                                       covered[method], ms, param_theta=float(theta),
                                       param_m=m))
    return rows


def _run_np_on_data(config: ExperimentConfig):
    """User-data mode: one nonparametric analysis of a CSV of observations."""
    if config.data is None:
        raise ConfigError(f"{config.kind} requires data = <csv of samples>")
    raw = np.loadtxt(config.data, delimiter=",", ndmin=2)
    samples = SampleMatrix(raw)
    budget = config.budget()
    t0 = time.perf_counter()
    if config.kind == "winner-np":
        iv = np_winner_interval(samples, budget, config.bound_kind, config.ci_kind)
        scenario = "winner-np:data"
    else:
        iv = np_filedrawer_region(samples, config.threshold, budget,
                                  config.bound_kind, config.ci_kind)
        scenario = "filedrawer-np:data"
    ms = int(1000 * (time.perf_counter() - t0))
    if iv.is_empty:
        return [ResultRow(scenario, "local", param_m=samples.m, runtime_ms=ms)]
    med = float(np.median(iv.widths))
    return [ResultRow(scenario, "local", param_m=samples.m,
                      median_width=med, q05_width=float(iv.widths.min()),
                      q95_width=float(iv.widths.max()), runtime_ms=ms)]


# ---------------------------------------------------------------------------
# LASSO
# ---------------------------------------------------------------------------

def _lasso_design(config, gen) -> Design:
    X = gen.standard_normal((config.n, config.d))
    X /= np.linalg.norm(X, axis=0)
    return Design(X)


def _lasso_beta(config) -> np.ndarray:
    lam = config.lambda0 * math.sqrt(2.0 * math.log(math.e * config.d))
    k = math.ceil(config.sparsity * config.d)
    beta = np.zeros(config.d)
    half = k // 2
    beta[:half] = 2.0 * lam      # strong
    beta[half:k] = lam           # weak
    return beta


def run_lasso(config: ExperimentConfig):
    budget = config.budget()
    lam = config.lambda0 * math.sqrt(2.0 * math.log(math.e * config.d))
    gen = RngSpec(config.seed, 4000).generator()
    design = _lasso_design(config, gen)
    beta = _lasso_beta(config)
    mu = design.X @ beta
    s_nu = 2.0 * column_max_quantile(design, config.sigma, budget.nu,
                                     RngSpec(config.seed, 4001), config.n_draws)
    t0 = time.perf_counter()
    widths, covered, capped_count = [], [], 0
    for trial in range(config.trials):
        y = mu + config.sigma * gen.standard_normal(config.n)
        models, frontier = enumerate_plausible_models(
            design, y, lam, budget, config.sigma, RngSpec(config.seed, 4002, (trial,)),
            config.n_draws, p_max=config.p_max, s_nu=s_nu)
        capped_count += frontier.capped
        _, pair = lasso_solve(design, y, lam)
        if not pair.M:
            covered.append(True)
            widths.append(float("nan"))
            continue
        iv = posi_intervals(design, y, pair, models, budget, config.sigma,
                            RngSpec(config.seed, 4003, (trial,)), config.n_draws)
        truth = projection_truth(design, pair.M, mu)
        covered.append(bool(np.all(np.abs(truth - iv.centers) <= iv.half_widths)))
        widths.append(float(np.median(iv.widths)))
    ms = int(1000 * (time.perf_counter() - t0))
    widths = np.asarray(widths)
    row = _width_row("lasso", "local", widths[np.isfinite(widths)], covered, ms,
                     param_theta=config.lambda0, param_m=config.d)
    return [row]


# ---------------------------------------------------------------------------
# ERM
# ---------------------------------------------------------------------------

def run_erm(config: ExperimentConfig):
    budget = config.budget()
    if config.data is not None:
        lm = load_loss_matrix(config.data)
        t0 = time.perf_counter()
        res = erm_risk_bound(lm, budget, RngSpec(config.seed, 5000), 2000)
        ms = int(1000 * (time.perf_counter() - t0))
        slack = res.bound - res.erm_risk
        return [ResultRow("erm:data", "local", param_m=lm.n_hypotheses,
                          median_width=slack, q05_width=slack, q95_width=slack,
                          runtime_ms=ms)]
    n, F = config.n, config.n_hypotheses
    means = np.linspace(0.1, 0.9, F)
    gen = RngSpec(config.seed, 5001).generator()
    t0 = time.perf_counter()
    holds, slacks = [], []
    for trial in range(config.trials):
        losses = (gen.random((n, F)) < means[None, :]).astype(float)
        lm = LossMatrix(losses)
        res = erm_risk_bound(lm, budget, RngSpec(config.seed, 5002, (trial,)), 500)
        pop_risk = means[res.erm_index]
        holds.append(pop_risk <= res.bound)
        slacks.append(res.bound - res.erm_risk)
    ms = int(1000 * (time.perf_counter() - t0))
    return [_width_row("erm", "local", slacks, holds, ms, param_m=F)]


# ---------------------------------------------------------------------------
# Sphere
# ---------------------------------------------------------------------------

def run_sphere(config: ExperimentConfig):
    budget = config.budget()
    rows = []
    stream = 6000
    for d in config.d_grid:
        d = int(d)
        t0 = time.perf_counter()
        mu = np.zeros(d)
        mu[0] = config.mu_norm
        gen = RngSpec(config.seed, stream).generator()
        stream += 1
        scheffe = cap_quantile(math.pi, d, budget.alpha,
                               RngSpec(config.seed, stream), config.n_draws)
        stream += 1
        nominal = normal_quantile(1.0 - budget.alpha / 2.0)
        widths = {"local": [], "simultaneous": [], "nominal": []}
        covered = {"local": [], "simultaneous": [], "nominal": []}
        for trial in range(config.trials):
            y = mu + gen.standard_normal(d)
            norm_y = float(np.linalg.norm(y))
            truth = float((y / norm_y) @ mu)
            prob = SphereProblem(y, budget)
            lo, hi = sphere_interval(prob, RngSpec(config.seed, stream, (trial,)),
                                     config.n_draws)
            widths["local"].append(hi - lo)
            covered["local"].append(lo <= truth <= hi)
            widths["simultaneous"].append(2.0 * scheffe)
            covered["simultaneous"].append(abs(norm_y - truth) <= scheffe)
            widths["nominal"].append(2.0 * nominal)
            covered["nominal"].append(abs(norm_y - truth) <= nominal)
        ms = int(1000 * (time.perf_counter() - t0))
        for method in widths:
            rows.append(_width_row("sphere", method, widths[method],
                                   covered[method], ms, param_m=d))
        stream += 1
    return rows


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_RUNNERS = {
    "figure1": run_figure1,
    "winner": run_winner,
    "filedrawer": run_filedrawer,
    "winner-np": run_winner_np,
    "filedrawer-np": _run_np_on_data,
    "lasso": run_lasso,
    "erm": run_erm,
    "sphere": run_sphere,
}


def run_experiment(config: ExperimentConfig):
    """Run the configured scenario and return its ResultRows (writing the
    CSV when config.out is set)."""
    config.validate()
    kind = config.kind
    if kind == "coverage":
        return run_coverage(config)
    if kind == "winner-np" and config.data is not None:
        rows = _run_np_on_data(config)
    else:
        rows = _RUNNERS[kind](config)
    if config.out:
        write_csv(rows, config.out)
    return rows


def run_coverage(config: ExperimentConfig):
    """Coverage-focused run: dispatches to config.problem's runner (the
    rows already carry a per-method coverage estimate)."""
    problem = config.problem
    if problem not in _RUNNERS:
        raise ConfigError(f"coverage: unknown problem {problem!r}")
    if problem == "filedrawer-np":
        raise ConfigError("coverage is undefined for the user-data scenario")
    sub = replace(config, kind=problem)
    rows = _RUNNERS[problem](sub)
    if config.out:
        write_csv(rows, config.out)
    return rows
