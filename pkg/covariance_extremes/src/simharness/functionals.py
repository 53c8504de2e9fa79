"""
Monte Carlo functionals.

Each functional is a pair: a module-level replicate function that maps
(config, replicate index) to a small dict of statistics, and a run_*
operation that executes the replicates and reduces them to summary
tables. Window counts are integers, so their reduction is exact in any
order.
"""

import logging
import math
from typing import Dict, List

import numpy as np
import pandas as pd

from src.covkernels import (
    correlation,
    diagonal_points,
    gram,
    heavy_tail_diag_points,
    lower_normalized_points,
    normalized_corr_points,
    normalized_offdiag_points,
    offdiag_dominance_ratio,
    offdiag_extremes,
    squared_points,
    tensor_extremes,
    tensor_points,
)
from src.covkernels.points import PointCloud
from src.extremes import (
    SpacingKind,
    calibrate_region,
    coherence,
    jiang_statistic,
    sample_limit_vector,
    spacing_limit_quantile,
    spacing_statistic,
    top_vector,
)
from src.norming import (
    GumbelLaw,
    MeanMeasure,
    d_p,
    exp_cdf,
    frechet_cdf,
    gumbel_cdf,
    jiang_limit_sample,
    jiang_quantile,
    log_std_normal_tail,
    std_normal_tail_array,
    tilde_d_p,
)
from src.simharness.distributions import a_quantile, growth_rate_warnings, sample_matrix
from src.simharness.experiments import ExperimentConfig
from src.simharness.ks import binomial_sigma, ks_statistic, wilson_interval
from src.simharness.parallel import run_replicates
from src.simharness.summary import MCSummary, evaluate_checks
from src.thresholding import ThresholdSpec, consistency_metric, offdiag_support, threshold_corr, threshold_cov
from src.utils.errors import ConfigError, NonConvergenceError
from src.utils.rng import STREAM_DATA, philox_generator, replicate_generator

logger = logging.getLogger(__name__)

# self-check streams, keyed off mc_seed
STREAM_GUMBEL_CHECK = 21
STREAM_JIANG_CHECK = 22


# ----------------------------------------------------------------------
# Shared helpers
# ----------------------------------------------------------------------
def _data(config: ExperimentConfig, replicate: int) -> np.ndarray:
    rng = replicate_generator(config.master_seed, replicate, STREAM_DATA)
    return sample_matrix(config.spec, config.p, config.n, rng)


def _window_counts(cloud: PointCloud, windows) -> np.ndarray:
    return np.array([cloud.count_in(a, b) for a, b in windows], dtype=np.int64)


def _require(config: ExperimentConfig, allowed) -> None:
    if config.functional not in allowed:
        raise ConfigError(f"functional {config.functional!r} cannot run here; expected one of {allowed}")


def _stack(results: List[dict], key: str) -> np.ndarray:
    return np.array([r[key] for r in results])


def _window_table(config: ExperimentConfig, counts_by_cloud: Dict[str, np.ndarray], windows=None, target: MeanMeasure | None = None) -> pd.DataFrame:
    rows = []
    reps = config.replicates
    windows = config.windows if windows is None else windows
    target = MeanMeasure() if target is None else target
    for cloud, counts in counts_by_cloud.items():
        for w, (a, b) in enumerate(windows):
            column = counts[:, w].astype(float)
            rows.append(
                {
                    "cloud": cloud,
                    "a": a,
                    "b": b,
                    "replicates": reps,
                    "total_count": int(counts[:, w].sum()),
                    "mean_count": float(column.mean()),
                    "std_error": float(column.std(ddof=1) / math.sqrt(reps)) if reps > 1 else math.nan,
                    "target": target(a, b),
                    "deviation": float(column.mean()) - target(a, b),
                }
            )
    return pd.DataFrame(rows)


def _ks_row(statistic: str, law: str, sample: np.ndarray, cdf) -> dict:
    return {"statistic": statistic, "law": law, "ks": ks_statistic(sample, cdf), "sample_size": int(sample.size)}


def _replicate_table(results: List[dict], keys) -> pd.DataFrame:
    frame = pd.DataFrame({key: _stack(results, key) for key in keys})
    frame.insert(0, "replicate", np.arange(len(results)))
    return frame


def _finish(config: ExperimentConfig, tables: Dict[str, pd.DataFrame], notes: List[str]) -> MCSummary:
    return MCSummary(
        experiment=config.name,
        functional=config.functional,
        tables=tables,
        provenance={},
        checks=evaluate_checks(tables, config.checks),
        warnings=list(notes),
    )


def _notes(config: ExperimentConfig) -> List[str]:
    return growth_rate_warnings(config.spec, config.p, config.n)


# ----------------------------------------------------------------------
# Off-diagonal point process: window counts against e^{-a} - e^{-b}
# ----------------------------------------------------------------------
PP_CLOUDS = {"pp_counts": ("S",), "squares": ("S2",), "corr_variants": ("S", "R")}


def offdiag_cloud(name: str, S: np.ndarray, n: int) -> PointCloud:
    if name == "S":
        return normalized_offdiag_points(S, n)
    if name == "R":
        return normalized_corr_points(correlation(S), n)
    if name == "S2":
        return squared_points(S, n)
    raise ConfigError(f"unknown point cloud {name!r}")


def replicate_point_counts(config: ExperimentConfig, replicate: int) -> dict:
    S = gram(_data(config, replicate))
    return {cloud: _window_counts(offdiag_cloud(cloud, S, config.n), config.windows) for cloud in PP_CLOUDS[config.functional]}


def run_pp_experiment(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """Mean window counts of the normalized off-diagonal clouds against the Poisson mean measure."""
    _require(config, tuple(PP_CLOUDS))
    notes = _notes(config)
    results = run_replicates(config, replicate_point_counts, workers, mp_start, progress)
    clouds = PP_CLOUDS[config.functional]
    counts = {cloud: np.vstack([r[cloud] for r in results]) for cloud in clouds}
    per_rep = {"replicate": np.arange(config.replicates)}
    for cloud in clouds:
        for w, (a, b) in enumerate(config.windows):
            per_rep[f"{cloud}_count_{w}"] = counts[cloud][:, w]
    tables = {"window_counts": _window_table(config, counts), "replicates": pd.DataFrame(per_rep)}
    return _finish(config, tables, notes)


# ----------------------------------------------------------------------
# Maxima and minima of S and R
# ----------------------------------------------------------------------
MAX_KEYS = ("S_max", "S_min", "R_max", "R_min", "S_max_rate", "S_min_rate", "T1_k2")


def replicate_maxima(config: ExperimentConfig, replicate: int) -> dict:
    n, p = config.n, config.p
    S = gram(_data(config, replicate))
    R = correlation(S)
    d = tilde_d_p(p)
    root_n = math.sqrt(n)
    rate = math.sqrt(n * math.log(p))
    upper = normalized_offdiag_points(S, n)
    lower = lower_normalized_points(S, n)
    top, bottom = offdiag_extremes(S, 2)
    r_top, r_bottom = offdiag_extremes(R, 1)
    return {
        "S_max": float(upper.values.max()),
        "S_min": float(lower.values.min()),
        "R_max": d * (root_n * float(r_top.values[0]) - d),
        "R_min": d * (root_n * float(r_bottom.values[0]) + d),
        "S_max_rate": float(top.values[0]) / rate,
        "S_min_rate": float(bottom.values[0]) / rate,
        "T1_k2": spacing_statistic(top, n, p, SpacingKind.T1),
        "S_counts": _window_counts(upper, config.windows),
        "S2_counts": _window_counts(squared_points(S, n), config.windows),
    }


def _min_limit_cdf(y):
    # d~(S_min / sqrt(n) + d~) tends to minus a Gumbel variable
    return 1.0 - gumbel_cdf(-np.asarray(y, dtype=float))


def run_max_experiment(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """
    Distribution of the normalized largest and smallest entries of S and R:
    KS against the Gumbel limits, the sqrt(n log p) growth rate, joint
    max/min cells, the k = 2 spacing law, and the squares point process.
    The ks table also carries a self-check row for the Gumbel sampler.
    """
    _require(config, ("max_gumbel", "joint_max_min"))
    notes = _notes(config)
    results = run_replicates(config, replicate_maxima, workers, mp_start, progress)
    stats = {key: _stack(results, key).astype(float) for key in MAX_KEYS}
    # direct draws from the limit law
    sampler = GumbelLaw.sample(philox_generator(config.mc_seed, STREAM_GUMBEL_CHECK), config.limit_draws)

    ks = pd.DataFrame(
        [
            _ks_row("S_max", "gumbel", stats["S_max"], gumbel_cdf),
            _ks_row("R_max", "gumbel", stats["R_max"], gumbel_cdf),
            _ks_row("S_min", "reflected_gumbel", stats["S_min"], _min_limit_cdf),
            _ks_row("R_min", "reflected_gumbel", stats["R_min"], _min_limit_cdf),
            _ks_row("T1_k2", "exponential", stats["T1_k2"], exp_cdf),
            _ks_row("gumbel_sampler", "gumbel", sampler, GumbelLaw.cdf),
        ]
    )
    medians = pd.DataFrame(
        [
            {"statistic": "S_max_rate", "median": float(np.median(stats["S_max_rate"])), "target": 2.0},
            {"statistic": "S_min_rate", "median": float(np.median(stats["S_min_rate"])), "target": -2.0},
        ]
    )
    joint_rows = []
    for x, y in config.joint_grid:
        empirical = float(np.mean((stats["S_max"] <= x) & (stats["S_min"] <= y)))
        target = float(gumbel_cdf(x) * (1.0 - gumbel_cdf(-y)))
        joint_rows.append({"x": x, "y": y, "empirical": empirical, "target": target, "deviation": empirical - target})

    quantile_rows = []
    for alpha in config.alphas:
        value = spacing_limit_quantile(SpacingKind.T1, 2, alpha, config.mc_count, config.mc_seed)
        quantile_rows.append(
            {
                "kind": "T1",
                "k": 2,
                "alpha": alpha,
                "mc_count": config.mc_count,
                "seed": config.mc_seed,
                "value": value,
                "closed_form": -math.log(alpha),
                "deviation": value + math.log(alpha),
            }
        )

    counts = {
        "S": np.vstack([r["S_counts"] for r in results]),
        "S2": np.vstack([r["S2_counts"] for r in results]),
    }
    tables = {
        "ks": ks,
        "medians": medians,
        "joint": pd.DataFrame(joint_rows),
        "spacing_quantiles": pd.DataFrame(quantile_rows),
        "window_counts": _window_table(config, counts),
        "replicates": _replicate_table(results, MAX_KEYS),
    }
    return _finish(config, tables, notes)


# ----------------------------------------------------------------------
# Row sums: the random-walk point process
# ----------------------------------------------------------------------
def replicate_random_walk(config: ExperimentConfig, replicate: int) -> dict:
    X = _data(config, replicate)
    d = d_p(config.p)
    points = d * (X.sum(axis=1) / math.sqrt(config.n) - d)
    cloud = PointCloud(values=points, index=np.arange(config.p).reshape(-1, 1))
    return {"counts": _window_counts(cloud, config.windows), "max": float(points.max())}


def run_random_walk_experiment(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """
    Points d_p(S_n^(i)/sqrt(n) - d_p) of p independent row sums. For
    gaussian entries each row sum is exactly normal, so the mean count in
    (a, b] is p (Phi_bar(d_p + a/d_p) - Phi_bar(d_p + b/d_p)) with binomial error.
    """
    _require(config, ("random_walk",))
    notes = _notes(config)
    results = run_replicates(config, replicate_random_walk, workers, mp_start, progress)
    counts = np.vstack([r["counts"] for r in results])
    table = _window_table(config, {"row_sums": counts})

    p, reps = config.p, config.replicates
    d = d_p(p)
    exact, sigma, z = [], [], []
    for a, b in config.windows:
        if config.family == "gaussian":
            upper = 0.0 if b == math.inf else float(std_normal_tail_array(d + b / d))
            q = float(std_normal_tail_array(d + a / d)) - upper
            exact.append(p * q)
            sigma.append(math.sqrt(p * q * (1.0 - q) / reps))
        else:
            exact.append(math.nan)
            sigma.append(math.nan)
    table["exact_target"] = exact
    table["exact_sigma"] = sigma
    table["z_score"] = (table["mean_count"] - table["exact_target"]) / table["exact_sigma"]

    maxima = _stack(results, "max").astype(float)
    tables = {
        "window_counts": table,
        "ks": pd.DataFrame([_ks_row("row_sum_max", "gumbel", maxima, gumbel_cdf)]),
        "replicates": _replicate_table(results, ("max",)),
    }
    return _finish(config, tables, notes)


# ----------------------------------------------------------------------
# Diagonal entries: Gumbel (finite Var(X^2)) or Frechet (regularly varying)
# ----------------------------------------------------------------------
def _diag_entries(config: ExperimentConfig, replicate: int) -> np.ndarray:
    X = _data(config, replicate)
    return np.einsum("it,it->i", X, X)


def replicate_diag_gumbel(config: ExperimentConfig, replicate: int) -> dict:
    diag = _diag_entries(config, replicate)
    cloud = diagonal_points(diag, config.n, config.spec.var_x2, config.p)
    return {"max": float(cloud.values.max()), "counts": _window_counts(cloud, config.windows)}


def replicate_diag_frechet(config: ExperimentConfig, replicate: int) -> dict:
    S = gram(_data(config, replicate))
    a_np = a_quantile(config.spec, config.n * config.p)
    cloud = heavy_tail_diag_points(S, config.n, config.p, a_np)
    return {
        "max": float(cloud.values.max()),
        "counts": _window_counts(cloud, frechet_windows(config)),
        "dominance_ratio": _dominance_ratio(S),
    }


def frechet_windows(config: ExperimentConfig):
    """Windows (a, b] with a > 0; the Frechet mean measure is infinite near zero."""
    return tuple((a, b) for a, b in config.windows if a > 0)


def _dominance_ratio(S: np.ndarray) -> float:
    try:
        return offdiag_dominance_ratio(S)
    except NonConvergenceError as exc:
        logger.warning("dominance ratio: %s; keeping the last estimate", exc)
        return math.nan if exc.estimate is None else exc.estimate / float(np.max(np.abs(np.diag(S))))


def _check_diag_config(config: ExperimentConfig) -> None:
    spec = config.spec
    if config.functional == "diag_gumbel":
        if spec.var_x2 == 0.0:
            raise ConfigError(f"diag_gumbel needs Var(X^2) > 0; {spec.label} has S_ii = n exactly")
        if not math.isfinite(spec.var_x2):
            raise ConfigError(f"diag_gumbel needs a finite Var(X^2); {spec.label} has an infinite fourth moment")
    elif not spec.regularly_varying:
        raise ConfigError(f"diag_frechet needs a regularly varying law, got {spec.label}")


def run_diag_experiments(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """
    Light-tail mode: KS of the maximum diagonal point against Lambda.
    Heavy-tail mode: KS of a_np^{-2} max(S_ii - n) against Phi_{alpha/2},
    window counts against x^{-alpha/2}, and the ratio
    ||S - diag S|| / ||diag S|| as a diagnostic.
    """
    _require(config, ("diag_gumbel", "diag_frechet"))
    _check_diag_config(config)
    notes = _notes(config)
    if config.functional == "diag_gumbel":
        results = run_replicates(config, replicate_diag_gumbel, workers, mp_start, progress)
        keys = ("max",)
        maxima = _stack(results, "max").astype(float)
        tables = {
            "ks": pd.DataFrame([_ks_row("diag_max", "gumbel", maxima, gumbel_cdf)]),
            "window_counts": _window_table(config, {"diag": np.vstack([r["counts"] for r in results])}),
        }
    else:
        results = run_replicates(config, replicate_diag_frechet, workers, mp_start, progress)
        keys = ("max", "dominance_ratio")
        maxima = _stack(results, "max").astype(float)
        index = config.spec.tail_index / 2.0
        a_np = a_quantile(config.spec, config.n * config.p)
        windows = frechet_windows(config)
        if len(windows) < len(config.windows):
            notes.append("diag_frechet: windows starting at a <= 0 are skipped (infinite Frechet mean measure)")
        ratios = _stack(results, "dominance_ratio").astype(float)
        tables = {
            "ks": pd.DataFrame([_ks_row("diag_max", f"frechet({index:g})", maxima, lambda x: frechet_cdf(x, index))]),
            "scaling": pd.DataFrame([{"k": config.n * config.p, "a_k": a_np, "frechet_index": index}]),
            "dominance": pd.DataFrame(
                [
                    {
                        "statistic": "offdiag_dominance_ratio",
                        "median": float(np.nanmedian(ratios)),
                        "mean": float(np.nanmean(ratios)),
                        "max": float(np.nanmax(ratios)),
                        "replicates": int(np.count_nonzero(np.isfinite(ratios))),
                    }
                ]
            ),
        }
        if windows:
            counts = np.vstack([r["counts"] for r in results])
            tables["window_counts"] = _window_table(
                config, {"diag": counts}, windows, MeanMeasure(config.spec.tail_index)
            )
    tables["replicates"] = _replicate_table(results, keys)
    return _finish(config, tables, notes)


# ----------------------------------------------------------------------
# Moderate deviations of S_n / sqrt(n)
# ----------------------------------------------------------------------
def replicate_ld_ratio(config: ExperimentConfig, replicate: int) -> dict:
    sums = _data(config, replicate).sum(axis=1) / math.sqrt(config.n)
    return {"exceed": np.array([np.count_nonzero(sums > y) for y in config.y_grid], dtype=np.int64)}


def run_ld_ratio(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """Empirical P(S_n/sqrt(n) > y) with Wilson intervals next to Phi_bar(y); each replicate contributes p draws."""
    _require(config, ("ld_ratio",))
    notes = _notes(config)
    if any(y < 0 or y > 3 for y in config.y_grid):
        notes.append("ld_ratio: grid points outside [0, 3] need importance sampling for honest intervals")
        logger.warning(notes[-1])
    results = run_replicates(config, replicate_ld_ratio, workers, mp_start, progress)
    exceed = np.vstack([r["exceed"] for r in results]).sum(axis=0)
    trials = config.p * config.replicates
    rows = []
    for y, hits in zip(config.y_grid, exceed):
        prob = hits / trials
        low, high = wilson_interval(int(hits), trials)
        tail = float(std_normal_tail_array(y))
        log_tail = float(log_std_normal_tail(y))
        rows.append(
            {
                "y": y,
                "trials": trials,
                "exceedances": int(hits),
                "probability": prob,
                "ci_low": low,
                "ci_high": high,
                "normal_tail": tail,
                "ratio": prob / tail,
                "ratio_low": low / tail,
                "ratio_high": high / tail,
                "log_ratio": math.log(prob) - log_tail if hits > 0 else -math.inf,
                "covers_one": int(low <= tail <= high),
                "z_score": (prob - tail) / binomial_sigma(tail, trials),
            }
        )
    return _finish(config, {"tail_ratios": pd.DataFrame(rows)}, notes)


# ----------------------------------------------------------------------
# Size of the independence tests under iid data
# ----------------------------------------------------------------------
TEST_KEYS = ("jiang_cov", "jiang_corr", "T1", "T2", "T3")


def replicate_test_statistics(config: ExperimentConfig, replicate: int) -> dict:
    n, p = config.n, config.p
    S = gram(_data(config, replicate))
    R = correlation(S)
    top, _ = offdiag_extremes(S, config.k)
    out = {
        "jiang_cov": jiang_statistic(coherence(S, "cov", n), n, p, "cov"),
        "jiang_corr": jiang_statistic(coherence(R, "corr", n), n, p, "corr"),
        "top_vector": top_vector(top, n, p),
    }
    for kind in SpacingKind:
        out[kind.value] = spacing_statistic(top, n, p, kind)
    return out


def _rate_row(test: str, alpha: float, threshold: float, rejections: int, trials: int, mc_count, mc_seed) -> dict:
    low, high = wilson_interval(rejections, trials)
    return {
        "test": test,
        "alpha": alpha,
        "threshold": threshold,
        "rejections": rejections,
        "replicates": trials,
        "rate": rejections / trials,
        "ci_low": low,
        "ci_high": high,
        "mc_count": mc_count,
        "mc_seed": mc_seed,
    }


def run_test_size(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """
    Rejection rates under H0 for the coherence test (both modes), the three
    spacing tests and the default region test, plus self-checks of the
    Jiang threshold and of each calibrated region on fresh draws of their
    own limit laws.
    """
    _require(config, ("test_size",))
    if config.k < 2:
        raise ConfigError("test_size needs k >= 2 for the spacing tests")
    notes = _notes(config)
    results = run_replicates(config, replicate_test_statistics, workers, mp_start, progress)
    stats = {key: _stack(results, key).astype(float) for key in TEST_KEYS}
    vectors = np.vstack([r["top_vector"] for r in results])
    reps = config.replicates

    rows, calibration = [], []
    self_check = sample_limit_vector(config.k, config.limit_draws, config.mc_seed, stream=1)
    jiang_draws = jiang_limit_sample(philox_generator(config.mc_seed, STREAM_JIANG_CHECK), config.limit_draws)
    jiang_rows = []
    for alpha in config.alphas:
        q = jiang_quantile(alpha)
        above = int(np.count_nonzero(jiang_draws >= q))
        low, high = wilson_interval(above, config.limit_draws)
        jiang_rows.append(
            {
                "alpha": alpha,
                "threshold": q,
                "self_check_draws": config.limit_draws,
                "self_check_rate": above / config.limit_draws,
                "ci_low": low,
                "ci_high": high,
            }
        )
        for mode in ("cov", "corr"):
            hits = int(np.count_nonzero(stats[f"jiang_{mode}"] >= q))
            rows.append(_rate_row(f"jiang_{mode}", alpha, q, hits, reps, math.nan, math.nan))
        for kind in SpacingKind:
            threshold = spacing_limit_quantile(kind, config.k, alpha, config.mc_count, config.mc_seed)
            hits = int(np.count_nonzero(stats[kind.value] >= threshold))
            rows.append(_rate_row(f"spacing_{kind.value}", alpha, threshold, hits, reps, config.mc_count, config.mc_seed))
        region = calibrate_region(config.k, alpha, config.mc_count, config.mc_seed)
        hits = int(np.count_nonzero(~region.contains(vectors)))
        rows.append(_rate_row("region", alpha, 1.0, hits, reps, config.mc_count, config.mc_seed))

        outside = int(np.count_nonzero(~region.contains(self_check)))
        low, high = wilson_interval(outside, config.limit_draws)
        calibration.append(
            {
                "alpha": alpha,
                "k": config.k,
                "calibration_coverage": region.coverage,
                "self_check_draws": config.limit_draws,
                "self_check_rate": outside / config.limit_draws,
                "ci_low": low,
                "ci_high": high,
                "mc_count": config.mc_count,
                "mc_seed": config.mc_seed,
                **{f"lower_{i + 1}": v for i, v in enumerate(region.lower)},
                **{f"upper_{i + 1}": v for i, v in enumerate(region.upper)},
            }
        )
    notes.append("region test uses the default Bonferroni-then-rescaled rectangle; other regions are equally valid")
    tables = {
        "rejection_rates": pd.DataFrame(rows),
        "region_calibration": pd.DataFrame(calibration),
        "jiang_calibration": pd.DataFrame(jiang_rows),
        "replicates": _replicate_table(results, TEST_KEYS),
    }
    return _finish(config, tables, notes)


# ----------------------------------------------------------------------
# Threshold estimators: consistency rate over an (n, p) grid
# ----------------------------------------------------------------------
def replicate_rate_check(config: ExperimentConfig, replicate: int) -> dict:
    spec = config.spec
    corr, cov, kept = [], [], []
    for g, (n, p) in enumerate(config.rate_grid):
        rng = philox_generator(config.master_seed, replicate, STREAM_DATA, g)
        S = gram(sample_matrix(spec, p, n, rng))
        R = correlation(S)
        thresholds = ThresholdSpec(C=config.C, n=n, p=p)
        R_hat = threshold_corr(R, thresholds)
        corr.append(consistency_metric(R_hat, "corr", n, p))
        cov.append(consistency_metric(threshold_cov(S, thresholds), "cov", n, p))
        kept.append(int(np.count_nonzero(offdiag_support(R_hat))))
    return {"corr_metric": np.array(corr), "cov_metric": np.array(cov), "kept": np.array(kept)}


def run_rate_check(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """
    Medians of sqrt(n/p)||R_hat - I|| and sqrt(n/p)||S_hat/n - I|| over the
    grid, with the change between the first and last grid point.
    """
    _require(config, ("rate_check",))
    notes = []
    for n, p in config.rate_grid:
        notes.extend(growth_rate_warnings(config.spec, p, n))
    results = run_replicates(config, replicate_rate_check, workers, mp_start, progress)
    corr = np.vstack([r["corr_metric"] for r in results])
    cov = np.vstack([r["cov_metric"] for r in results])
    kept = np.vstack([r["kept"] for r in results])
    rows = []
    for g, (n, p) in enumerate(config.rate_grid):
        rows.append(
            {
                "n": n,
                "p": p,
                "C": config.C,
                "t_n": ThresholdSpec(C=config.C, n=n, p=p).t_n,
                "median_corr": float(np.median(corr[:, g])),
                "mean_corr": float(np.mean(corr[:, g])),
                "median_cov": float(np.median(cov[:, g])),
                "mean_cov": float(np.mean(cov[:, g])),
                "share_nonidentity": float(np.mean(kept[:, g] > 0)),
            }
        )
    metrics = pd.DataFrame(rows)
    first, last = metrics.iloc[0], metrics.iloc[-1]
    trend = pd.DataFrame(
        [
            {
                "n_first": int(first["n"]),
                "p_first": int(first["p"]),
                "n_last": int(last["n"]),
                "p_last": int(last["p"]),
                "median_corr_first": first["median_corr"],
                "median_corr_last": last["median_corr"],
                "median_corr_change": last["median_corr"] - first["median_corr"],
                "median_cov_change": last["median_cov"] - first["median_cov"],
            }
        ]
    )
    return _finish(config, {"rate_metrics": metrics, "rate_trend": trend}, notes)


# ----------------------------------------------------------------------
# Hypercubic tensors of order m
# ----------------------------------------------------------------------
def replicate_tensor(config: ExperimentConfig, replicate: int) -> dict:
    X = _data(config, replicate)
    m = config.tensor_order
    cloud = tensor_points(X, m)
    max_rate, min_rate = tensor_extremes(X, m)
    return {
        "counts": _window_counts(cloud, config.windows),
        "max": float(cloud.values.max()),
        "max_rate": max_rate,
        "min_rate": min_rate,
    }


def run_tensor_experiment(config: ExperimentConfig, workers: int = 1, mp_start: str = "spawn", progress: bool = False) -> MCSummary:
    """Window counts, the Gumbel maximum and the +-sqrt(2m) growth of the order-m tensor extremes over sqrt(n log p)."""
    _require(config, ("tensor_max",))
    m = config.tensor_order
    if m < 1 or m > config.p or math.comb(config.p, m) < 2:
        raise ConfigError(f"tensor order {m} leaves fewer than two tuples at p={config.p}")
    notes = _notes(config)
    results = run_replicates(config, replicate_tensor, workers, mp_start, progress)
    maxima = _stack(results, "max").astype(float)
    rates = _stack(results, "max_rate").astype(float)
    low_rates = _stack(results, "min_rate").astype(float)
    target = math.sqrt(2.0 * m)
    tables = {
        "window_counts": _window_table(config, {f"S({m})": np.vstack([r["counts"] for r in results])}),
        "ks": pd.DataFrame([_ks_row("tensor_max", "gumbel", maxima, gumbel_cdf)]),
        "medians": pd.DataFrame(
            [
                {"statistic": "tensor_max_rate", "median": float(np.median(rates)), "target": target},
                {"statistic": "tensor_min_rate", "median": float(np.median(low_rates)), "target": -target},
            ]
        ),
        "replicates": _replicate_table(results, ("max", "max_rate", "min_rate")),
    }
    return _finish(config, tables, notes)
