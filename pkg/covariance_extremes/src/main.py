"""
Command-line entry point.

    python -m src.main compute  --input X.txt [--k 10] [--mode cov|corr] [--points ...] [--threshold]
    python -m src.main test     --input X.txt --test jiang|spacing|region [--alpha 0.05] [--k 2]
    python -m src.main simulate --config config/experiments/gumbel_max.yaml [--workers 4] [--seed 7]
    python -m src.main report   outputs/gumbel_max [outputs/...]
"""

import argparse
import datetime as dt
import logging
import math
import os
import pathlib
import sys
from typing import Dict, List

import pandas as pd

from src import __version__
from src.config import AppSettings, load_settings
from src.covkernels import (
    correlation,
    gram,
    normalized_corr_points,
    normalized_offdiag_points,
    offdiag_extremes,
    squared_points,
)
from src.covkernels.points import PointCloud
from src.extremes import (
    SpacingKind,
    calibrate_region,
    coherence,
    jiang_statistic,
    jiang_test,
    region_test,
    spacing_statistic,
    spacing_test,
    top_vector,
)
from src.loader import load_experiment_config, read_matrix, write_matrix
from src.norming import pair_count
from src.simharness import run_experiment, write_summary
from src.thresholding import ThresholdSpec, threshold_corr, threshold_cov
from src.utils.errors import CovExtremesError, ConfigError, DegenerateDiagonalError, DomainError
from src.utils.file_utils import FLOAT_FORMAT, file_digest, write_table, write_yaml
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

POINT_KINDS = ("offdiag", "corr", "squares")


def _utc_now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir: str, command: str, resolved: Dict, seed, started: str, files: List[str]) -> str:
    """manifest.yaml: tool version, resolved config, seed, timestamps and a sha256 per output file."""
    manifest = {
        "tool_version": __version__,
        "command": command,
        "config": resolved,
        "master_seed": seed,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": [{"file": os.path.basename(path), "sha256": file_digest(path)} for path in files],
    }
    return write_yaml(os.path.join(out_dir, "manifest.yaml"), manifest)


# ----------------------------------------------------------------------
# compute
# ----------------------------------------------------------------------
def _point_cloud(kind: str, S, n: int) -> PointCloud:
    if kind == "offdiag":
        return normalized_offdiag_points(S, n)
    if kind == "corr":
        return normalized_corr_points(correlation(S), n)
    return squared_points(S, n)


def cmd_compute(args, settings: AppSettings) -> int:
    started = _utc_now()
    X = read_matrix(args.input)
    p, n = X.shape
    out_dir = args.out or os.path.join(settings.run.output_dir, "compute")
    written = []

    S = gram(X)
    written.append(write_matrix(os.path.join(out_dir, "S.txt"), S, comment=f"gram matrix of {os.path.basename(args.input)}"))
    try:
        R = correlation(S)
        written.append(write_matrix(os.path.join(out_dir, "R.txt"), R, comment="sample correlation"))
    except DegenerateDiagonalError as exc:
        if args.mode == "corr":
            raise
        logger.warning("correlation skipped: %s", exc)
        R = None

    pairs = pair_count(p)
    if pairs >= 1:
        k = args.k if args.k is not None else min(10, pairs)
        top, bottom = offdiag_extremes(S if args.mode == "cov" else R, k)
        extremes = pd.concat([top.to_frame("top"), bottom.to_frame("bottom")], ignore_index=True)
        written.append(write_table(os.path.join(out_dir, "extremes.csv"), extremes))
    elif args.k is not None:
        raise DomainError(f"p={p} has no off-diagonal entries")

    kinds = args.points
    if kinds == ["auto"]:
        kinds = ["offdiag"] if p >= 3 else []
        if p < 3:
            logger.info("p=%d < 3: normalized points skipped", p)
    frames = []
    for kind in kinds:
        frame = _point_cloud(kind, S, n).to_frame()
        frame.insert(0, "kind", kind)
        frames.append(frame)
    if frames:
        written.append(write_table(os.path.join(out_dir, "points.csv"), pd.concat(frames, ignore_index=True)))

    if args.threshold:
        spec = ThresholdSpec(C=args.C, n=n, p=p)
        written.append(write_matrix(os.path.join(out_dir, "S_hat.txt"), threshold_cov(S, spec), comment=f"hard threshold n*t_n, C={args.C:g}"))
        if R is not None:
            written.append(write_matrix(os.path.join(out_dir, "R_hat.txt"), threshold_corr(R, spec), comment=f"hard threshold t_n, C={args.C:g}"))

    resolved = {"input": os.path.abspath(args.input), "p": p, "n": n, "mode": args.mode, "k": args.k, "points": kinds, "C": args.C}
    write_manifest(out_dir, "compute", resolved, None, started, written)
    logger.info("compute: wrote %d files to %s", len(written), out_dir)
    return 0


# ----------------------------------------------------------------------
# test
# ----------------------------------------------------------------------
def build_test_report(X, test: str, alpha: float, k: int, mode: str, kind: str, mc_count: int, seed: int) -> pd.DataFrame:
    """One report row per decision: statistic, threshold, alpha, decision and quantile provenance."""
    p, n = X.shape
    S = gram(X)
    # spacing and region statistics of R use sqrt(n) R_ij = (n R_ij) / sqrt(n)
    M = S if mode == "cov" else n * correlation(S)
    row = {"test": test, "mode": mode, "kind": "", "k": math.nan, "n": n, "p": p, "threshold_source": ""}
    mc_count_out, seed_out = math.nan, math.nan

    if test == "jiang":
        source = S if mode == "cov" else correlation(S)
        statistic = jiang_statistic(coherence(source, mode, n), n, p, mode)
        decision = jiang_test(statistic, alpha)
        row.update(threshold_source="jiang_limit")
    elif test == "spacing":
        top, _ = offdiag_extremes(M, k)
        statistic = spacing_statistic(top, n, p, SpacingKind(kind))
        decision = spacing_test(statistic, SpacingKind(kind), k, alpha, mc_count, seed)
        row.update(kind=kind, k=k, threshold_source="spacing_limit_mc")
        mc_count_out, seed_out = mc_count, seed
    elif test == "region":
        top, _ = offdiag_extremes(M, k)
        region = calibrate_region(k, alpha, mc_count, seed)
        decision = region_test(top_vector(top, n, p), region, alpha)
        row.update(kind="rectangle", k=k, threshold_source="region_calibration_choice")
        mc_count_out, seed_out = mc_count, seed
    else:
        raise ConfigError(f"unknown test {test!r}")

    row.update(
        statistic=decision.statistic,
        threshold=decision.threshold,
        alpha=decision.alpha,
        decision=decision.label,
        mc_count=mc_count_out,
        mc_seed=seed_out,
    )
    return pd.DataFrame([row])


def cmd_test(args, settings: AppSettings) -> int:
    started = _utc_now()
    X = read_matrix(args.input)
    mc_count = args.mc_count or settings.quantiles.mc_count
    seed = settings.quantiles.seed if args.seed is None else args.seed
    report = build_test_report(X, args.test, args.alpha, args.k, args.mode, args.kind, mc_count, seed)

    out_dir = args.out or os.path.join(settings.run.output_dir, "test")
    path = write_table(os.path.join(out_dir, "report.csv"), report)
    print(report.to_csv(index=False, float_format=FLOAT_FORMAT), end="")
    resolved = {"input": os.path.abspath(args.input), "test": args.test, "alpha": args.alpha, "k": args.k, "mode": args.mode, "kind": args.kind, "mc_count": mc_count}
    write_manifest(out_dir, "test", resolved, seed, started, [path])
    return 0


# ----------------------------------------------------------------------
# simulate / report
# ----------------------------------------------------------------------
def cmd_simulate(args, settings: AppSettings) -> int:
    started = _utc_now()
    config = load_experiment_config(args.config, seed_override=args.seed)
    workers = args.workers or settings.run.workers
    summary = run_experiment(
        config,
        workers=workers,
        memory_cap_mb=settings.run.memory_cap_mb,
        mp_start=settings.run.mp_start,
        progress=settings.run.progress and not args.quiet,
    )
    out_dir = os.path.join(args.out or settings.run.output_dir, config.name)
    written = write_summary(summary, out_dir)
    resolved = {
        "experiment": config.to_dict(),
        "provenance": summary.provenance,
        "workers": workers,
        "warnings": summary.warnings,
        "runtime_seconds": round(summary.runtime_seconds, 3),
    }
    write_manifest(out_dir, "simulate", resolved, config.master_seed, started, written)
    for note in summary.warnings:
        logger.info("note: %s", note)
    logger.info("simulate: %s -> %s (checks %s)", config.name, out_dir, "passed" if summary.passed else "FAILED")
    return 0


def cmd_report(args, settings: AppSettings) -> int:
    frames = []
    for directory in args.dirs:
        path = os.path.join(directory, "checks.csv")
        if not os.path.exists(path):
            raise ConfigError(f"no checks.csv in {directory}")
        frame = pd.read_csv(path)
        frame.insert(0, "experiment", pathlib.Path(directory).name)
        frames.append(frame)
    checks = pd.concat(frames, ignore_index=True)
    if checks.empty:
        print("no acceptance checks recorded")
        return 0
    print(checks.to_string(index=False))
    failed = int((~checks["passed"].astype(bool)).sum())
    print(f"\n{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------
def parse_args(argv=None):
    parser = argparse.ArgumentParser(description="Extreme entries of high-dimensional sample covariance matrices")
    parser.add_argument("--settings", default=None, help="Harness settings YAML (default config/harness.yaml)")
    parser.add_argument("--log-level", default=None, help="Logging level override")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="Gram/correlation matrices, extremes and normalized points of a data file")
    compute.add_argument("--input", required=True, help="Matrix file: header 'p n' then p rows of n values")
    compute.add_argument("--out", default=None, help="Output directory")
    compute.add_argument("--k", type=int, default=None, help="Number of top/bottom order statistics")
    compute.add_argument("--mode", choices=["cov", "corr"], default="cov", help="Matrix used for the order statistics")
    compute.add_argument("--points", nargs="+", choices=["auto", *POINT_KINDS], default=["auto"], help="Normalized point clouds to write")
    compute.add_argument("--threshold", action="store_true", help="Also write the hard-threshold estimates")
    compute.add_argument("--C", type=float, default=None, help="Threshold constant (default from settings, 2.5)")

    test = sub.add_parser("test", help="Run an independence test on a data file")
    test.add_argument("--input", required=True, help="Matrix file")
    test.add_argument("--test", choices=["jiang", "spacing", "region"], required=True)
    test.add_argument("--alpha", type=float, default=0.05)
    test.add_argument("--k", type=int, default=2)
    test.add_argument("--mode", choices=["cov", "corr"], default="cov")
    test.add_argument("--kind", choices=[k.value for k in SpacingKind], default="T1", help="Spacing statistic")
    test.add_argument("--mc-count", type=int, default=None, help="Monte Carlo draws for limit quantiles")
    test.add_argument("--seed", type=int, default=None, help="Seed for the limit-quantile Monte Carlo")
    test.add_argument("--out", default=None)

    simulate = sub.add_parser("simulate", help="Run a Monte Carlo experiment")
    simulate.add_argument("--config", required=True, help="Experiment YAML")
    simulate.add_argument("--workers", type=int, default=None)
    simulate.add_argument("--out", default=None, help="Output root; results go to <out>/<experiment name>")
    simulate.add_argument("--seed", type=int, default=None, help="Override the config's master seed")
    simulate.add_argument("--quiet", action="store_true", help="No progress bar")

    report = sub.add_parser("report", help="Summarize acceptance checks of finished runs")
    report.add_argument("dirs", nargs="+", help="Experiment output directories")
    return parser.parse_args(argv)


COMMANDS = {"compute": cmd_compute, "test": cmd_test, "simulate": cmd_simulate, "report": cmd_report}


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        settings = load_settings(pathlib.Path(args.settings)) if args.settings else load_settings()
        setup_logging(args.log_level or settings.log_level)
        if getattr(args, "C", "unset") is None:
            args.C = settings.threshold.C
        return COMMANDS[args.command](args, settings)
    except CovExtremesError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
