import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
import pandas as pd

from src.simharness.experiments import AcceptanceCheck
from src.utils.errors import ConfigError
from src.utils.file_utils import write_table

logger = logging.getLogger(__name__)

CHECK_COLUMNS = ["name", "table", "column", "value", "lower", "upper", "passed"]


@dataclass
class MCSummary:
    """
    Aggregated output of one experiment.

    tables holds the plot-ready results (window counts, KS distances,
    quantiles, rejection rates, per-replicate statistics); checks records
    every acceptance band next to the value it was applied to. runtime is
    kept out of the tables so reruns produce identical files.
    """

    experiment: str
    functional: str
    tables: Dict[str, pd.DataFrame]
    provenance: Dict[str, Any]
    checks: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=CHECK_COLUMNS))
    warnings: List[str] = field(default_factory=list)
    runtime_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.checks["passed"].all()) if len(self.checks) else True

    def table(self, name: str) -> pd.DataFrame:
        return self.tables[name]


def lookup_value(tables: Dict[str, pd.DataFrame], check: AcceptanceCheck) -> float:
    if check.table not in tables:
        raise ConfigError(f"check {check.name}: no table {check.table!r}")
    frame = tables[check.table]
    mask = np.ones(len(frame), dtype=bool)
    for column, wanted in check.where:
        if isinstance(wanted, (int, float)) and not isinstance(wanted, bool):
            mask &= np.isclose(frame[column].to_numpy(dtype=float), float(wanted), rtol=0.0, atol=1e-12)
        else:
            mask &= (frame[column].astype(str) == str(wanted)).to_numpy()
    rows = frame.loc[mask, check.column]
    if len(rows) != 1:
        raise ConfigError(f"check {check.name}: filter {dict(check.where)} selects {len(rows)} rows of {check.table!r}")
    return float(rows.iloc[0])


def evaluate_checks(tables: Dict[str, pd.DataFrame], checks) -> pd.DataFrame:
    rows = []
    for check in checks:
        value = lookup_value(tables, check)
        passed = bool(np.isfinite(value))
        if check.lower is not None:
            passed &= value >= check.lower
        if check.upper is not None:
            passed &= value <= check.upper
        rows.append(
            {
                "name": check.name,
                "table": check.table,
                "column": check.column,
                "value": value,
                "lower": np.nan if check.lower is None else check.lower,
                "upper": np.nan if check.upper is None else check.upper,
                "passed": passed,
            }
        )
        if not passed:
            logger.warning("check %s failed: %s = %.6g not in [%s, %s]", check.name, check.column, value, check.lower, check.upper)
    return pd.DataFrame(rows, columns=CHECK_COLUMNS)


def write_summary(summary: MCSummary, out_dir: str) -> List[str]:
    """Write one CSV per table plus checks.csv; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in sorted(summary.tables):
        written.append(write_table(os.path.join(out_dir, f"{name}.csv"), summary.tables[name]))
    written.append(write_table(os.path.join(out_dir, "checks.csv"), summary.checks))
    return written
