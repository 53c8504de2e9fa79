import os
import pathlib
from dataclasses import dataclass, field
from typing import Any, Dict

import yaml
from dotenv import load_dotenv

from src.utils.errors import ConfigError

ROOT = pathlib.Path(__file__).resolve().parents[1]
DEFAULT_HARNESS_CONFIG = ROOT / "config/harness.yaml"
DEFAULT_EXPERIMENTS_DIR = ROOT / "config/experiments"

OUTPUT_DIR_ENV = "COVEXT_OUTPUT_DIR"


def _read_yaml(path: pathlib.Path) -> Dict[str, Any]:
    if not path.exists():
        return {}
    try:
        return yaml.safe_load(path.read_bytes().decode("utf-8")) or {}
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})")


@dataclass
class RunSettings:
    workers: int = 1
    memory_cap_mb: float = 4096.0
    output_dir: str = "outputs"
    mp_start: str = "spawn"
    progress: bool = True


@dataclass
class QuantileSettings:
    mc_count: int = 100_000
    seed: int = 20240611


@dataclass
class ThresholdSettings:
    C: float = 2.5


@dataclass
class AppSettings:
    run: RunSettings = field(default_factory=RunSettings)
    quantiles: QuantileSettings = field(default_factory=QuantileSettings)
    threshold: ThresholdSettings = field(default_factory=ThresholdSettings)
    log_level: str = "INFO"


def _section(cfg: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = cfg.get(name, {}) if isinstance(cfg, dict) else {}
    return value if isinstance(value, dict) else {}


def load_settings(path: pathlib.Path = DEFAULT_HARNESS_CONFIG) -> AppSettings:
    """Harness defaults from YAML; COVEXT_OUTPUT_DIR (environment or .env) overrides the output directory."""
    load_dotenv()
    cfg = _read_yaml(pathlib.Path(path))
    run_cfg = _section(cfg, "run")
    quant_cfg = _section(cfg, "quantiles")
    thr_cfg = _section(cfg, "threshold")

    run = RunSettings(
        workers=int(run_cfg.get("workers", 1)),
        memory_cap_mb=float(run_cfg.get("memory_cap_mb", 4096.0)),
        output_dir=os.getenv(OUTPUT_DIR_ENV, str(run_cfg.get("output_dir", "outputs"))),
        mp_start=str(run_cfg.get("mp_start", "spawn")),
        progress=bool(run_cfg.get("progress", True)),
    )
    quantiles = QuantileSettings(
        mc_count=int(quant_cfg.get("mc_count", 100_000)),
        seed=int(quant_cfg.get("seed", 20240611)),
    )
    threshold = ThresholdSettings(C=float(thr_cfg.get("C", 2.5)))
    log_level = str(cfg.get("log_level", "INFO")) if isinstance(cfg, dict) else "INFO"
    return AppSettings(run=run, quantiles=quantiles, threshold=threshold, log_level=log_level)
