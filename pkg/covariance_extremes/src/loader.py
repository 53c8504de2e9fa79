"""
Readers and writers for the two input formats: plain-text data matrices
and YAML experiment configs.

Matrix format: a header line "p n", then p rows of n whitespace-separated
decimals; '#' starts a comment anywhere on a line.
"""

import logging
import math
import os
import pathlib
from typing import Any, Dict, List

import numpy as np
import yaml

from src.simharness.experiments import AcceptanceCheck, ExperimentConfig
from src.utils.errors import ConfigError, ParseError
from src.utils.file_utils import FLOAT_FORMAT, write_text
from src.utils.rng import check_seed
from src.utils.validators import validate_experiment_document

logger = logging.getLogger(__name__)


def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_matrix(text: str) -> np.ndarray:
    lines = _content_lines(text)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise ParseError("empty matrix file: missing 'p n' header", line=1)

    fields = header.split()
    if len(fields) != 2:
        raise ParseError(f"header must be 'p n', got {header!r}", line=lineno)
    try:
        p, n = int(fields[0]), int(fields[1])
    except ValueError:
        raise ParseError(f"header dimensions must be integers, got {header!r}", line=lineno)
    if p < 1 or n < 1:
        raise ParseError(f"header dimensions must be positive, got p={p}, n={n}", line=lineno)

    rows: List[List[float]] = []
    last = lineno
    for lineno, line in lines:
        last = lineno
        if len(rows) == p:
            raise ParseError(f"more than the {p} rows declared in the header", line=lineno)
        tokens = line.split()
        if len(tokens) != n:
            raise ParseError(f"row {len(rows) + 1} has {len(tokens)} values, header declares n={n}", line=lineno)
        try:
            values = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise ParseError(f"non-numeric value ({exc})", line=lineno)
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite value", line=lineno)
        rows.append(values)
    if len(rows) != p:
        raise ParseError(f"found {len(rows)} rows, header declares p={p}", line=last)
    return np.array(rows, dtype=np.float64)


def decode_text(data: bytes) -> str:
    """UTF-8 decode; a bad byte is reported with the line it sits on."""
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data.count(b"\n", 0, exc.start) + 1
        raise ParseError(f"invalid UTF-8 byte 0x{data[exc.start]:02x}", line=line)


def read_matrix(path: str) -> np.ndarray:
    if not os.path.isfile(path):
        raise ParseError(f"matrix file not found: {path}")
    with open(path, "rb") as fh:
        return parse_matrix(decode_text(fh.read()))


def format_matrix(M: np.ndarray, comment: str | None = None) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    out = []
    if comment:
        out.extend(f"# {line}" for line in comment.splitlines())
    out.append(f"{M.shape[0]} {M.shape[1]}")
    for row in M:
        out.append(" ".join(FLOAT_FORMAT % v for v in row))
    return "\n".join(out) + "\n"


def write_matrix(path: str, M: np.ndarray, comment: str | None = None) -> str:
    return write_text(path, format_matrix(M, comment))


# ----------------------------------------------------------------------
# Experiment configs
# ----------------------------------------------------------------------
def read_experiment_document(path: str) -> Dict[str, Any]:
    p = pathlib.Path(path)
    if not p.exists():
        raise ConfigError(f"experiment config not found: {path}")
    try:
        document = yaml.safe_load(p.read_bytes().decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ConfigError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})")
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML ({exc})")
    if not isinstance(document, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return document


def _pairs(values, cast=float):
    return tuple((cast(a), cast(b)) for a, b in values)


def build_experiment_config(document: Dict[str, Any], seed_override: int | None = None) -> ExperimentConfig:
    """
    Validate a raw document against the schema and build the config.

    The master seed is mandatory in the document even when an override is
    given; mc_seed defaults to the master seed.
    """
    result = validate_experiment_document(document)
    if not result.valid:
        raise ConfigError("invalid experiment config:\n  " + "\n  ".join(result.errors))

    exp = document["experiment"]
    dist = document["distribution"]
    params = document.get("params", {}) or {}
    seed = check_seed(exp["seed"] if seed_override is None else seed_override)

    kwargs: Dict[str, Any] = {}
    if "windows" in params:
        kwargs["windows"] = _pairs(params["windows"])
    if "joint_grid" in params:
        kwargs["joint_grid"] = _pairs(params["joint_grid"])
    if "rate_grid" in params:
        kwargs["rate_grid"] = _pairs(params["rate_grid"], int)
    if "alphas" in params:
        kwargs["alphas"] = tuple(float(a) for a in params["alphas"])
    if "y_grid" in params:
        kwargs["y_grid"] = tuple(float(y) for y in params["y_grid"])
    for key in ("k", "mc_count", "limit_draws", "tensor_order"):
        if key in params:
            kwargs[key] = int(params[key])
    if "C" in params:
        kwargs["C"] = float(params["C"])

    checks = tuple(
        AcceptanceCheck(
            name=item["name"],
            table=item["table"],
            column=item["column"],
            lower=item.get("lower"),
            upper=item.get("upper"),
            where=tuple((item.get("where") or {}).items()),
        )
        for item in document.get("acceptance", []) or []
    )

    return ExperimentConfig(
        name=exp["name"],
        functional=exp["functional"],
        family=dist["family"],
        param=float(dist["param"]) if dist.get("param") is not None else None,
        p=int(exp["p"]),
        n=int(exp["n"]),
        replicates=int(exp["replicates"]),
        master_seed=seed,
        mc_seed=check_seed(params.get("mc_seed", seed)),
        checks=checks,
        **kwargs,
    )


def load_experiment_config(path: str, seed_override: int | None = None) -> ExperimentConfig:
    config = build_experiment_config(read_experiment_document(path), seed_override)
    logger.info("loaded experiment %s from %s", config.name, path)
    return config
