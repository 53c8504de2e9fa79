import json
import logging
import os
from typing import Any, Dict, List

import numpy as np
from jsonschema import Draft7Validator

from src.utils.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "schemas")
EXPERIMENT_SCHEMA_PATH = os.path.join(SCHEMA_DIR, "experiment_config_v1.json")


class ValidationResult:
    def __init__(self, valid: bool, errors=None):
        self.valid = valid
        self.errors = errors or []


def load_schema(path: str = EXPERIMENT_SCHEMA_PATH) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigError(f"schema file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        schema = json.load(fh)
    if not isinstance(schema, dict):
        raise ConfigError(f"schema at {path} is not a JSON object")
    return schema


def validate_experiment_document(document: Dict[str, Any], schema: Dict[str, Any] | None = None) -> ValidationResult:
    """Check a raw experiment document against the JSON Schema, collecting every violation."""
    validator = Draft7Validator(schema or load_schema())
    errors: List[str] = []
    for err in sorted(validator.iter_errors(document), key=lambda e: list(e.path)):
        where = "/".join(str(part) for part in err.path) or "<root>"
        errors.append(f"{where}: {err.message}")
    if errors:
        return ValidationResult(valid=False, errors=errors)
    return ValidationResult(valid=True)


# ----------------------------------------------------------------------
# Array preconditions
# ----------------------------------------------------------------------
def check_data_matrix(X) -> np.ndarray:
    """Return X as a float64 p x n array; reject empty, ragged or non-finite input."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DomainError(f"data matrix must be p x n with p, n >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("data matrix contains non-finite entries")
    return arr


def check_symmetric(M, rtol: float = 1e-12) -> np.ndarray:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(arr)))) if arr.size else 1.0
    if arr.size and float(np.max(np.abs(arr - arr.T))) > rtol * scale:
        raise DomainError("matrix is not symmetric")
    return arr
