import hashlib
import os
import tempfile
from typing import Callable, IO

import pandas as pd
import yaml

FLOAT_FORMAT = "%.17g"


def _atomic_write(path: str, writer: Callable[[IO[str]], None]) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            writer(fh)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return path


def write_text(path: str, text: str) -> str:
    return _atomic_write(path, lambda fh: fh.write(text))


def write_table(path: str, frame: pd.DataFrame) -> str:
    """Write a table as CSV with round-trip float formatting."""
    return _atomic_write(path, lambda fh: frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT))


def write_yaml(path: str, data) -> str:
    return _atomic_write(path, lambda fh: yaml.safe_dump(data, fh, sort_keys=False))


def file_digest(path: str) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            sha.update(chunk)
    return sha.hexdigest()
