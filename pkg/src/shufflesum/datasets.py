"""Synthetic and CSV-backed datasets with values in [0, 1]."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestionError, ParameterError
from .sampling import RngStream

# stream id reserved for dataset generation, disjoint from protocol runs
DATA_STREAM = 2**31 - 1


def gen_uniform(n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. Uniform[0, 1] values."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    return RngStream(seed, DATA_STREAM).generator.random(n)


def gen_normal(n: int, mean: float = 0.573, std: float = 0.1, seed: int = 0) -> np.ndarray:
    """``n`` i.i.d. Normal(mean, std) values clipped to [0, 1]."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    if std < 0:
        raise ParameterError("std must be non-negative")
    g = RngStream(seed, DATA_STREAM).generator
    return np.clip(g.normal(mean, std, size=n), 0.0, 1.0)


_FIXED = re.compile(r"^fixed[:(]\s*([-+0-9.eE]+)\s*\)?$")


def parse_normalizer(spec: str):
    """``'max'``, ``'minmax'`` or ``'fixed:D'`` / ``'fixed(D)'``; returns ``(kind, D)``."""
    spec = spec.strip().lower()
    if spec in ("max", "minmax"):
        return spec, None
    m = _FIXED.match(spec)
    if m:
        d = float(m.group(1))
        if not d > 0:
            raise ParameterError("fixed denominator must be positive")
        return "fixed", d
    raise ParameterError(f"unknown normalizer {spec!r}")


def normalize(values, normalizer: str = "max") -> np.ndarray:
    kind, denom = parse_normalizer(normalizer)
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise IngestionError("empty column")
    if kind == "max":
        top = v.max()
        if top <= 0 or v.min() < 0:
            raise IngestionError("max normalizer needs non-negative values with a positive max")
        out = v / top
    elif kind == "minmax":
        lo, hi = v.min(), v.max()
        if hi == lo:
            raise IngestionError("minmax normalizer needs a non-constant column")
        out = (v - lo) / (hi - lo)
    else:
        out = v / denom
    if np.any((out < 0) | (out > 1)):
        raise IngestionError(f"normalized values fall outside [0, 1] with {normalizer!r}")
    return out


def load_csv(path, column: str, normalizer: str = "max") -> np.ndarray:
    """Read one numeric column of a headed UTF-8 CSV and map it into [0, 1].

    Raises:
        IngestionError: missing file or column, non-numeric or empty column.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestionError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in [f.strip() for f in reader.fieldnames]:
            raise IngestionError(f"column {column!r} not in header of {path}")
        key = next(f for f in reader.fieldnames if f.strip() == column)
        raw = []
        for lineno, row in enumerate(reader, start=2):
            cell = (row.get(key) or "").strip()
            try:
                val = float(cell)
            except ValueError:
                raise IngestionError(f"{path}:{lineno}: non-numeric value {cell!r}") from None
            if not math.isfinite(val):
                raise IngestionError(f"{path}:{lineno}: non-finite value {cell!r}")
            raw.append(val)
    if not raw:
        raise IngestionError(f"column {column!r} in {path} is empty")
    return normalize(raw, normalizer)


@dataclass(frozen=True)
class DatasetSpec:
    kind: str = "ur"
    mean: float = 0.573
    std: float = 0.1
    csv_path: str | None = None
    csv_column: str | None = None
    normalizer: str = "max"

    def load(self, n: int, seed: int) -> np.ndarray:
        if self.kind in ("ur", "uniform"):
            return gen_uniform(n, seed)
        if self.kind == "normal":
            return gen_normal(n, self.mean, self.std, seed)
        if self.kind == "csv":
            if not self.csv_path or not self.csv_column:
                raise ParameterError("csv dataset needs csv_path and csv_column")
            return load_csv(self.csv_path, self.csv_column, self.normalizer)
        raise ParameterError(f"unknown dataset kind {self.kind!r}")


__all__ = ["gen_uniform", "gen_normal", "load_csv", "normalize", "parse_normalizer", "DatasetSpec"]
