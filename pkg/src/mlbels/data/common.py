from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

SCALE_MODES = ("global", "running", "none")


@dataclass
class DatasetHeader:
    """Shape of a multi-label dataset: widths, label block position, size."""

    name: str
    n_features: int
    n_labels: int
    label_position: str = "prefix"
    n_instances: int | None = None
    feature_names: list[str] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.n_features < 1 or self.n_labels < 1:
            raise ConfigurationError(
                f"dataset needs >= 1 feature and label, got {self.n_features}/{self.n_labels}"
            )
        if self.label_position not in ("prefix", "suffix"):
            raise ConfigurationError(f"label_position must be prefix or suffix, got {self.label_position!r}")


class MinMaxScaler:
    """Per-feature min-max scaling to ``[0, 1]``.

    Constant (or never observed) features map to 0, and so do missing
    (NaN) entries.
    """

    def __init__(self, n_features: int):
        self.lo = np.full(n_features, np.inf)
        self.hi = np.full(n_features, -np.inf)

    def partial_fit(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[0]:
            with np.errstate(invalid="ignore"):
                lo = np.nanmin(np.where(np.isnan(X), np.inf, X), axis=0)
                hi = np.nanmax(np.where(np.isnan(X), -np.inf, X), axis=0)
            np.minimum(self.lo, lo, out=self.lo)
            np.maximum(self.hi, hi, out=self.hi)
        return self

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        span = self.hi - self.lo
        ok = np.isfinite(span) & (span > 0)
        out = np.zeros_like(X)
        out[:, ok] = (X[:, ok] - self.lo[ok]) / span[ok]
        # exact endpoints regardless of rounding in the division
        out[:, ok] = np.where(X[:, ok] == self.hi[ok], 1.0, out[:, ok])
        out[np.isnan(out)] = 0.0
        return np.clip(out, 0.0, 1.0)


def check_scale_mode(scale: str) -> str:
    if scale not in SCALE_MODES:
        raise ConfigurationError(f"scale must be one of {SCALE_MODES}, got {scale!r}")
    return scale


def rechunk(rows, chunk_size: int):
    """Group an iterator of ``(x, y)`` rows into ``(X, Y)`` array chunks."""
    if chunk_size < 1:
        raise ConfigurationError(f"chunk size must be >= 1, got {chunk_size}")
    xs, ys = [], []
    for x, y in rows:
        xs.append(x)
        ys.append(y)
        if len(xs) == chunk_size:
            yield np.array(xs, dtype=float), np.array(ys, dtype=np.int8)
            xs, ys = [], []
    if xs:
        yield np.array(xs, dtype=float), np.array(ys, dtype=np.int8)


def scaled_chunks(chunks, n_features: int, scale: str, scaler: MinMaxScaler | None = None):
    """Apply ``scale`` ("global" needs a fitted ``scaler``) to a chunk stream."""
    if scale == "none":
        yield from chunks
        return
    if scale == "running":
        scaler = MinMaxScaler(n_features)
        for X, Y in chunks:
            scaler.partial_fit(X)
            yield scaler.transform(X), Y
        return
    for X, Y in chunks:
        yield scaler.transform(X), Y
