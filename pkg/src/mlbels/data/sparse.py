"""Sparse multi-label text format.

One instance per line::

    3,7 1:0.5 12:1.25

Leading comma-separated label indices (0-based, possibly none) followed by
``index:value`` feature pairs (1-based by default). Omitted features are
zero. Widths are not stored in the file and come from a
:class:`DatasetHeader`.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, ParseError
from .common import DatasetHeader, MinMaxScaler, check_scale_mode, rechunk, scaled_chunks

__all__ = ["SparseDataset", "load_sparse", "write_sparse"]


class SparseDataset:
    def __init__(self, path, header: DatasetHeader, chunk_size: int = 50, scale: str = "global",
                 index_base: int = 1):
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigurationError(f"no such dataset file: {self.path}")
        self.header = header
        self.chunk_size = chunk_size
        self.scale = check_scale_mode(scale)
        self.index_base = index_base
        self._scaler = None

    def _parse(self, line: str, lineno: int):
        d, C = self.header.n_features, self.header.n_labels
        tokens = line.split()
        y = np.full(C, -1, dtype=np.int8)
        if tokens and ":" not in tokens[0]:
            for lab in tokens[0].split(","):
                if not lab:
                    continue
                try:
                    j = int(lab)
                except ValueError:
                    raise ParseError(f"bad label index {lab!r}", lineno, self.path) from None
                if not 0 <= j < C:
                    raise ParseError(f"label index {j} out of range [0, {C})", lineno, self.path)
                y[j] = 1
            tokens = tokens[1:]
        x = np.zeros(d)
        seen = set()
        for tok in tokens:
            idx, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"expected index:value, got {tok!r}", lineno, self.path)
            try:
                i = int(idx) - self.index_base
                v = float(val)
            except ValueError:
                raise ParseError(f"bad feature pair {tok!r}", lineno, self.path) from None
            if not 0 <= i < d:
                raise ParseError(f"feature index {idx} out of range", lineno, self.path)
            if i in seen:
                raise ParseError(f"duplicate feature index {idx}", lineno, self.path)
            seen.add(i)
            x[i] = v
        return x, y

    def rows(self):
        with open(self.path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\r\n")
                if not line or line.startswith("#"):
                    continue
                yield self._parse(line, lineno)

    def fit_scaler(self) -> MinMaxScaler:
        scaler = MinMaxScaler(self.header.n_features)
        n = 0
        for X, _ in rechunk(self.rows(), 1000):
            scaler.partial_fit(X)
            n += X.shape[0]
        self.header.n_instances = n
        self._scaler = scaler
        return scaler

    def chunks(self, chunk_size: int | None = None):
        size = chunk_size or self.chunk_size
        if self.scale == "global" and self._scaler is None:
            self.fit_scaler()
        yield from scaled_chunks(rechunk(self.rows(), size), self.header.n_features,
                                 self.scale, self._scaler)

    def __iter__(self):
        return self.chunks()


def load_sparse(path, header: DatasetHeader, chunk_size=50, scale="global", index_base=1):
    ds = SparseDataset(path, header, chunk_size, scale, index_base)
    if scale == "global":
        ds.fit_scaler()
    return ds.header, ds


def write_sparse(path, X, Y, index_base=1):
    """Inverse of :func:`load_sparse` (with ``scale="none"``). ``Y`` may be
    0/1 or -1/+1; only positives are written."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y)
    with open(path, "w", encoding="utf-8") as fh:
        for x, y in zip(X, Y):
            labels = ",".join(str(j) for j in np.flatnonzero(y > 0))
            feats = " ".join(f"{i + index_base}:{float(x[i])!r}" for i in np.flatnonzero(x))
            fh.write(f"{labels} {feats}\n")
