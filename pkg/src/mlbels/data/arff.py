"""Streaming reader/writer for multi-label ARFF files.

Label attributes form a contiguous block at the start (``prefix``) or the
end (``suffix``) of the attribute list. The block size is read from the
relation name in the MEKA style, ``@relation 'yeast: -C 14'`` (a negative
count puts the block at the end), unless given explicitly. Both dense and
sparse (``{index value, ...}``) data rows are understood.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, ParseError
from .common import DatasetHeader, MinMaxScaler, check_scale_mode, rechunk, scaled_chunks

__all__ = ["ArffDataset", "load_arff", "write_arff", "parse_label_option"]

_C_OPTION = re.compile(r"-C\s+(-?\d+)")
_NUMERIC_TYPES = ("numeric", "real", "integer")


@dataclass
class _Attribute:
    name: str
    kind: str  # "numeric" | "nominal"
    values: tuple[str, ...] = ()

    def parse(self, token: str, line: int, path) -> float:
        if token == "?":
            return np.nan
        if self.kind == "numeric":
            try:
                return float(token)
            except ValueError:
                raise ParseError(f"attribute {self.name!r}: bad numeric value {token!r}", line, path) from None
        try:
            return float(self.values.index(token))
        except ValueError:
            raise ParseError(
                f"attribute {self.name!r}: unknown nominal value {token!r} (expected one of {list(self.values)})",
                line, path) from None


def parse_label_option(relation: str):
    """``'name: -C 14'`` -> ``(14, "prefix")``; ``-C -14`` -> suffix; no
    option -> ``(None, None)``."""
    m = _C_OPTION.search(relation)
    if not m:
        return None, None
    c = int(m.group(1))
    return abs(c), ("prefix" if c > 0 else "suffix")


def _unquote(s: str) -> str:
    s = s.strip()
    if len(s) >= 2 and s[0] == s[-1] and s[0] in "'\"":
        return s[1:-1]
    return s


def _split_name(rest: str):
    rest = rest.strip()
    if rest[:1] in "'\"":
        q = rest[0]
        end = rest.find(q, 1)
        if end < 0:
            return None, None
        return rest[1:end], rest[end + 1:].strip()
    parts = rest.split(None, 1)
    if len(parts) < 2:
        return parts[0] if parts else None, ""
    return parts[0], parts[1].strip()


def _parse_attribute(rest: str, line: int, path) -> _Attribute:
    name, typ = _split_name(rest)
    if not name or not typ:
        raise ParseError(f"malformed @attribute declaration: {rest!r}", line, path)
    if typ.startswith("{"):
        if not typ.endswith("}"):
            raise ParseError(f"unterminated nominal list for {name!r}", line, path)
        values = tuple(_unquote(v) for v in next(csv.reader([typ[1:-1]], quotechar="'",
                                                                skipinitialspace=True)))
        return _Attribute(name, "nominal", values)
    if typ.lower() in _NUMERIC_TYPES:
        return _Attribute(name, "numeric")
    raise ParseError(f"unsupported attribute type {typ!r} for {name!r}", line, path)


def _read_header(path):
    relation = None
    attrs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            low = line.lower()
            if low.startswith("@relation"):
                relation = _unquote(line[len("@relation"):])
            elif low.startswith("@attribute"):
                attrs.append(_parse_attribute(line[len("@attribute"):], lineno, path))
            elif low.startswith("@data"):
                return relation or Path(path).stem, attrs, lineno
            else:
                raise ParseError(f"unexpected header line {line[:40]!r}", lineno, path)
    raise ParseError("no @data section", None, path)


class ArffDataset:
    """A multi-label ARFF file viewed as a re-iterable stream of chunks.

    Iterating yields ``(X, Y)`` with ``X`` an ``(n, d)`` float array and
    ``Y`` an ``(n, C)`` array over ``{-1, +1}`` (``0`` where a label value is
    ``?``). With ``scale="global"`` features are min-max scaled using
    statistics from a first pass over the whole file; ``"running"`` uses
    the min/max seen so far; ``"none"`` leaves them untouched.
    """

    def __init__(self, path, n_labels: int | None = None, label_position: str | None = None,
                 chunk_size: int = 50, scale: str = "global"):
        self.path = Path(path)
        if not self.path.is_file():
            raise ConfigurationError(f"no such dataset file: {self.path}")
        self.chunk_size = chunk_size
        self.scale = check_scale_mode(scale)
        relation, attrs, self._data_line = _read_header(self.path)
        c_opt, pos_opt = parse_label_option(relation)
        C = n_labels if n_labels is not None else c_opt
        if C is None:
            raise ConfigurationError(
                f"{self.path}: label count not in relation name ({relation!r}); pass n_labels"
            )
        pos = label_position or pos_opt or "prefix"
        if not 0 < C < len(attrs):
            raise ConfigurationError(f"{self.path}: {C} labels but only {len(attrs)} attributes")
        if pos == "prefix":
            self._label_idx = np.arange(C)
            self._feat_idx = np.arange(C, len(attrs))
        else:
            self._label_idx = np.arange(len(attrs) - C, len(attrs))
            self._feat_idx = np.arange(len(attrs) - C)
        self._attrs = attrs
        for i in self._label_idx:
            a = attrs[i]
            if a.kind == "nominal" and not set(a.values) <= {"0", "1"}:
                raise ConfigurationError(f"label attribute {a.name!r} is not binary: {a.values}")
        label_attrs = [attrs[i] for i in self._label_idx]
        self._label_nominal = np.array([a.kind == "nominal" for a in label_attrs])
        self._label_pos_index = np.array(
            [float(a.values.index("1")) if "1" in a.values else -1.0 for a in label_attrs])
        name = relation.split(":")[0].strip() or self.path.stem
        self.header = DatasetHeader(
            name=name,
            n_features=len(self._feat_idx),
            n_labels=C,
            label_position=pos,
            feature_names=[attrs[i].name for i in self._feat_idx],
            label_names=[attrs[i].name for i in self._label_idx],
        )
        self._scaler = None

    def _records(self):
        attrs = self._attrs
        n_attr = len(attrs)
        defaults = np.array([0.0] * n_attr)
        with open(self.path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                if lineno <= self._data_line:
                    continue
                line = raw.strip()
                if not line or line.startswith("%"):
                    continue
                if line.startswith("{"):
                    if not line.endswith("}"):
                        raise ParseError("unterminated sparse record", lineno, self.path)
                    row = defaults.copy()
                    body = line[1:-1].strip()
                    if body:
                        for item in body.split(","):
                            parts = item.split(None, 1)
                            if len(parts) != 2:
                                raise ParseError(f"bad sparse entry {item!r}", lineno, self.path)
                            try:
                                idx = int(parts[0])
                            except ValueError:
                                raise ParseError(f"bad sparse index {parts[0]!r}", lineno, self.path) from None
                            if not 0 <= idx < n_attr:
                                raise ParseError(f"sparse index {idx} out of range", lineno, self.path)
                            row[idx] = attrs[idx].parse(_unquote(parts[1]), lineno, self.path)
                else:
                    tokens = next(csv.reader([line], quotechar="'", skipinitialspace=True))
                    if len(tokens) != n_attr:
                        raise ParseError(f"expected {n_attr} values, found {len(tokens)}", lineno, self.path)
                    row = np.array([a.parse(_unquote(tok), lineno, self.path)
                                    for a, tok in zip(attrs, tokens)])
                yield lineno, row

    def _labels(self, row, lineno):
        raw = row[self._label_idx]
        y = np.zeros(raw.shape, dtype=np.int8)
        observed = ~np.isnan(raw)
        # nominal labels parse to their value's index, numeric ones to the value
        positive = np.where(self._label_nominal, self._label_pos_index, 1.0)
        if not np.isin(raw[observed & ~self._label_nominal], (0.0, 1.0)).all():
            raise ParseError("numeric label values must be 0 or 1", lineno, self.path)
        y[observed] = np.where(raw[observed] == positive[observed], 1, -1)
        return y

    def rows(self):
        """Unscaled ``(x, y)`` pairs in file order."""
        for lineno, row in self._records():
            yield row[self._feat_idx], self._labels(row, lineno)

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

    def count(self) -> int:
        if self.header.n_instances is None:
            self.header.n_instances = sum(1 for _ in self._records())
        return self.header.n_instances


def load_arff(path, n_labels=None, label_position=None, chunk_size=50, scale="global"):
    """Open ``path`` and return ``(header, dataset)``; the dataset iterates
    over chunks and can be iterated repeatedly. The instance count in the
    header is filled in by a first pass over the file."""
    ds = ArffDataset(path, n_labels, label_position, chunk_size, scale)
    if scale == "global":
        ds.fit_scaler()
    else:
        ds.count()
    return ds.header, ds


def write_arff(path, X, Y, relation="stream", label_position="prefix", label_names=None,
               feature_names=None):
    """Write a dense multi-label ARFF with a MEKA ``-C`` relation tag.

    ``Y`` may be ``0/1`` or ``-1/+1``; missing (``0`` in the signed
    encoding) is only representable if ``Y`` is signed, and is written as
    ``?``.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y)
    n, d = X.shape
    C = Y.shape[1]
    if Y.shape[0] != n:
        raise ConfigurationError("X and Y row counts differ")
    signed = Y.size > 0 and Y.min() < 0
    label_names = label_names or [f"y{i}" for i in range(C)]
    feature_names = feature_names or [f"x{j}" for j in range(d)]
    c_tag = C if label_position == "prefix" else -C
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"@relation '{relation}: -C {c_tag}'\n\n")
        lab_decl = [f"@attribute {nm} {{0,1}}\n" for nm in label_names]
        feat_decl = [f"@attribute {nm} numeric\n" for nm in feature_names]
        fh.writelines(lab_decl + feat_decl if label_position == "prefix" else feat_decl + lab_decl)
        fh.write("\n@data\n")
        for x, y in zip(X, Y):
            if signed:
                labs = ["1" if v > 0 else ("0" if v < 0 else "?") for v in y]
            else:
                labs = ["1" if v > 0 else "0" for v in y]
            feats = [repr(float(v)) for v in x]
            fh.write(",".join(labs + feats if label_position == "prefix" else feats + labs) + "\n")
