"""Prequential (interleaved test-then-train) evaluation.

Each chunk is predicted first, scored against its full ground truth, and
only then handed to the learner. Example-based metrics are kept as per-row
sums and micro-F1 as raw counts so that cumulative figures can be rebuilt
exactly from the per-chunk records.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .errors import ConfigurationError, StreamError
from .missing import drop_labels

__all__ = [
    "example_accuracy",
    "example_f1",
    "micro_f1",
    "ChunkRecord",
    "PrequentialReport",
    "run_prequential",
    "windowed",
]


def _as_sets(Y, Y_hat):
    Y = np.asarray(Y) > 0
    Y_hat = np.asarray(Y_hat) > 0
    if Y.shape != Y_hat.shape:
        raise ConfigurationError(f"shape mismatch: {Y.shape} vs {Y_hat.shape}")
    return Y, Y_hat


def _row_accuracy(Y, Y_hat) -> np.ndarray:
    inter = np.sum(Y & Y_hat, axis=1)
    union = np.sum(Y | Y_hat, axis=1)
    out = np.ones(Y.shape[0])
    nz = union > 0
    out[nz] = inter[nz] / union[nz]
    return out


def _row_f1(Y, Y_hat) -> np.ndarray:
    inter = np.sum(Y & Y_hat, axis=1)
    denom = np.sum(Y, axis=1) + np.sum(Y_hat, axis=1)
    out = np.ones(Y.shape[0])
    nz = denom > 0
    out[nz] = 2.0 * inter[nz] / denom[nz]
    return out


def example_accuracy(Y, Y_hat) -> float:
    """Mean per-row Jaccard index; a row where both sets are empty scores 1.

    Labels may be given as 0/1 or -1/+1 (anything ``> 0`` is a positive).
    """
    Y, Y_hat = _as_sets(Y, Y_hat)
    if Y.shape[0] == 0:
        return 0.0
    return float(np.mean(_row_accuracy(Y, Y_hat)))


def example_f1(Y, Y_hat) -> float:
    """Mean per-row ``2|Y & Yhat| / (|Y| + |Yhat|)``; empty rows score 1."""
    Y, Y_hat = _as_sets(Y, Y_hat)
    if Y.shape[0] == 0:
        return 0.0
    return float(np.mean(_row_f1(Y, Y_hat)))


def micro_f1(tp, fp, fn) -> float:
    denom = 2 * tp + fp + fn
    return 0.0 if denom == 0 else 2.0 * tp / denom


def micro_counts(Y, Y_hat):
    Y, Y_hat = _as_sets(Y, Y_hat)
    tp = int(np.sum(Y & Y_hat))
    fp = int(np.sum(~Y & Y_hat))
    fn = int(np.sum(Y & ~Y_hat))
    return tp, fp, fn


@dataclass
class ChunkRecord:
    chunk_index: int
    n: int
    acc_sum: float
    f1_sum: float
    micro_tp: int
    micro_fp: int
    micro_fn: int
    wall_time: float
    counted: bool = True

    @property
    def example_accuracy(self) -> float:
        return self.acc_sum / self.n if self.n else 0.0

    @property
    def example_f1(self) -> float:
        return self.f1_sum / self.n if self.n else 0.0

    @property
    def micro_f1(self) -> float:
        return micro_f1(self.micro_tp, self.micro_fp, self.micro_fn)

    @classmethod
    def measure(cls, chunk_index, Y, Y_hat, wall_time=0.0, counted=True) -> "ChunkRecord":
        Yb, Yh = _as_sets(Y, Y_hat)
        tp, fp, fn = micro_counts(Yb, Yh)
        return cls(
            chunk_index=chunk_index,
            n=int(Yb.shape[0]),
            acc_sum=float(np.sum(_row_accuracy(Yb, Yh))),
            f1_sum=float(np.sum(_row_f1(Yb, Yh))),
            micro_tp=tp,
            micro_fp=fp,
            micro_fn=fn,
            wall_time=float(wall_time),
            counted=counted,
        )


@dataclass
class PrequentialReport:
    """Per-chunk records plus cumulative figures over the counted chunks.

    Chunks with ``counted=False`` (by default the cold first chunk) are kept
    for plotting but left out of the cumulative metrics. Runtime is
    reported as seconds per 10 instances over all chunks.
    """

    records: list[ChunkRecord] = field(default_factory=list)
    name: str = "ML-BELS"
    meta: dict = field(default_factory=dict)

    def _counted(self):
        return [r for r in self.records if r.counted]

    @property
    def n_instances(self) -> int:
        return sum(r.n for r in self._counted())

    @property
    def example_accuracy(self) -> float:
        n = self.n_instances
        return sum(r.acc_sum for r in self._counted()) / n if n else 0.0

    @property
    def example_f1(self) -> float:
        n = self.n_instances
        return sum(r.f1_sum for r in self._counted()) / n if n else 0.0

    @property
    def micro_f1(self) -> float:
        rs = self._counted()
        return micro_f1(sum(r.micro_tp for r in rs), sum(r.micro_fp for r in rs),
                        sum(r.micro_fn for r in rs))

    @property
    def total_time(self) -> float:
        return sum(r.wall_time for r in self.records)

    @property
    def seconds_per_10(self) -> float:
        n = sum(r.n for r in self.records)
        return self.total_time / n * 10.0 if n else 0.0

    def summary(self) -> dict:
        return {
            "name": self.name,
            "instances": self.n_instances,
            "example_acc": self.example_accuracy,
            "example_f1": self.example_f1,
            "micro_f1": self.micro_f1,
            "seconds_per_10": self.seconds_per_10,
        }

    def accuracy_series(self) -> np.ndarray:
        return np.array([r.example_accuracy for r in self.records])

    # -- serialization ----------------------------------------------------
    def to_dict(self) -> dict:
        return {"name": self.name, "meta": self.meta, "records": [asdict(r) for r in self.records]}

    @classmethod
    def from_dict(cls, d) -> "PrequentialReport":
        return cls([ChunkRecord(**r) for r in d["records"]], d.get("name", "ML-BELS"),
                   dict(d.get("meta", {})))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text) -> "PrequentialReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """Per-chunk CSV followed by a ``#summary`` line."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chunk", "n", "example_acc", "example_f1", "micro_f1", "seconds"])
        for r in self.records:
            w.writerow([r.chunk_index, r.n, repr(r.example_accuracy), repr(r.example_f1),
                        repr(r.micro_f1), repr(r.wall_time)])
        s = self.summary()
        buf.write(
            f"#summary,name={s['name']},instances={s['instances']},"
            f"example_acc={s['example_acc']!r},example_f1={s['example_f1']!r},"
            f"micro_f1={s['micro_f1']!r},seconds_per_10={s['seconds_per_10']!r}\n"
        )
        return buf.getvalue()

    def series_csv(self) -> str:
        """Prequential accuracy series: per-chunk and running cumulative."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["chunk", "instances", "example_acc", "cumulative_acc"])
        seen = 0
        acc = 0.0
        for r in self.records:
            seen += r.n
            acc += r.acc_sum
            w.writerow([r.chunk_index, seen, repr(r.example_accuracy), repr(acc / seen if seen else 0.0)])
        return buf.getvalue()


def windowed(series, window: int) -> np.ndarray:
    """Trailing moving average; the first ``window - 1`` entries average
    whatever is available."""
    series = np.asarray(series, dtype=float)
    out = np.empty_like(series)
    csum = np.concatenate([[0.0], np.cumsum(series)])
    for t in range(series.size):
        lo = max(0, t - window + 1)
        out[t] = (csum[t + 1] - csum[lo]) / (t + 1 - lo)
    return out


def _to_signed(Y) -> np.ndarray:
    Y = np.asarray(Y)
    if Y.size and Y.min() >= 0:
        return np.where(Y > 0, 1, -1).astype(np.int8)
    return Y.astype(np.int8)


def run_prequential(model, stream: Iterable, *, include_first_chunk: bool = False,
                    label_fraction: float = 1.0, mask_seed: int = 0,
                    on_test: Callable | None = None, on_train: Callable | None = None,
                    name: str = "ML-BELS", clock=time.perf_counter) -> PrequentialReport:
    """Drive ``model`` over ``stream`` of ``(X, Y)`` chunks.

    ``Y`` holds the full ground truth (``-1/+1`` or ``0/1``). With
    ``label_fraction < 1`` each chunk's labels are randomly hidden before
    training, while metrics still use the full truth. ``on_test(t, X, Y_hat)``
    and ``on_train(t, X, obs)`` are called around the respective phases.

    A chunk whose width disagrees with the first one aborts the run with
    :class:`StreamError`; the report so far is attached to it.
    """
    report = PrequentialReport(name=name, meta={
        "include_first_chunk": include_first_chunk,
        "label_fraction": label_fraction,
        "mask_seed": mask_seed,
    })
    shape = None
    for t, (X, Y) in enumerate(stream):
        X = np.asarray(X, dtype=float)
        Y = _to_signed(Y)
        if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise StreamError(f"chunk {t}: malformed shapes {X.shape} / {Y.shape}", report)
        if shape is None:
            shape = (X.shape[1], Y.shape[1])
            if hasattr(model, "prepare"):
                model.prepare(*shape)
        elif (X.shape[1], Y.shape[1]) != shape:
            raise StreamError(
                f"chunk {t}: {X.shape[1]} features / {Y.shape[1]} labels, expected "
                f"{shape[0]} / {shape[1]}", report)
        start = clock()
        Y_hat = model.test(X)
        test_time = clock() - start
        if on_test is not None:
            on_test(t, X, Y_hat)
        record = ChunkRecord.measure(t, Y, Y_hat, counted=include_first_chunk or t > 0)
        obs = Y if label_fraction >= 1.0 else drop_labels(Y, label_fraction, (mask_seed, t))
        if on_train is not None:
            on_train(t, X, obs)
        start = clock()
        model.train(X, obs)
        record.wall_time = test_time + (clock() - start)
        report.records.append(record)
    return report
