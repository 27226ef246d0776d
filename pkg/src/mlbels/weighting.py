"""Label-dependency weights on top of the per-label ensembles.

A single multi-output ridge head predicts all labels at once; its per-row
min-max normalized output rescales the two channels of every label's
ensemble score. The rescaling is only switched on once the stream's label
cardinality reaches ``tau``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import binary_decision
from .errors import ConfigurationError
from .linalg import DEFAULT_LAMBDA, RidgeAccumulator, ridge_solve

__all__ = [
    "WeightClassifier",
    "CardinalityTracker",
    "minmax_rows",
    "apply_weights",
    "decide",
    "should_weight",
]


class WeightClassifier:
    """Multi-output ridge head trained on the full (imputed) label matrix."""

    def __init__(self, k: int, n_labels: int, lam: float = DEFAULT_LAMBDA):
        self.acc = RidgeAccumulator.zeros(k, n_labels, lam)
        self.weights: np.ndarray | None = None

    @property
    def n_labels(self) -> int:
        return self.acc.t

    def train(self, M, Y) -> "WeightClassifier":
        M = np.asarray(M, dtype=float)
        if M.shape[0] == 0:
            return self
        self.acc.update(M, Y)
        self.weights = ridge_solve(self.acc)
        return self

    def raw_scores(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if self.weights is None:
            return np.zeros((m.shape[0], self.n_labels))
        return m @ self.weights

    def predict(self, m) -> np.ndarray:
        """Row-normalized scores in ``[0, 1]``, shape ``(n, C)``."""
        return minmax_rows(self.raw_scores(m))


def minmax_rows(P) -> np.ndarray:
    """Rescale each row to span ``[0, 1]``; constant rows become all zeros."""
    P = np.asarray(P, dtype=float)
    lo = P.min(axis=1, keepdims=True)
    hi = P.max(axis=1, keepdims=True)
    span = hi - lo
    out = np.zeros_like(P)
    ok = (span > 0).reshape(-1)
    out[ok] = (P[ok] - lo[ok]) / span[ok]
    # pin the extremes exactly; (x - lo) / (hi - lo) can round hi to 1 - eps
    out[ok] = np.where(P[ok] == hi[ok], 1.0, out[ok])
    return np.clip(out, 0.0, 1.0)


@dataclass
class CardinalityTracker:
    """Average number of positive labels per instance seen so far.

    Only observed ``+1`` entries count as positives. With
    ``mode="chunk"`` the estimate is taken from the latest chunk alone.
    """

    positives_seen: int = 0
    instances_seen: int = 0
    mode: str = "cumulative"
    _last_lc: float = 0.0

    def __post_init__(self):
        if self.mode not in ("cumulative", "chunk"):
            raise ConfigurationError(f"unknown cardinality mode {self.mode!r}")

    @property
    def lc(self) -> float:
        if self.mode == "chunk":
            return self._last_lc
        if self.instances_seen == 0:
            return 0.0
        return self.positives_seen / self.instances_seen

    def update(self, Y) -> "CardinalityTracker":
        Y = np.asarray(Y)
        n = Y.shape[0]
        pos = int(np.count_nonzero(Y == 1))
        self.positives_seen += pos
        self.instances_seen += n
        if n:
            self._last_lc = pos / n
        return self


def update_cardinality(tracker: CardinalityTracker, Y) -> CardinalityTracker:
    return tracker.update(Y)


def should_weight(tracker: CardinalityTracker, tau: float) -> bool:
    return tracker.lc >= tau


def apply_weights(p_c, p_w) -> np.ndarray:
    """Scale ensemble scores ``p_c`` (``C x n x 2``) by label weights ``p_w``
    (``n x C``): channel 0 by ``1 - w``, channel 1 by ``w``."""
    p_c = np.asarray(p_c, dtype=float)
    w = np.asarray(p_w, dtype=float).T  # C x n
    if w.shape != p_c.shape[:2]:
        raise ConfigurationError(f"weights of shape {np.shape(p_w)} do not match scores {p_c.shape}")
    out = np.empty_like(p_c)
    out[..., 0] = p_c[..., 0] * (1.0 - w)
    out[..., 1] = p_c[..., 1] * w
    return out


def decide(p_c) -> np.ndarray:
    """``C x n x 2`` scores -> ``n x C`` binary predictions (ties -> 1)."""
    return binary_decision(p_c).T.copy()
