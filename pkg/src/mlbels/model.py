"""The full test-then-train learner.

Per chunk, :meth:`MLBelsModel.test` maps the features once, sums every
label ensemble's two-channel scores, optionally rescales them with the
label-weight classifier and thresholds the result. :meth:`MLBelsModel.train`
then, label by label, scores the active and pooled heads on the observed
rows, swaps out weak heads, and folds the chunk into the survivors; the
weight classifier and the cardinality estimate are updated last.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .ensemble import BRComponent, LifecycleEvent
from .errors import ConfigurationError
from .linalg import DEFAULT_LAMBDA
from .mapping import BroadMapper, new_mapper
from .missing import impute_for_weights, mask_for_br, validate_observation
from .weighting import CardinalityTracker, WeightClassifier, apply_weights, decide

__all__ = ["Variant", "ModelConfig", "MLBelsModel", "CHUNK_SIZES", "default_chunk_size"]

CHUNK_SIZES = (50, 100, 250, 500, 1000)


class Variant(str, enum.Enum):
    """Ablation switches: plain BR, BR with drift-adaptive ensembles, the
    latter with weighting always on, and the default trigger-gated model."""

    BR = "br"
    BR_ENS = "br-ens"
    BR_ENS_W = "br-ens-w"
    DEFAULT = "default"

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-").replace("+", "-")
        for v in cls:
            if v.value == key:
                return v
        raise ConfigurationError(f"unknown variant {value!r}; choose from {[v.value for v in cls]}")

    @property
    def label(self) -> str:
        return {"br": "BR", "br-ens": "BR+Ens", "br-ens-w": "BR+Ens+W", "default": "Default"}[self.value]


@dataclass(frozen=True)
class ModelConfig:
    e: int = 3
    d_f: int = 25
    d_e: int = 1
    lam: float = DEFAULT_LAMBDA
    theta: float = 0.5
    tau: float = 1.5
    pool_size: int = 100
    chunk_size: int = 50
    variant: Variant = Variant.DEFAULT
    seed: int = 0
    lc_mode: str = "cumulative"
    n_threads: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        for name in ("e", "d_f", "d_e", "chunk_size", "n_threads"):
            if int(getattr(self, name)) < 1:
                raise ConfigurationError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.pool_size < 0:
            raise ConfigurationError(f"pool_size must be >= 0, got {self.pool_size}")
        if not self.lam >= 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigurationError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.tau >= 0:
            raise ConfigurationError(f"tau must be >= 0, got {self.tau}")
        if self.lc_mode not in ("cumulative", "chunk"):
            raise ConfigurationError(f"lc_mode must be 'cumulative' or 'chunk', got {self.lc_mode!r}")

    @property
    def effective_e(self) -> int:
        return 1 if self.variant is Variant.BR else self.e

    @property
    def adaptive(self) -> bool:
        return self.variant is not Variant.BR

    def replace(self, **changes) -> "ModelConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d


def default_chunk_size(n_instances: int) -> int:
    """Pick a chunk size from :data:`CHUNK_SIZES` giving roughly 40+ chunks."""
    for size in reversed(CHUNK_SIZES):
        if n_instances >= 40 * size:
            return size
    return CHUNK_SIZES[0]


def _threads_from_env(default: int) -> int:
    raw = os.environ.get("MLBELS_THREADS")
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigurationError(f"MLBELS_THREADS must be an integer, got {raw!r}") from None


@dataclass
class _ChunkLog:
    chunk: int
    weighted: bool
    lc: float


class MLBelsModel:
    """Multi-label stream classifier.

    Parameters
    ----------
    config : ModelConfig
    n_features, n_labels : int, optional
        Input and label widths. When omitted they are fixed by the first
        chunk seen.
    mapper : BroadMapper, optional
        Overrides the mapper drawn from ``config.seed``.
    """

    def __init__(self, config: ModelConfig | None = None, n_features: int | None = None,
                 n_labels: int | None = None, mapper: BroadMapper | None = None):
        self.config = config or ModelConfig()
        self.mapper = mapper
        self.components: list[BRComponent] = []
        self.weight_clf: WeightClassifier | None = None
        self.tracker = CardinalityTracker(mode=self.config.lc_mode)
        self.events: list[LifecycleEvent] = []
        self.history: list[_ChunkLog] = []
        self.chunks_tested = 0
        self.chunks_trained = 0
        self.n_threads = _threads_from_env(self.config.n_threads)
        self.n_features = n_features
        self.n_labels = n_labels
        if n_features is not None and n_labels is not None:
            self._build(n_features, n_labels)

    def __repr__(self):
        return (
            f"MLBelsModel(variant={self.config.variant.value}, features={self.n_features}, "
            f"labels={self.n_labels}, chunks={self.chunks_trained})"
        )

    # -- construction -----------------------------------------------------
    def _build(self, n_features: int, n_labels: int):
        cfg = self.config
        if n_labels < 1:
            raise ConfigurationError("need at least one label")
        if self.mapper is None:
            self.mapper = new_mapper(n_features, cfg.d_f, cfg.d_e, cfg.seed)
        elif self.mapper.input_dim != n_features:
            raise ConfigurationError(
                f"mapper expects {self.mapper.input_dim} features, data has {n_features}"
            )
        k = self.mapper.width
        self.components = [
            BRComponent(i, k, cfg.effective_e, cfg.pool_size, cfg.lam) for i in range(n_labels)
        ]
        self.weight_clf = WeightClassifier(k, n_labels, cfg.lam)
        self.n_features = n_features
        self.n_labels = n_labels

    def _ensure_built(self, X, n_labels=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ConfigurationError(f"features must be 2-D, got shape {X.shape}")
        if not self.components:
            if n_labels is None and self.n_labels is None:
                raise ConfigurationError("label count unknown; pass n_labels or train first")
            self._build(X.shape[1], n_labels if n_labels is not None else self.n_labels)
        if X.shape[1] != self.n_features:
            raise ConfigurationError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def prepare(self, n_features: int, n_labels: int) -> "MLBelsModel":
        """Fix the input and label widths before the first chunk, or check
        them against the widths already fixed."""
        if not self.components:
            self._build(n_features, n_labels)
        elif (n_features, n_labels) != (self.n_features, self.n_labels):
            raise ConfigurationError(
                f"model expects {self.n_features} features / {self.n_labels} labels, "
                f"got {n_features} / {n_labels}"
            )
        return self

    # -- inference --------------------------------------------------------
    @property
    def weighting_enabled(self) -> bool:
        v = self.config.variant
        if v is Variant.BR_ENS_W:
            return True
        if v is Variant.DEFAULT:
            return self.tracker.lc >= self.config.tau
        return False

    def ensemble_scores(self, m) -> np.ndarray:
        """Summed ensemble outputs for every label, shape ``(C, n, 2)``."""
        W = np.stack([c.summed_weights() for c in self.components], axis=1)  # k x C x 2
        k, C, _ = W.shape
        return (m @ W.reshape(k, 2 * C)).reshape(m.shape[0], C, 2).transpose(1, 0, 2)

    def scores(self, X) -> np.ndarray:
        """Final ``(C, n, 2)`` channel scores the decision is taken on."""
        X = self._ensure_built(X)
        m = self.mapper.map(X)
        p_c = self.ensemble_scores(m)
        if self.weighting_enabled:
            p_c = apply_weights(p_c, self.weight_clf.predict(m))
        return p_c

    def test(self, X) -> np.ndarray:
        """Predict a binary ``(n, C)`` label matrix. Does not change any
        learned state."""
        preds = decide(self.scores(X))
        self.chunks_tested += 1
        return preds

    predict = test

    # -- learning ---------------------------------------------------------
    def _train_component(self, comp: BRComponent, M, obs, chunk: int):
        rows, y = mask_for_br(obs, comp.label_index)
        if rows.size == 0:
            return []
        Mi = M[rows]
        events = []
        if self.config.adaptive:
            comp.score(Mi, y)
            events = comp.adapt(self.config.theta, chunk)
        comp.train(Mi, y)
        return events

    def train(self, X, obs) -> "MLBelsModel":
        """Learn from one chunk; ``obs`` holds ``-1/0/+1`` label entries."""
        obs = validate_observation(obs)
        X = self._ensure_built(X, n_labels=obs.shape[1])
        if obs.shape != (X.shape[0], self.n_labels):
            raise ConfigurationError(
                f"labels of shape {obs.shape} do not match ({X.shape[0]}, {self.n_labels})"
            )
        chunk = self.chunks_trained
        weighted = self.weighting_enabled
        lc = self.tracker.lc
        if X.shape[0]:
            M = self.mapper.map(X)
            if self.n_threads > 1 and len(self.components) > 1:
                with ThreadPoolExecutor(max_workers=self.n_threads) as pool:
                    per_label = list(pool.map(
                        lambda c: self._train_component(c, M, obs, chunk), self.components))
            else:
                per_label = [self._train_component(c, M, obs, chunk) for c in self.components]
            for evs in per_label:
                self.events.extend(evs)
            if self.config.variant in (Variant.BR_ENS_W, Variant.DEFAULT):
                self.weight_clf.train(M, impute_for_weights(obs))
            self.tracker.update(obs)
        self.history.append(_ChunkLog(chunk, weighted, lc))
        self.chunks_trained += 1
        return self

    def process_chunk(self, X, obs) -> np.ndarray:
        """Test on ``X``, then train on ``(X, obs)``; returns the predictions."""
        self._ensure_built(X, n_labels=np.shape(obs)[1])
        preds = self.test(X)
        self.train(X, obs)
        return preds

    # -- introspection ----------------------------------------------------
    def state_dict(self) -> dict:
        """Plain snapshot of the learned state, for tests and debugging."""
        return {
            "config": self.config.to_dict(),
            "lc": self.tracker.lc,
            "chunks_trained": self.chunks_trained,
            "components": [
                {
                    "active": [(i.uid, i.age, None if i.weights is None else i.weights.copy())
                               for i in c.active],
                    "pool": [i.uid for i in c.pool],
                }
                for c in self.components
            ],
            "weight_clf": None if self.weight_clf is None or self.weight_clf.weights is None
            else self.weight_clf.weights.copy(),
        }
