"""Multi-label drifting streams built from SEA threshold concepts.

Every instance has three features drawn uniformly from ``[0, 10]``. A
*concept table* assigns each label a pair of features ``(a, b)`` and a
threshold; the label is on when ``x_a + x_b`` exceeds it. Labels sharing a
pair are nested (a higher threshold implies every lower one), which is
where the inter-label dependency comes from. Thresholds are chosen so the
label prevalences sum to a target label cardinality.

A drift swaps in a new table with a different cardinality target and fresh
pair/threshold assignments. Abrupt drifts switch at the drift point,
gradual drifts mix old and new concepts with a sigmoid probability over a
transition window, and recurring streams return to the first table after
the second drift.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError

__all__ = [
    "ConceptTable",
    "SyntheticSpec",
    "SyntheticStream",
    "generate_synthetic",
    "make_concept",
    "parse_synthetic",
    "sea_prevalence",
    "sea_threshold",
]

N_FEATURES = 3
FEATURE_MAX = 10.0
_PAIRS = ((0, 1), (0, 2), (1, 2))
DRIFT_KINDS = ("abrupt", "gradual", "recurring")
# cardinality of each later concept relative to the first
_PHASE_FACTORS = (1.0, 1.25, 0.75)


def sea_prevalence(threshold):
    """``P(U1 + U2 > threshold)`` for ``U1, U2 ~ U[0, 10]`` (triangular sum)."""
    t = np.asarray(threshold, dtype=float)
    lo = 1.0 - t**2 / 200.0
    hi = (20.0 - t) ** 2 / 200.0
    return np.clip(np.where(t <= 10.0, lo, hi), 0.0, 1.0)


def sea_threshold(prevalence):
    """Inverse of :func:`sea_prevalence`."""
    q = np.asarray(prevalence, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ConfigurationError("prevalence must lie in [0, 1]")
    return np.where(q >= 0.5, np.sqrt(200.0 * (1.0 - q)), 20.0 - np.sqrt(200.0 * q))


@dataclass(frozen=True)
class ConceptTable:
    pairs: np.ndarray  # (C, 2) feature indices
    thresholds: np.ndarray  # (C,)

    @property
    def n_labels(self) -> int:
        return self.thresholds.shape[0]

    @property
    def cardinality(self) -> float:
        """Noise-free expected number of positive labels per instance."""
        return float(np.sum(sea_prevalence(self.thresholds)))

    def labels(self, X) -> np.ndarray:
        """0/1 label matrix for the ``(n, 3)`` features ``X``."""
        X = np.asarray(X, dtype=float)
        sums = X[:, self.pairs[:, 0]] + X[:, self.pairs[:, 1]]
        return (sums > self.thresholds).astype(np.int8)

    def same_as(self, other: "ConceptTable") -> bool:
        return (np.array_equal(self.pairs, other.pairs)
                and np.array_equal(self.thresholds, other.thresholds))


def _prevalences(rng, n_labels, lc_target, lo=0.03, hi=0.97):
    if not lo * n_labels <= lc_target <= hi * n_labels:
        raise ConfigurationError(
            f"cardinality target {lc_target} impossible for {n_labels} labels "
            f"(must lie in [{lo * n_labels:.2f}, {hi * n_labels:.2f}])"
        )
    q = rng.uniform(0.2, 1.0, n_labels)
    q *= lc_target / q.sum()
    # redistribute clipped mass until the sum is back on target
    for _ in range(100):
        q = np.clip(q, lo, hi)
        gap = lc_target - q.sum()
        if abs(gap) < 1e-12:
            break
        free = (q < hi) if gap > 0 else (q > lo)
        q[free] += gap / free.sum()
    return q


def make_concept(rng, n_labels: int, lc_target: float) -> ConceptTable:
    """Random table whose label prevalences sum to ``lc_target``."""
    q = _prevalences(rng, n_labels, lc_target)
    pairs = np.array(_PAIRS)[rng.integers(0, len(_PAIRS), n_labels)]
    return ConceptTable(pairs, sea_threshold(q))


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic stream.

    ``lc_targets`` gives the cardinality of each concept phase (one more
    entry than ``drift_points``); by default the first phase targets a
    label density of 0.33 and later phases scale it by 1.25 and 0.75. For
    recurring streams the last phase reuses the first table, so its target
    is ignored.
    """

    n_labels: int
    n_instances: int = 20000
    drift_kind: str = "abrupt"
    drift_points: tuple[int, ...] | None = None
    noise_fraction: float = 0.0
    seed: int = 0
    lc_targets: tuple[float, ...] | None = None
    transition_width: int | None = None

    def __post_init__(self):
        if self.n_labels < 1 or self.n_instances < 1:
            raise ConfigurationError("n_labels and n_instances must be >= 1")
        if self.drift_kind not in DRIFT_KINDS:
            raise ConfigurationError(f"drift_kind must be one of {DRIFT_KINDS}, got {self.drift_kind!r}")
        if not 0.0 <= self.noise_fraction <= 1.0:
            raise ConfigurationError(f"noise_fraction must be in [0, 1], got {self.noise_fraction}")
        pts = self.drift_points
        if pts is None:
            pts = (self.n_instances // 3, 2 * self.n_instances // 3)
        pts = tuple(int(p) for p in pts)
        if any(b <= a for a, b in zip(pts, pts[1:])) or any(not 0 < p < self.n_instances for p in pts):
            raise ConfigurationError(f"drift points must be strictly increasing inside the stream: {pts}")
        if self.drift_kind == "recurring" and len(pts) < 2:
            raise ConfigurationError("a recurring stream needs at least two drift points")
        object.__setattr__(self, "drift_points", pts)
        lcs = self.lc_targets
        if lcs is None:
            base = 0.33 * self.n_labels
            lcs = tuple(base * _PHASE_FACTORS[i % len(_PHASE_FACTORS)] for i in range(len(pts) + 1))
        elif len(lcs) == 1:
            lcs = tuple(lcs) * (len(pts) + 1)
        if len(lcs) != len(pts) + 1:
            raise ConfigurationError(f"need {len(pts) + 1} cardinality targets, got {len(lcs)}")
        object.__setattr__(self, "lc_targets", tuple(float(v) for v in lcs))
        width = self.transition_width
        if width is None:
            width = max(1, self.n_instances // 10)
        object.__setattr__(self, "transition_width", int(width))

    @property
    def name(self) -> str:
        kind = {"abrupt": "A", "gradual": "G", "recurring": "A-R"}[self.drift_kind]
        return f"{kind}-{self.n_labels}-{round(self.noise_fraction * 100)}"


def parse_synthetic(text: str, n_instances: int = 20000, seed: int = 0, **kw) -> SyntheticSpec:
    """``"A:10:20"`` -> abrupt drift, 10 labels, 20% label noise.

    Kinds: ``A`` abrupt, ``G`` gradual, ``R``/``AR``/``A-R`` recurring.
    """
    m = re.fullmatch(r"\s*([A-Za-z-]+)\s*:\s*(\d+)\s*:\s*(\d+(?:\.\d+)?)\s*", text)
    if not m:
        raise ConfigurationError(f"synthetic source must look like KIND:LABELS:NOISE, got {text!r}")
    kinds = {"a": "abrupt", "g": "gradual", "r": "recurring", "ar": "recurring", "a-r": "recurring"}
    kind = kinds.get(m.group(1).lower())
    if kind is None:
        raise ConfigurationError(f"unknown drift kind {m.group(1)!r}; use A, G or R")
    return SyntheticSpec(n_labels=int(m.group(2)), n_instances=n_instances, drift_kind=kind,
                         noise_fraction=float(m.group(3)) / 100.0, seed=seed, **kw)


@dataclass
class SyntheticStream:
    """A fully materialized synthetic stream.

    ``X`` holds raw features in ``[0, 10]``, ``Y`` labels over
    ``{-1, +1}``, ``concept_ids`` the index into ``tables`` that produced
    each row.
    """

    spec: SyntheticSpec
    X: np.ndarray
    Y: np.ndarray
    concept_ids: np.ndarray
    tables: list[ConceptTable] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return N_FEATURES

    @property
    def n_labels(self) -> int:
        return self.spec.n_labels

    def table_at(self, t: int) -> ConceptTable:
        return self.tables[self.concept_ids[t]]

    def chunks(self, chunk_size: int = 500, scale: bool = True):
        """Yield ``(X, Y)`` chunks; ``scale`` maps features onto ``[0, 1]``."""
        if chunk_size < 1:
            raise ConfigurationError(f"chunk size must be >= 1, got {chunk_size}")
        X = self.X / FEATURE_MAX if scale else self.X
        for start in range(0, X.shape[0], chunk_size):
            yield X[start:start + chunk_size], self.Y[start:start + chunk_size]

    __iter__ = chunks


def generate_synthetic(spec: SyntheticSpec) -> SyntheticStream:
    rng = np.random.default_rng(spec.seed)
    n, pts = spec.n_instances, spec.drift_points
    tables = [make_concept(rng, spec.n_labels, lc) for lc in spec.lc_targets]
    if spec.drift_kind == "recurring":
        tables[-1] = tables[0]
    X = rng.uniform(0.0, FEATURE_MAX, size=(n, N_FEATURES))
    t = np.arange(n)
    if spec.drift_kind == "gradual":
        ids = np.zeros(n, dtype=np.int64)
        u = rng.random((n, len(pts)))
        alive = np.ones(n, dtype=bool)
        for j, p in enumerate(pts):
            z = np.clip(-4.0 * (t - p) / spec.transition_width, -500, 500)
            switched = alive & (u[:, j] < 1.0 / (1.0 + np.exp(z)))
            ids[switched] = j + 1
            alive = switched
    else:
        ids = np.searchsorted(np.asarray(pts), t, side="right")
    Y01 = np.empty((n, spec.n_labels), dtype=np.int8)
    for c, table in enumerate(tables):
        rows = ids == c
        Y01[rows] = table.labels(X[rows])
    if spec.noise_fraction > 0:
        flip = rng.random(Y01.shape) < spec.noise_fraction
        Y01 = np.where(flip, 1 - Y01, Y01).astype(np.int8)
    Y = np.where(Y01 > 0, 1, -1).astype(np.int8)
    return SyntheticStream(spec, X, Y, ids, tables)
