"""Per-label ensembles of ridge output heads with pool-based drift handling.

Each label owns a :class:`BRComponent`: ``e`` active :class:`OutputLayerInstance`
heads whose two-column (negative, positive) outputs are summed, plus a
bounded FIFO pool of heads that were dropped for low accuracy. Pooled heads
are frozen but keep being scored, and come back once their accuracy on the
current chunk clears the threshold again.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .linalg import DEFAULT_LAMBDA, RidgeAccumulator, ridge_solve

__all__ = [
    "InstanceState",
    "LifecycleEvent",
    "OutputLayerInstance",
    "BRComponent",
    "one_hot",
    "binary_decision",
    "train_component",
    "predict_component",
    "score_instances",
    "adapt",
]


class InstanceState(enum.Enum):
    ACTIVE = "active"
    REMOVED = "removed"
    NEW = "new"
    ELIGIBLE = "eligible"


_TRANSITIONS = {
    (InstanceState.NEW, InstanceState.ACTIVE),
    (InstanceState.ACTIVE, InstanceState.REMOVED),
    (InstanceState.REMOVED, InstanceState.ELIGIBLE),
    (InstanceState.ELIGIBLE, InstanceState.ACTIVE),
}


@dataclass(frozen=True)
class LifecycleEvent:
    """One state change in a component; ``kind`` is one of ``"removed"``,
    ``"discarded"``, ``"retrieved"`` or ``"created"``."""

    chunk: int
    label: int
    kind: str
    instance: int
    accuracy: float


def one_hot(y) -> np.ndarray:
    """Binary column -> ``(n, 2)`` targets; column 0 is "absent", column 1
    "present"."""
    y = np.asarray(y, dtype=float).reshape(-1)
    return np.column_stack([1.0 - y, y])


def binary_decision(scores) -> np.ndarray:
    """``1`` where the positive channel is at least the negative one.

    Ties (including untrained all-zero scores) go to the positive label.
    """
    scores = np.asarray(scores)
    return (scores[..., 1] >= scores[..., 0]).astype(np.int8)


class OutputLayerInstance:
    """A single ridge head over the broad representation."""

    def __init__(self, uid: int, k: int, lam: float = DEFAULT_LAMBDA):
        self.uid = uid
        self.acc = RidgeAccumulator.zeros(k, 2, lam)
        self.weights: np.ndarray | None = None
        self.last_accuracy = 0.0
        self.age = 0
        self.state = InstanceState.NEW
        self.discarded = False

    def __repr__(self):
        return (
            f"OutputLayerInstance(uid={self.uid}, state={self.state.value}, "
            f"age={self.age}, acc={self.last_accuracy:.3f})"
        )

    @property
    def trained(self) -> bool:
        return self.weights is not None

    def move_to(self, state: InstanceState):
        if (self.state, state) not in _TRANSITIONS:
            raise RuntimeError(f"illegal transition {self.state.value} -> {state.value}")
        self.state = state

    def add_statistics(self, gram, cross, n_rows):
        self.acc.add_statistics(gram, cross, n_rows)
        self.weights = ridge_solve(self.acc)
        self.age += 1

    def fit_chunk(self, M, y):
        M = np.asarray(M, dtype=float)
        if M.shape[0] == 0:
            return
        Y = one_hot(y)
        self.add_statistics(M.T @ M, M.T @ Y, M.shape[0])

    def predict(self, m) -> np.ndarray:
        m = np.asarray(m, dtype=float)
        if self.weights is None:
            return np.zeros((m.shape[0], 2))
        return m @ self.weights

    def accuracy(self, m, y) -> float:
        y = np.asarray(y).reshape(-1)
        if y.size == 0:
            return self.last_accuracy
        return float(np.mean(binary_decision(self.predict(m)) == y))


class BRComponent:
    """Ensemble of ``e`` active heads for one label, plus its pool.

    Parameters
    ----------
    label_index : int
        Which label column this component models.
    k : int
        Width of the broad representation.
    e : int
        Number of active heads.
    pool_size : int
        Capacity of the FIFO pool of removed heads.
    lam : float
        Ridge strength shared by every head.
    """

    def __init__(self, label_index: int, k: int, e: int = 3, pool_size: int = 100,
                 lam: float = DEFAULT_LAMBDA):
        if e < 1:
            raise ConfigurationError(f"ensemble size must be >= 1, got {e}")
        if pool_size < 0:
            raise ConfigurationError(f"pool size must be >= 0, got {pool_size}")
        self.label_index = label_index
        self.k = k
        self.e = e
        self.pool_size = pool_size
        self.lam = lam
        self._next_uid = 0
        self.pool: deque[OutputLayerInstance] = deque()
        self.events: list[LifecycleEvent] = []
        self.active = [self._spawn() for _ in range(e)]
        for inst in self.active:
            inst.move_to(InstanceState.ACTIVE)

    def __repr__(self):
        return (
            f"BRComponent(label={self.label_index}, active={[i.uid for i in self.active]}, "
            f"pool={len(self.pool)}/{self.pool_size})"
        )

    def _spawn(self) -> OutputLayerInstance:
        inst = OutputLayerInstance(self._next_uid, self.k, self.lam)
        self._next_uid += 1
        return inst

    # -- learning ---------------------------------------------------------
    def train(self, M, y):
        """Fold ``(M, one_hot(y))`` into every active head and re-solve."""
        M = np.asarray(M, dtype=float)
        y = np.asarray(y).reshape(-1)
        if M.shape[0] != y.shape[0]:
            raise ConfigurationError(f"M has {M.shape[0]} rows but y has {y.shape[0]}")
        if M.shape[0] == 0:
            return self
        gram = M.T @ M
        cross = M.T @ one_hot(y)
        for inst in self.active:
            inst.add_statistics(gram, cross, M.shape[0])
        return self

    def summed_weights(self) -> np.ndarray:
        """Sum of the active heads' ``(k, 2)`` weights; untrained heads add 0."""
        total = np.zeros((self.k, 2))
        for inst in self.active:
            if inst.weights is not None:
                total += inst.weights
        return total

    def predict(self, m) -> np.ndarray:
        """Summed ``(n, 2)`` scores of the active heads."""
        return np.asarray(m, dtype=float) @ self.summed_weights()

    # -- drift handling ---------------------------------------------------
    def score(self, m, y) -> np.ndarray:
        """Set ``last_accuracy`` of every active and pooled head on ``(m, y)``.

        Returns the active heads' accuracies, in order. Rows must be the
        labelled ones only; an empty chunk leaves every score unchanged.
        """
        m = np.asarray(m, dtype=float)
        y = np.asarray(y).reshape(-1)
        if y.size == 0:
            return np.array([inst.last_accuracy for inst in self.active])
        heads = list(self.active) + list(self.pool)
        trained = [h for h in heads if h.weights is not None]
        # untrained heads score all-zero, which the tie rule turns into "positive"
        untrained_acc = float(np.mean(y == 1))
        for h in heads:
            if h.weights is None:
                h.last_accuracy = untrained_acc
        if trained:
            W = np.concatenate([h.weights for h in trained], axis=1)
            scores = (m @ W).reshape(m.shape[0], len(trained), 2)
            accs = np.mean(binary_decision(scores) == y[:, None], axis=0)
            for h, a in zip(trained, accs):
                h.last_accuracy = float(a)
        return np.array([inst.last_accuracy for inst in self.active])

    def adapt(self, theta: float, chunk: int = -1) -> list[LifecycleEvent]:
        """Swap out active heads whose accuracy is below ``theta``.

        A removed head goes to the back of the pool (the oldest pooled head is
        discarded when the pool overflows). Its replacement is the oldest
        pooled head scoring at least ``theta``, otherwise a fresh head with
        empty statistics.
        """
        events = []
        for slot, inst in enumerate(list(self.active)):
            if not inst.last_accuracy < theta:
                continue
            inst.move_to(InstanceState.REMOVED)
            events.append(LifecycleEvent(chunk, self.label_index, "removed", inst.uid,
                                         inst.last_accuracy))
            if self.pool_size > 0:
                self.pool.append(inst)
                while len(self.pool) > self.pool_size:
                    old = self.pool.popleft()
                    old.discarded = True
                    events.append(LifecycleEvent(chunk, self.label_index, "discarded", old.uid,
                                                 old.last_accuracy))
            else:
                inst.discarded = True
                events.append(LifecycleEvent(chunk, self.label_index, "discarded", inst.uid,
                                             inst.last_accuracy))
            replacement = None
            for cand in self.pool:
                if cand.last_accuracy >= theta:
                    replacement = cand
                    break
            if replacement is not None:
                self.pool.remove(replacement)
                replacement.move_to(InstanceState.ELIGIBLE)
                replacement.move_to(InstanceState.ACTIVE)
                events.append(LifecycleEvent(chunk, self.label_index, "retrieved",
                                             replacement.uid, replacement.last_accuracy))
            else:
                replacement = self._spawn()
                replacement.move_to(InstanceState.ACTIVE)
                events.append(LifecycleEvent(chunk, self.label_index, "created",
                                             replacement.uid, replacement.last_accuracy))
            self.active[slot] = replacement
        self.events.extend(events)
        return events


def train_component(comp: BRComponent, M, y) -> BRComponent:
    return comp.train(M, y)


def predict_component(comp: BRComponent, m) -> np.ndarray:
    return comp.predict(m)


def score_instances(comp: BRComponent, m, y) -> np.ndarray:
    return comp.score(m, y)


def adapt(comp: BRComponent, theta: float, chunk: int = -1) -> list[LifecycleEvent]:
    return comp.adapt(theta, chunk)
