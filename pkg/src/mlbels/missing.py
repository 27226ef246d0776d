"""Explicitly missing labels.

Label observations use ``+1`` (positive), ``-1`` (negative) and ``0``
(missing). Ensembles only see the rows where their own label is observed;
the weight classifier sees every row with missing entries imputed as
negative.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

__all__ = ["validate_observation", "mask_for_br", "impute_for_weights", "drop_labels"]


def validate_observation(obs) -> np.ndarray:
    obs = np.asarray(obs)
    if obs.ndim != 2:
        raise ConfigurationError(f"label observation must be 2-D, got shape {obs.shape}")
    if obs.size and not np.isin(obs, (-1, 0, 1)).all():
        raise ConfigurationError("label entries must be -1, 0 or +1")
    return obs.astype(np.int8, copy=False)


def mask_for_br(obs, label_index: int):
    """Rows where ``label_index`` is observed, and their 0/1 targets."""
    col = np.asarray(obs)[:, label_index]
    rows = np.flatnonzero(col != 0)
    return rows, (col[rows] == 1).astype(np.int8)


def impute_for_weights(obs) -> np.ndarray:
    """``+1 -> 1``; both ``-1`` and missing ``0`` -> 0."""
    return (np.asarray(obs) == 1).astype(np.int8)


def drop_labels(obs, keep_fraction: float, seed=0) -> np.ndarray:
    """Hide each entry independently with probability ``1 - keep_fraction``.

    ``seed`` may be anything :func:`numpy.random.default_rng` accepts, e.g. a
    ``(seed, chunk_index)`` pair for per-chunk masks.
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigurationError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    obs = np.array(obs, dtype=np.int8, copy=True)
    if keep_fraction == 1.0:
        return obs
    rng = np.random.default_rng(seed)
    hidden = rng.random(obs.shape) >= keep_fraction
    obs[hidden] = 0
    return obs
