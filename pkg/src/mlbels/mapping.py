"""Random feature-mapping and enhancement layers.

The mapper is drawn once and frozen: all learning happens in the ridge
accumulators downstream, so the same mapper serves every chunk and every
label ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

__all__ = ["BroadMapper", "new_mapper"]

# tanh rounds to exactly +-1.0 beyond |x| ~ 19; keep E strictly inside (-1, 1).
_TANH_BOUND = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class BroadMapper:
    """Frozen weights of the two broad layers.

    ``map(X)`` returns ``M = [F, E]`` with ``F = X w_f + beta_f`` (identity
    activation) and ``E = tanh(F w_e + beta_e)``.
    """

    w_f: np.ndarray
    beta_f: np.ndarray
    w_e: np.ndarray
    beta_e: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        d, d_f = self.w_f.shape
        if self.beta_f.shape != (d_f,):
            raise ConfigurationError(f"beta_f must have shape ({d_f},), got {self.beta_f.shape}")
        if self.w_e.shape[0] != d_f:
            raise ConfigurationError(f"w_e must have {d_f} rows, got {self.w_e.shape[0]}")
        if self.beta_e.shape != (self.w_e.shape[1],):
            raise ConfigurationError(
                f"beta_e must have shape ({self.w_e.shape[1]},), got {self.beta_e.shape}"
            )
        for arr in (self.w_f, self.beta_f, self.w_e, self.beta_e):
            arr.setflags(write=False)

    @property
    def input_dim(self) -> int:
        return self.w_f.shape[0]

    @property
    def d_f(self) -> int:
        return self.w_f.shape[1]

    @property
    def d_e(self) -> int:
        return self.w_e.shape[1]

    @property
    def width(self) -> int:
        return self.d_f + self.d_e

    def map(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ConfigurationError(
                f"mapper expects (n, {self.input_dim}) input, got shape {X.shape}"
            )
        F = X @ self.w_f + self.beta_f
        E = np.clip(np.tanh(F @ self.w_e + self.beta_e), -_TANH_BOUND, _TANH_BOUND)
        return np.hstack([F, E])

    __call__ = map


def new_mapper(input_dim: int, d_f: int = 25, d_e: int = 1, seed: int = 0) -> BroadMapper:
    """Draw a mapper with every weight and bias uniform on ``[-1, 1]``."""
    for name, value in (("input_dim", input_dim), ("d_f", d_f), ("d_e", d_e)):
        if int(value) < 1:
            raise ConfigurationError(f"{name} must be >= 1, got {value}")
    rng = np.random.default_rng(seed)
    w_f = rng.uniform(-1.0, 1.0, size=(input_dim, d_f))
    beta_f = rng.uniform(-1.0, 1.0, size=d_f)
    w_e = rng.uniform(-1.0, 1.0, size=(d_f, d_e))
    beta_e = rng.uniform(-1.0, 1.0, size=d_e)
    return BroadMapper(w_f, beta_f, w_e, beta_e, seed=seed)
