"""Ridge least squares from cumulative sufficient statistics.

Every learner in the package (ensemble heads and the label-weight
classifier) is a ridge regression over the broad representation ``M``.
Rather than keeping the history of ``M``, each learner keeps the running
Gram matrix ``M^T M`` and cross-product ``M^T Y`` and re-solves

    (lam * I + M^T M) W = M^T Y

after every chunk.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .errors import ConfigurationError, NumericalError

__all__ = ["RidgeAccumulator", "accumulate", "ridge_solve", "DEFAULT_LAMBDA"]

DEFAULT_LAMBDA = 1e-3

# Diagonal jitter, relative to the mean diagonal entry, used on the single
# retry after a failed Cholesky factorization.
_JITTER = 1e-8


@dataclass
class RidgeAccumulator:
    """Running ``M^T M`` / ``M^T Y`` for a ridge head with ``k`` inputs and
    ``t`` targets."""

    gram: np.ndarray
    cross: np.ndarray
    lam: float = DEFAULT_LAMBDA
    n_seen: int = field(default=0)

    @classmethod
    def zeros(cls, k: int, t: int, lam: float = DEFAULT_LAMBDA) -> "RidgeAccumulator":
        if k < 1 or t < 1:
            raise ConfigurationError(f"accumulator needs k, t >= 1, got k={k}, t={t}")
        if lam < 0 or not np.isfinite(lam):
            raise ConfigurationError(f"lambda must be finite and >= 0, got {lam}")
        return cls(np.zeros((k, k)), np.zeros((k, t)), float(lam))

    @property
    def k(self) -> int:
        return self.gram.shape[0]

    @property
    def t(self) -> int:
        return self.cross.shape[1]

    def update(self, M, Y) -> "RidgeAccumulator":
        """Add one chunk ``(M, Y)`` in place and return ``self``."""
        M = np.asarray(M, dtype=float)
        Y = np.asarray(Y, dtype=float)
        if M.ndim != 2 or Y.ndim != 2:
            raise ConfigurationError("M and Y must be 2-D")
        if M.shape[1] != self.k:
            raise ConfigurationError(f"M has {M.shape[1]} columns, accumulator expects {self.k}")
        if Y.shape[1] != self.t:
            raise ConfigurationError(f"Y has {Y.shape[1]} columns, accumulator expects {self.t}")
        if M.shape[0] != Y.shape[0]:
            raise ConfigurationError(f"M has {M.shape[0]} rows but Y has {Y.shape[0]}")
        if M.shape[0] == 0:
            return self
        return self.add_statistics(M.T @ M, M.T @ Y, M.shape[0])

    def add_statistics(self, gram, cross, n_rows: int) -> "RidgeAccumulator":
        """Add precomputed ``M^T M`` and ``M^T Y`` (lets several heads share
        one product)."""
        if gram.shape != self.gram.shape or cross.shape != self.cross.shape:
            raise ConfigurationError(
                f"statistics of shape {gram.shape}/{cross.shape} do not match "
                f"{self.gram.shape}/{self.cross.shape}"
            )
        self.gram += gram
        self.cross += cross
        self.n_seen += int(n_rows)
        return self

    def copy(self) -> "RidgeAccumulator":
        return RidgeAccumulator(self.gram.copy(), self.cross.copy(), self.lam, self.n_seen)

    def solve(self) -> np.ndarray:
        return ridge_solve(self)


def accumulate(acc: RidgeAccumulator, M, Y) -> RidgeAccumulator:
    """Functional spelling of :meth:`RidgeAccumulator.update`."""
    return acc.update(M, Y)


def ridge_solve(acc: RidgeAccumulator) -> np.ndarray:
    """Solve ``(lam I + gram) W = cross`` by Cholesky factorization.

    The Gram matrix is symmetrized before factorizing. With ``lam > 0`` a
    failed factorization can only come from round-off, so it is retried once
    with a small diagonal jitter. With ``lam == 0`` a failure means the
    statistics are singular and :class:`NumericalError` is raised directly.
    """
    k = acc.k
    A = 0.5 * (acc.gram + acc.gram.T)
    A[np.diag_indices(k)] += acc.lam
    try:
        factor = la.cho_factor(A, lower=True, check_finite=True)
    except la.LinAlgError:
        scale = np.trace(A) / k
        if acc.lam == 0 or not np.isfinite(scale) or scale <= 0:
            raise NumericalError("ridge system is singular; use lambda > 0") from None
        A[np.diag_indices(k)] += _JITTER * scale
        try:
            factor = la.cho_factor(A, lower=True)
        except la.LinAlgError as exc:
            raise NumericalError(f"ridge system is not positive definite: {exc}") from exc
    except ValueError as exc:
        raise NumericalError(f"ridge system has non-finite entries: {exc}") from exc
    W = la.cho_solve(factor, acc.cross, check_finite=False)
    if not np.all(np.isfinite(W)):
        raise NumericalError("ridge solution is not finite")
    return W
