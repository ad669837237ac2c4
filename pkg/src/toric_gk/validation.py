"""Input validation shared by the estimators and the command line."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import DomainError
from .frame import GKParams
from .polytope import PotentialModel


def check_points(X, model: PotentialModel) -> np.ndarray:
    """2-D float array of interior points of ``model``'s polytope."""
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 1:
        # 1-D input is a list of points on a segment, or one point otherwise
        X = X.reshape(-1, 1) if model.dim == 1 else X.reshape(1, -1)
    if X.shape[1] != model.dim:
        raise ValueError(f"X has {X.shape[1]} features but the polytope has dimension {model.dim}")
    inside = model.polytope.contains(X)
    if not np.all(inside):
        k = int(np.flatnonzero(~inside)[0])
        raise DomainError(f"row {k} ({X[k].tolist()}) is not in the open polytope")
    return X


def check_antisymmetric(M, n: int, name: str) -> np.ndarray:
    """Square ``n x n`` exactly antisymmetric float matrix; ``None`` means zeros."""
    if M is None:
        return np.zeros((n, n))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (n, n):
        raise ValueError(f"{name} must have shape ({n}, {n}), got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    if not np.array_equal(M, -M.T):
        raise ValueError(f"{name} must be exactly antisymmetric")
    return M


def check_params(C, F, n: int) -> GKParams:
    return GKParams(check_antisymmetric(C, n, "C"), check_antisymmetric(F, n, "F"))
