"""Input validation helpers shared by the estimator, the measures, and file IO."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def check_feature_matrix(X, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Coerce to a C-contiguous float64 2-D array and verify finiteness."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if arr.shape[0] < min_rows:
        if arr.shape[0] == 0:
            raise ValidationError(f"{name}: empty input (no rows)")
        raise ValidationError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise ValidationError(f"{name}: empty input (no columns)")
    _require_finite(arr, name)
    return np.ascontiguousarray(arr)


def check_vector(v, dim: int | None = None, name: str = "v") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64).ravel()
    if dim is not None and arr.shape[0] != dim:
        raise ValidationError(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def check_unit_vector(w, dim: int | None = None, tol: float = 1e-8, name: str = "w") -> np.ndarray:
    arr = check_vector(w, dim=dim, name=name)
    nrm = float(np.linalg.norm(arr))
    if abs(nrm - 1.0) > tol:
        raise ValidationError(f"{name} must be unit-norm (within {tol}), got norm {nrm!r}")
    return arr


def check_labels(y, n_rows: int, name: str = "labels") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional")
    if arr.shape[0] != n_rows:
        raise ValidationError(f"{name} has length {arr.shape[0]}, expected {n_rows}")
    try:
        out = arr.astype(np.int64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} must be integer class ids: {exc}") from exc
    if arr.dtype.kind == "f" and not np.array_equal(out, arr):
        raise ValidationError(f"{name} must be integer class ids")
    return out


def check_symmetric(S, tol: float = 1e-8, name: str = "S") -> np.ndarray:
    arr = np.asarray(S, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be a square matrix, got shape {arr.shape}")
    _require_finite(arr, name)
    asym = float(np.max(np.abs(arr - arr.T))) if arr.size else 0.0
    if asym > tol:
        raise ValidationError(f"{name} is not symmetric: max asymmetry {asym!r} exceeds {tol}")
    return arr


def _require_finite(arr: np.ndarray, name: str) -> None:
    finite = np.isfinite(arr)
    if not finite.all():
        pos = np.argwhere(~finite)[0]
        where = f"row {pos[0]}, column {pos[1]}" if arr.ndim == 2 else f"index {pos[0]}"
        raise ValidationError(f"{name} contains a non-finite value at {where}")
