"""Common-mean removal plus dominating-direction projection.

The transformer learns the mean feature vector and the top ``t`` principal
directions of the demeaned data, then maps each feature vector to its
demeaned form with those directions projected out. Output dimension equals
input dimension; this is a projection, not a truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import linalg
from .errors import ValidationError
from .validation import check_feature_matrix

_RANK_EPS = 1e-12  # relative cutoff below which an eigenvalue counts as zero rank


class FeaturePostprocessor(BaseEstimator, TransformerMixin):
    """Remove the common mean, then project away the top dominating directions.

    Parameters
    ----------
    t : int, default=1
        Number of dominating directions removed after demeaning. ``t=0``
        keeps the model mean-only, so ``transform`` just demeans.
    pca_dim : int or None, default=None
        Cap on how many principal components the internal PCA may consider.
        ``None`` means the full feature dimension. Only the top ``t``
        directions are retained either way, so the value never changes the
        output; it is validated (``t <= pca_dim <= n_features``) and recorded.
    tol : float, default=1e-10
        Eigensolver residual tolerance.
    max_iter : int, default=10000
        Eigensolver iteration budget per direction.

    Attributes
    ----------
    mean_ : ndarray of shape (n_features,)
        Common mean vector of the fitted data.
    directions_ : ndarray of shape (t, n_features)
        Orthonormal dominating directions, strongest first.
    eigenvalues_ : ndarray of shape (t,)
        Variances along the removed directions, descending.
    n_features_in_ : int
    n_samples_ : int
        Number of rows seen at fit time.
    """

    def __init__(self, t: int = 1, pca_dim: int | None = None,
                 tol: float = linalg.DEFAULT_TOL, max_iter: int = linalg.DEFAULT_MAX_ITER):
        self.t = t
        self.pca_dim = pca_dim
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        F = check_feature_matrix(X, name="X", min_rows=2)
        n, d = F.shape
        t, pca_dim = self._check_params(d)
        mean = linalg.column_mean(F)
        centered = F - mean
        if t == 0:
            directions = np.empty((0, d))
            eigenvalues = np.empty(0)
        else:
            if n < d:
                pairs = linalg.gram_eigenpairs(centered, t, tol=self.tol,
                                               max_iter=self.max_iter)
            else:
                pairs = linalg.top_eigenpairs(linalg.scatter(centered), t,
                                              tol=self.tol, max_iter=self.max_iter)
            top = pairs[0].value
            usable = sum(1 for p in pairs if p.value > _RANK_EPS * max(top, 1e-300))
            if top <= 0.0:
                usable = 0
            if usable < t:
                raise ValidationError(
                    f"demeaned data has only {usable} non-zero principal "
                    f"directions; the largest achievable t is {usable}")
            directions = np.vstack([p.vector for p in pairs])
            eigenvalues = np.asarray([p.value for p in pairs])
        self.mean_ = mean
        self.directions_ = directions
        self.eigenvalues_ = eigenvalues
        self.n_features_in_ = d
        self.n_samples_ = n
        self.t_ = t
        self.pca_dim_ = pca_dim
        return self

    def transform(self, X) -> np.ndarray:
        self._check_fitted()
        F = check_feature_matrix(X, name="X")
        if F.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {F.shape[1]} features, model was fitted with {self.n_features_in_}")
        out = F - self.mean_
        if self.t_ > 0:
            out = out - (out @ self.directions_.T) @ self.directions_
        return out

    def _check_params(self, d: int) -> tuple[int, int]:
        t = self.t
        if not isinstance(t, (int, np.integer)) or t < 0:
            raise ValidationError(f"t must be a non-negative integer, got {t!r}")
        pca_dim = d if self.pca_dim is None else self.pca_dim
        if not isinstance(pca_dim, (int, np.integer)) or not 1 <= pca_dim <= d:
            raise ValidationError(f"pca_dim must be in [1, {d}], got {self.pca_dim!r}")
        if t > pca_dim:
            raise ValidationError(f"t ({t}) cannot exceed pca_dim ({pca_dim})")
        return int(t), int(pca_dim)

    def _check_fitted(self) -> None:
        if not hasattr(self, "mean_"):
            raise NotFittedError(
                "This FeaturePostprocessor instance is not fitted yet; call fit first.")


@dataclass(frozen=True)
class SpectrumSummary:
    """Shape of a feature set: mean-vector norm and how spectral energy concentrates."""

    n: int
    dim: int
    mean_norm: float
    avg_feature_norm: float
    norm_ratio: float
    eigenvalues: tuple
    energy_fractions: tuple
    cumulative_energy: tuple


def spectrum_summary(F, k: int) -> SpectrumSummary:
    """Top-k spectrum of the demeaned data plus mean-norm diagnostics.

    ``energy_fractions`` are eigenvalue shares of the total demeaned
    variance (the scatter trace), so they are exact even though only the
    top k eigenvalues are extracted.
    """
    F = check_feature_matrix(F, name="F")
    n, d = F.shape
    if not 1 <= k <= d:
        raise ValidationError(f"k must be in [1, {d}], got {k}")
    mean = linalg.column_mean(F)
    centered = F - mean
    mean_norm = float(np.linalg.norm(mean))
    avg_norm = float(np.mean(np.linalg.norm(F, axis=1)))
    ratio = mean_norm / avg_norm if avg_norm > 0.0 else 0.0
    total = float(np.sum(centered * centered)) / n
    if total > 0.0:
        if n < d:
            pairs = linalg.gram_eigenpairs(centered, k)
        else:
            pairs = linalg.top_eigenpairs(linalg.scatter(centered), k)
        eigenvalues = tuple(p.value for p in pairs)
        fractions = tuple(v / total for v in eigenvalues)
    else:
        eigenvalues = (0.0,) * k
        fractions = (0.0,) * k
    cumulative = tuple(float(c) for c in np.cumsum(fractions))
    return SpectrumSummary(n=n, dim=d, mean_norm=mean_norm,
                           avg_feature_norm=avg_norm, norm_ratio=ratio,
                           eigenvalues=eigenvalues, energy_fractions=fractions,
                           cumulative_energy=cumulative)
