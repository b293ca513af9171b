"""Isotropy measures built on the exponential partition function.

``partition`` sums exp(w . f(i)) over the feature set for a unit direction
w. A feature set is isotropic when that sum barely depends on w; the
measures below quantify this three ways: an empirical min/max ratio over a
deterministic probe set (the eigenvectors of A^T A and their negations), and
two closed-form approximations driven by the column-sum norm and the extreme
singular values. All partition arithmetic runs in the log domain so large
feature norms cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import PartitionOverflowError
from .validation import check_feature_matrix, check_unit_vector

PROBE_TOL = 3e-8
PROBE_MAX_ITER = 200000

_MAX_EXP = math.log(np.finfo(np.float64).max)


@dataclass(frozen=True)
class IsotropyReport:
    """Bundle of all isotropy measurements for one feature set.

    ``h_min``/``h_max`` are the partition extremes over the probe set and may
    be ``inf`` when the exponentials exceed the float range; the log forms
    are always finite.
    """

    n: int
    dim: int
    h_min: float
    h_max: float
    log_h_min: float
    log_h_max: float
    m_empirical: float
    m_first_order: float
    m_second_order: float
    sigma_min: float
    sigma_max: float
    ones_proj_norm: float


def log_partition(F, w) -> float:
    """log of sum_i exp(w . f(i)) for a unit vector w, computed stably."""
    F = check_feature_matrix(F, name="F")
    w = check_unit_vector(w, dim=F.shape[1], name="w")
    dots = F @ w
    if not np.all(np.isfinite(dots)):
        raise PartitionOverflowError("projections overflow even in the log domain")
    m = float(np.max(dots))
    return m + math.log(float(np.sum(np.exp(dots - m))))


def partition(F, w, log: bool = False) -> float:
    """Partition function sum_i exp(w . f(i)); pass log=True for its logarithm."""
    lp = log_partition(F, w)
    if log:
        return lp
    if lp > _MAX_EXP:
        raise PartitionOverflowError(
            f"partition value exp({lp!r}) exceeds the float range; use log=True")
    return math.exp(lp)


def isotropy_empirical(F) -> float:
    """min/max partition ratio over the probe set; always in [0, 1]."""
    F = check_feature_matrix(F, name="F")
    logs = _probe_log_partitions(F, _probe_directions(F))
    return math.exp(min(logs) - max(logs))


def isotropy_first_order(F) -> float:
    """(N - ||1^T A||) / (N + ||1^T A||); equals 1 exactly for zero-mean data."""
    F = check_feature_matrix(F, name="F")
    n = F.shape[0]
    r = float(np.linalg.norm(F.sum(axis=0)))
    return (n - r) / (n + r)


def isotropy_second_order(F) -> float:
    """First-order ratio corrected by the extreme singular values of the data."""
    F = check_feature_matrix(F, name="F")
    n = F.shape[0]
    r = float(np.linalg.norm(F.sum(axis=0)))
    smin_sq, smax_sq = _singular_value_range(F)
    return (n - r + 0.5 * smin_sq) / (n + r + 0.5 * smax_sq)


def isotropy_report(F) -> IsotropyReport:
    """All measures at once, sharing a single eigendecomposition of A^T A."""
    F = check_feature_matrix(F, name="F")
    n, d = F.shape
    pairs = _gram_pairs(F)
    probes = _stack_probes(pairs)
    logs = _probe_log_partitions(F, probes)
    log_min, log_max = min(logs), max(logs)
    r = float(np.linalg.norm(F.sum(axis=0)))
    smax_sq = max(pairs[0].value, 0.0)
    smin_sq = 0.0 if n < d else max(pairs[-1].value, 0.0)
    return IsotropyReport(
        n=n, dim=d,
        h_min=_safe_exp(log_min), h_max=_safe_exp(log_max),
        log_h_min=log_min, log_h_max=log_max,
        m_empirical=math.exp(log_min - log_max),
        m_first_order=(n - r) / (n + r),
        m_second_order=(n - r + 0.5 * smin_sq) / (n + r + 0.5 * smax_sq),
        sigma_min=math.sqrt(smin_sq), sigma_max=math.sqrt(smax_sq),
        ones_proj_norm=r)


def _gram_pairs(F: np.ndarray) -> list:
    G = F.T @ F
    G = (G + G.T) / 2.0
    return linalg.top_eigenpairs(G, F.shape[1], tol=PROBE_TOL, max_iter=PROBE_MAX_ITER)


def _stack_probes(pairs) -> np.ndarray:
    vecs = np.vstack([p.vector for p in pairs])
    return np.vstack([vecs, -vecs])


def _probe_directions(F: np.ndarray) -> np.ndarray:
    """Eigenvectors of A^T A and their negations; H differs under negation."""
    return _stack_probes(_gram_pairs(F))


def _probe_log_partitions(F: np.ndarray, probes: np.ndarray) -> list[float]:
    dots = F @ probes.T
    if not np.all(np.isfinite(dots)):
        raise PartitionOverflowError("projections overflow even in the log domain")
    m = dots.max(axis=0)
    return [float(mi + math.log(float(np.sum(np.exp(col - mi)))))
            for col, mi in zip(dots.T, m)]


def _singular_value_range(F: np.ndarray) -> tuple[float, float]:
    n, d = F.shape
    pairs = _gram_pairs(F)
    smax_sq = max(pairs[0].value, 0.0)
    # A has min(n, d) singular values; with n < d the direction minimizing
    # w^T A^T A w lies in the null space, so the smallest is exactly 0.
    smin_sq = 0.0 if n < d else max(pairs[-1].value, 0.0)
    return smin_sq, smax_sq


def _safe_exp(x: float) -> float:
    return math.exp(x) if x <= _MAX_EXP else math.inf
