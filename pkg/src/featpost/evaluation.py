"""Desk-scale downstream evaluation: classification and pair verification.

The evaluators are deliberately simple geometry-sensitive classifiers so a
change in the feature layout shows up directly in accuracy. Every tie is
broken by a fixed rule (smallest class id, smallest threshold, smallest
training index) so results reproduce bit-for-bit across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .isotropy import isotropy_empirical
from .postprocess import FeaturePostprocessor
from .rng import SplitMix64
from .validation import check_feature_matrix, check_labels

EVALUATORS = ("nearest_centroid", "knn", "pair_verify")
_PAIR_RETRIES = 100000


@dataclass(frozen=True)
class EvalReport:
    """Before/after accuracy of one evaluator on one deterministic split."""

    evaluator: str
    params: dict = field(compare=False)
    seed: int = 0
    train_size: int = 0
    test_size: int = 0
    t_used: int = 0
    accuracy_before: float = 0.0
    accuracy_after: float = 0.0
    per_class: dict | None = None


def stratified_split(F, labels, test_fraction: float, seed: int):
    """Deterministic stratified split: (F_train, y_train, F_test, y_test).

    Per-class test counts are apportioned by largest remainder so the
    overall test size is round(N * test_fraction) whenever every class can
    afford it, then clamped so both sides keep at least one example per
    class. Classes with a single example are rejected by name.
    """
    F = check_feature_matrix(F, name="F", min_rows=2)
    y = check_labels(labels, F.shape[0])
    train_idx, test_idx = _split_indices(y, test_fraction, seed)
    return F[train_idx], y[train_idx], F[test_idx], y[test_idx]


def _split_indices(y: np.ndarray, test_fraction: float, seed: int):
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError(f"test_fraction must be in (0, 1), got {test_fraction!r}")
    classes = np.unique(y)
    for c in classes:
        if int(np.sum(y == c)) < 2:
            raise ValidationError(
                f"class {int(c)} has a single example and cannot appear on both sides")
    counts = {int(c): int(np.sum(y == c)) for c in classes}
    n = int(y.shape[0])
    target = int(round(n * test_fraction))
    floors = {c: int(math.floor(cnt * test_fraction)) for c, cnt in counts.items()}
    remainders = sorted(counts, key=lambda c: (-(counts[c] * test_fraction - floors[c]), c))
    leftover = target - sum(floors.values())
    take = dict(floors)
    for c in remainders:
        if leftover <= 0:
            break
        take[c] += 1
        leftover -= 1
    rng = SplitMix64(seed)
    train_idx, test_idx = [], []
    for c in sorted(counts):
        members = [int(i) for i in np.flatnonzero(y == c)]
        rng.shuffle(members)
        n_test = min(max(take[c], 1), counts[c] - 1)
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    return np.asarray(sorted(train_idx)), np.asarray(sorted(test_idx))


def nearest_centroid(train_F, train_y, test_F) -> np.ndarray:
    """Predict the class whose training centroid is nearest; ties to the smaller id."""
    train_F = check_feature_matrix(train_F, name="train_F")
    train_y = check_labels(train_y, train_F.shape[0])
    test_F = check_feature_matrix(test_F, name="test_F")
    if test_F.shape[1] != train_F.shape[1]:
        raise ValidationError("train and test dimensions differ")
    classes = np.unique(train_y)
    centroids = np.vstack([train_F[train_y == c].mean(axis=0) for c in classes])
    d2 = ((test_F[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return classes[np.argmin(d2, axis=1)]


def knn(train_F, train_y, test_F, k: int, metric: str = "euclidean") -> np.ndarray:
    """k-nearest-neighbour majority vote; all ties resolve to the smaller id/index."""
    train_F = check_feature_matrix(train_F, name="train_F")
    train_y = check_labels(train_y, train_F.shape[0])
    test_F = check_feature_matrix(test_F, name="test_F")
    if test_F.shape[1] != train_F.shape[1]:
        raise ValidationError("train and test dimensions differ")
    if k < 1:
        raise ValidationError(f"k must be at least 1, got {k}")
    if k > train_F.shape[0]:
        raise ValidationError(f"k ({k}) exceeds the training size ({train_F.shape[0]})")
    if metric == "euclidean":
        cost = ((test_F[:, None, :] - train_F[None, :, :]) ** 2).sum(axis=2)
    elif metric == "cosine":
        cost = -_cosine_matrix(test_F, train_F)
    else:
        raise ValidationError(f"unknown metric {metric!r}")
    classes, compact = np.unique(train_y, return_inverse=True)
    preds = np.empty(test_F.shape[0], dtype=np.int64)
    for i, row in enumerate(cost):
        neighbours = np.argsort(row, kind="stable")[:k]  # ties keep the smaller index
        votes = np.bincount(compact[neighbours], minlength=classes.shape[0])
        preds[i] = classes[np.argmax(votes)]  # argmax picks the smaller id on vote ties
    return preds


def pair_similarities(F_a, F_b) -> np.ndarray:
    """Row-wise cosine similarity of aligned pairs; zero vectors pin to -1."""
    F_a = check_feature_matrix(F_a, name="F_a")
    F_b = check_feature_matrix(F_b, name="F_b")
    if F_a.shape != F_b.shape:
        raise ValidationError("pair sides must have identical shapes")
    return _pairwise_cosine(F_a, F_b)


def verify_pairs(F_a, F_b, same, metric: str = "cosine") -> tuple[float, float]:
    """Best-threshold pair verification: (threshold, accuracy).

    Predicts "same" when similarity >= threshold. Candidate thresholds are
    -inf, every midpoint of consecutive sorted similarities, and +inf; the
    smallest threshold achieving the best accuracy wins.
    """
    if metric != "cosine":
        raise ValidationError(f"unknown metric {metric!r}")
    sims = pair_similarities(F_a, F_b)
    same = np.asarray(same, dtype=bool).ravel()
    if same.shape[0] != sims.shape[0]:
        raise ValidationError("pair labels must align with the pair rows")
    ordered = np.sort(sims)
    candidates = [-math.inf]
    candidates.extend((ordered[i] + ordered[i + 1]) / 2.0 for i in range(len(ordered) - 1))
    candidates.append(math.inf)
    best_theta, best_acc = -math.inf, -1.0
    for theta in candidates:
        acc = float(np.mean((sims >= theta) == same))
        if acc > best_acc:
            best_theta, best_acc = theta, acc
    return best_theta, best_acc


def make_verification_pairs(labels, seed: int, n_pairs: int | None = None):
    """Deterministic same/different pair sample: (idx_a, idx_b, same)."""
    y = check_labels(labels, np.asarray(labels).shape[0])
    n = y.shape[0]
    if n < 2:
        raise ValidationError("need at least two rows to form pairs")
    _, counts = np.unique(y, return_counts=True)
    if counts.shape[0] < 2:
        raise ValidationError("need at least two classes to form different-pairs")
    if not np.any(counts >= 2):
        raise ValidationError("need at least one class with two examples for same-pairs")
    per_side = max(1, n // 2) if n_pairs is None else n_pairs
    if per_side < 1:
        raise ValidationError("n_pairs must be positive")
    rng = SplitMix64(seed)
    idx_a, idx_b, same = [], [], []
    for want_same in (True, False):
        for _ in range(per_side):
            for _attempt in range(_PAIR_RETRIES):
                a = rng.next_below(n)
                b = rng.next_below(n)
                if a != b and (y[a] == y[b]) == want_same:
                    break
            else:
                raise ValidationError("could not sample the requested pairs")
            idx_a.append(a)
            idx_b.append(b)
            same.append(want_same)
    return np.asarray(idx_a), np.asarray(idx_b), np.asarray(same, dtype=bool)


def compare(F, labels, t: int = 1, evaluator: str = "nearest_centroid",
            params: dict | None = None, seed: int = 0, test_fraction: float = 0.3,
            fit_on: str = "train", pca_dim: int | None = None,
            normalize: str = "off") -> EvalReport:
    """Run one evaluator on raw features and on postprocessed features.

    "Before" is the evaluator on the features exactly as given; "after" is
    the evaluator on the output of the fitted postprocessor (mean removal
    plus top-t projection), using the same deterministic split.
    """
    F = check_feature_matrix(F, name="F", min_rows=2)
    y = check_labels(labels, F.shape[0])
    params = dict(params or {})
    if evaluator not in EVALUATORS:
        raise ValidationError(f"unknown evaluator {evaluator!r}; choose from {EVALUATORS}")
    if fit_on not in ("train", "all"):
        raise ValidationError(f"fit_on must be 'train' or 'all', got {fit_on!r}")
    if normalize not in ("off", "before", "after"):
        raise ValidationError(f"normalize must be off/before/after, got {normalize!r}")

    if evaluator == "pair_verify":
        return _compare_pairs(F, y, t, params, seed, pca_dim, normalize)

    train_idx, test_idx = _split_indices(y, test_fraction, seed)
    raw_tr, raw_te = F[train_idx], F[test_idx]
    y_tr, y_te = y[train_idx], y[test_idx]

    post_tr, post_te, _ = _postprocessed(F, train_idx, t, fit_on, pca_dim, normalize)
    preds_before = _run_evaluator(evaluator, raw_tr, y_tr, raw_te, params)
    preds_after = _run_evaluator(evaluator, post_tr, y_tr, post_te, params)
    return EvalReport(
        evaluator=evaluator, params=params, seed=seed,
        train_size=int(train_idx.shape[0]), test_size=int(test_idx.shape[0]),
        t_used=t,
        accuracy_before=float(np.mean(preds_before == y_te)),
        accuracy_after=float(np.mean(preds_after == y_te)),
        per_class=_per_class_accuracy(preds_before, preds_after, y_te))


def sweep(F, labels, t_max: int = 10, evaluator: str = "nearest_centroid",
          params: dict | None = None, seed: int = 0, test_fraction: float = 0.3,
          fit_on: str = "train", pca_dim: int | None = None,
          normalize: str = "off") -> list[dict]:
    """Evaluate every t in [0, t_max]; rows carry accuracy and isotropy per t."""
    if t_max < 0:
        raise ValidationError("t_max must be non-negative")
    F = check_feature_matrix(F, name="F", min_rows=2)
    y = check_labels(labels, F.shape[0])
    rows = []
    for t in range(t_max + 1):
        report = compare(F, y, t=t, evaluator=evaluator, params=params, seed=seed,
                         test_fraction=test_fraction, fit_on=fit_on, pca_dim=pca_dim,
                         normalize=normalize)
        if evaluator == "pair_verify":
            raw = _l2_rows(F) if normalize == "before" else F
            transformed = FeaturePostprocessor(t=t, pca_dim=pca_dim).fit(raw).transform(raw)
            if normalize == "after":
                transformed = _l2_rows(transformed)
        else:
            train_idx, _ = _split_indices(y, test_fraction, seed)
            _, _, transformed = _postprocessed(F, train_idx, t, fit_on, pca_dim,
                                               normalize)
        rows.append({"t": t, "report": report,
                     "m_empirical": isotropy_empirical(transformed)})
    return rows


def _postprocessed(F, train_idx, t, fit_on, pca_dim, normalize):
    """Postprocessed (train rows, test rows, full matrix) for one split."""
    work = _l2_rows(F) if normalize == "before" else F
    fit_data = work if fit_on == "all" else work[train_idx]
    model = FeaturePostprocessor(t=t, pca_dim=pca_dim).fit(fit_data)
    out = model.transform(work)
    if normalize == "after":
        out = _l2_rows(out)
    test_mask = np.ones(F.shape[0], dtype=bool)
    test_mask[train_idx] = False
    return out[train_idx], out[test_mask], out


def _compare_pairs(F, y, t, params, seed, pca_dim, normalize):
    n_pairs = params.get("n_pairs")
    idx_a, idx_b, same = make_verification_pairs(y, seed, n_pairs)
    raw = _l2_rows(F) if normalize == "before" else F
    _, acc_before = verify_pairs(raw[idx_a], raw[idx_b], same)
    model = FeaturePostprocessor(t=t, pca_dim=pca_dim).fit(raw)  # no split: global fit
    post = model.transform(raw)
    if normalize == "after":
        post = _l2_rows(post)
    threshold, acc_after = verify_pairs(post[idx_a], post[idx_b], same)
    out_params = dict(params)
    out_params["threshold_after"] = threshold
    return EvalReport(
        evaluator="pair_verify", params=out_params, seed=seed,
        train_size=int(F.shape[0]), test_size=int(same.shape[0]), t_used=t,
        accuracy_before=acc_before, accuracy_after=acc_after, per_class=None)


def _run_evaluator(evaluator, train_F, train_y, test_F, params):
    if evaluator == "nearest_centroid":
        return nearest_centroid(train_F, train_y, test_F)
    k = int(params.get("k", 5))
    metric = params.get("metric", "euclidean")
    return knn(train_F, train_y, test_F, k=k, metric=metric)


def _per_class_accuracy(preds_before, preds_after, y_te):
    out = {}
    for c in np.unique(y_te):
        mask = y_te == c
        out[int(c)] = {
            "before": float(np.mean(preds_before[mask] == c)),
            "after": float(np.mean(preds_after[mask] == c)),
        }
    return out


def _l2_rows(F: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(F, axis=1, keepdims=True)
    return F / np.where(norms == 0.0, 1.0, norms)


def _cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    sims = A @ B.T
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = sims / np.outer(na, nb)
    sims[~np.isfinite(sims)] = -1.0  # zero vectors: similarity pinned to -1
    return sims


def _pairwise_cosine(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=1)
    nb = np.linalg.norm(B, axis=1)
    dots = np.einsum("ij,ij->i", A, B)
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = dots / (na * nb)
    sims[~np.isfinite(sims)] = -1.0
    return sims
