"""Dense matrix helpers and a deterministic symmetric eigensolver.

Only the machinery the rest of the package needs: column means, demeaning,
scatter matrices, and top-k eigenpairs of symmetric positive-semidefinite
matrices. The eigensolver is power iteration with Hotelling deflation and a
fixed all-ones starting vector, so identical inputs give bit-identical
results run to run. A Gram-matrix path covers the wide case (fewer rows
than columns) without forming the large scatter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .rng import gaussian_block
from .validation import check_feature_matrix, check_symmetric, check_vector

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10000

_SIGN_EPS = 1e-12          # entries at or below this do not pick the canonical sign
_NEGATIVE_CLAMP = 1e-10    # eigenvalues in [-clamp, 0) are rounding noise, clamped to 0
_STALL_WINDOW = 200        # iterations between stagnation checks
_PROBE_ITERS = 100         # budget for the dominance check after convergence
_PROBE_SEED = 0x5EED1E5    # fixed stream for deterministic probe/perturbation vectors


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue (clamped to be >= 0) with its unit-norm eigenvector."""

    value: float
    vector: np.ndarray


def column_mean(F) -> np.ndarray:
    """Per-column arithmetic mean of a feature matrix."""
    F = check_feature_matrix(F, name="F")
    return F.mean(axis=0)


def subtract_row(F, v) -> np.ndarray:
    """Subtract the row vector ``v`` from every row of ``F``."""
    F = check_feature_matrix(F, name="F")
    v = check_vector(v, dim=F.shape[1], name="v")
    return F - v


def scatter(Fc) -> np.ndarray:
    """(1/N) Fc^T Fc, symmetrized so rounding cannot break exact symmetry."""
    Fc = check_feature_matrix(Fc, name="Fc")
    S = (Fc.T @ Fc) / Fc.shape[0]
    return (S + S.T) / 2.0


def top_eigenpairs(S, k: int, tol: float = DEFAULT_TOL,
                   max_iter: int = DEFAULT_MAX_ITER) -> list[EigenPair]:
    """Top-k eigenpairs of a symmetric PSD matrix, descending by eigenvalue.

    Power iteration with Hotelling deflation. The starting vector is the
    normalized all-ones vector; it is perturbed deterministically when the
    iteration stagnates, and each converged pair is checked against a probe
    of its orthogonal complement so an unlucky start cannot latch onto a
    subdominant eigenvector.

    Returned vectors are orthonormal, sign-canonicalized (first entry larger
    than 1e-12 in magnitude is positive), and satisfy
    ``norm(S v - value v) <= tol * max(1, value)``.
    """
    S = check_symmetric(S, tol=1e-8, name="S")
    d = S.shape[0]
    if not 1 <= k <= d:
        raise ValidationError(f"k must be in [1, {d}], got {k}")
    if max_iter < 1:
        raise ValidationError("max_iter must be positive")
    work = (S + S.T) / 2.0
    deflated = work.copy()
    values: list[float] = []
    found = np.empty((0, d))
    for j in range(k):
        # Non-final pairs converge to an absolute tol/4 target: their vector
        # error caps the residual floor of every later (possibly tiny-
        # eigenvalue) pair, so a lambda-scaled target would poison those.
        lam, vec = _dominant_pair(deflated, found, tol, max_iter,
                                  is_final=(j == k - 1))
        values.append(lam)
        found = np.vstack([found, vec])
        deflated -= lam * np.outer(vec, vec)
        deflated = (deflated + deflated.T) / 2.0
    order = np.argsort(-np.asarray(values), kind="stable")
    sorted_vals = []
    for idx in order:
        lam = values[idx]
        if lam < 0.0:
            if lam < -_NEGATIVE_CLAMP:
                raise ValidationError(
                    f"matrix is not positive semidefinite: eigenvalue {lam!r}")
            lam = 0.0
        sorted_vals.append(lam)
    sorted_vecs = found[order]
    sorted_vecs = _canonicalize_degenerate(sorted_vals, sorted_vecs, tol)
    pairs = []
    for lam, row in zip(sorted_vals, sorted_vecs):
        vec = _canonical_sign(row)
        resid = float(np.linalg.norm(work @ vec - lam * vec))
        if resid > tol * max(1.0, lam):
            raise ConvergenceError(
                f"eigenpair residual {resid:.3e} exceeds tolerance "
                f"{tol * max(1.0, lam):.3e}", residual=resid)
        pairs.append(EigenPair(value=lam, vector=vec))
    return pairs


def gram_eigenpairs(Fc, k: int, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> list[EigenPair]:
    """Eigenpairs of ``scatter(Fc)`` computed through the small N x N Gram matrix.

    Only valid when ``Fc`` has fewer rows than columns. Eigenvectors are the
    back-projected Gram eigenvectors ``Fc^T w``, renormalized; pairs beyond
    the row rank are completed with deterministic null-space directions at
    eigenvalue 0, so requesting up to the full column dimension works.
    """
    Fc = check_feature_matrix(Fc, name="Fc")
    n, d = Fc.shape
    if n >= d:
        raise ValidationError(f"gram path requires fewer rows than columns, got {n}x{d}")
    if not 1 <= k <= d:
        raise ValidationError(f"k must be in [1, {d}], got {k}")
    gram = (Fc @ Fc.T) / n
    gram = (gram + gram.T) / 2.0
    gram_pairs = top_eigenpairs(gram, min(k, n), tol=tol, max_iter=max_iter)

    scale = max(1.0, float(np.max(np.abs(Fc))))
    vectors: list[np.ndarray] = []
    values: list[float] = []
    row_basis = None
    for gp in gram_pairs:
        back = Fc.T @ gp.vector
        nrm = float(np.linalg.norm(back))
        if nrm > 1e-12 * scale:
            vec = back / nrm
            vec = _project_out(vec, np.asarray(vectors)) if vectors else vec
            vec /= np.linalg.norm(vec)
            vectors.append(vec)
            values.append(max(gp.value, 0.0))
        else:
            # Gram eigenvalue is numerically zero: take a null-space direction.
            if row_basis is None:
                row_basis = _orthonormal_rows(Fc)
            vectors.append(_null_direction(row_basis, vectors, d))
            values.append(0.0)
    if row_basis is None and len(vectors) < k:
        row_basis = _orthonormal_rows(Fc)
    while len(vectors) < k:
        vectors.append(_null_direction(row_basis, vectors, d))
        values.append(0.0)
    return [EigenPair(value=val, vector=_canonical_sign(vec))
            for val, vec in zip(values, vectors)]


def _canonicalize_degenerate(values: list[float], vectors: np.ndarray,
                             tol: float) -> np.ndarray:
    """Re-basis groups of equal eigenvalues toward the standard basis.

    Within a degenerate eigenspace any orthonormal basis is a valid answer;
    picking the one nearest the coordinate axes makes the output a canonical
    function of the input (an identity-like matrix yields exactly e_0..e_k)
    instead of an accident of iteration history. Two eigenvalues count as
    degenerate only when their gap is within the residual the smaller one is
    allowed to carry, so the rotation can never break the residual contract.
    """
    vectors = vectors.copy()
    d = vectors.shape[1]
    start = 0
    while start < len(values):
        stop = start + 1
        while (stop < len(values)
               and values[start] - values[stop] <= tol * max(1.0, values[stop]) / 2.0):
            stop += 1
        if stop - start > 1:
            span = vectors[start:stop]
            chosen: list[np.ndarray] = []
            for j in range(d):
                p = span.T @ span[:, j]  # projection of e_j into the cluster span
                for c in chosen:
                    p = p - (c @ p) * c
                nrm = float(np.linalg.norm(p))
                if nrm > 1e-6:
                    chosen.append(p / nrm)
                if len(chosen) == stop - start:
                    break
            if len(chosen) == stop - start:
                vectors[start:stop] = np.asarray(chosen)
        start = stop
    return vectors


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    lead = np.flatnonzero(np.abs(v) > _SIGN_EPS)
    if lead.size and v[lead[0]] < 0.0:
        return -v
    return v.copy()


def _project_out(v: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.size == 0:
        return v
    return v - basis.T @ (basis @ v)


def _orthonormal_rows(Fc: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the row space via modified Gram-Schmidt, fixed order."""
    scale = max(1.0, float(np.max(np.abs(Fc))))
    basis: list[np.ndarray] = []
    for row in Fc:
        r = row.copy()
        for b in basis:
            r -= (b @ r) * b
        nrm = float(np.linalg.norm(r))
        if nrm > 1e-12 * scale:
            basis.append(r / nrm)
    return np.asarray(basis) if basis else np.empty((0, Fc.shape[1]))


def _null_direction(row_basis: np.ndarray, vectors: list[np.ndarray], d: int) -> np.ndarray:
    """Deterministic unit vector orthogonal to the row space and to ``vectors``."""
    taken = [row_basis] if row_basis is not None and row_basis.size else []
    if vectors:
        taken.append(np.asarray(vectors))
    if taken:
        # row space and found vectors overlap; re-orthonormalize the union so
        # the projection below is a true projection
        basis = _orthonormal_rows(np.vstack(taken))
    else:
        basis = np.empty((0, d))
    best, best_norm = None, 0.0
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        r = _project_out(e, basis)
        nrm = float(np.linalg.norm(r))
        if nrm > 0.5:
            return r / nrm
        if nrm > best_norm:
            best, best_norm = r, nrm
    if best is None or best_norm <= 1e-12:
        raise ConvergenceError("could not construct a null-space direction")
    return best / best_norm


def _start_vector(d: int, found: np.ndarray, attempt: int) -> np.ndarray:
    """All-ones start; deterministic gaussian jitter on retry; basis fallback."""
    v = np.ones(d) / math.sqrt(d)
    if attempt > 0:
        g = gaussian_block(_PROBE_SEED + attempt, d)
        v = v + g / max(1.0, float(np.linalg.norm(g)))
    v = _project_out(v, found)
    nrm = float(np.linalg.norm(v))
    if nrm > 1e-8:
        return v / nrm
    return _null_direction(None, [row for row in found], d)


def _dominant_pair(M: np.ndarray, found: np.ndarray, tol: float,
                   max_iter: int, is_final: bool) -> tuple[float, np.ndarray]:
    """Largest eigenpair of ``M`` restricted to the complement of ``found``.

    The final pair targets the public contract ``tol * max(1, lam)``; every
    earlier pair targets the absolute ``tol / 4`` so its leftover vector
    error stays below what later pairs are allowed to return.
    """
    d = M.shape[0]
    v = _start_vector(d, found, 0)
    perturbations = 0
    best_resid = math.inf
    checkpoint = math.inf
    it = 0
    while it < max_iter:
        it += 1
        v = _project_out(v, found)
        nrm = float(np.linalg.norm(v))
        if not math.isfinite(nrm) or nrm < 1e-300:
            perturbations += 1
            v = _start_vector(d, found, perturbations)
            continue
        v /= nrm
        w = M @ v
        # Project the image too: earlier pairs' residual crumbs live in the
        # found subspace and would otherwise put a floor under this residual.
        w = _project_out(w, found)
        lam = float(v @ w)
        resid = float(np.linalg.norm(w - lam * v))
        best_resid = min(best_resid, resid)
        target = tol * max(1.0, abs(lam)) / 2.0 if is_final else tol / 4.0
        if resid <= target:
            swapped, cand = _dominance_probe(M, found, v, lam, tol)
            if not swapped:
                return lam, v
            v = cand
            best_resid = checkpoint = math.inf
            continue
        if it % _STALL_WINDOW == 0:
            # Perturb only when genuinely parked far from the target; slow
            # geometric progress on near-degenerate pairs must not be reset.
            if resid > 0.999 * checkpoint and resid > 100.0 * target:
                perturbations += 1
                g = gaussian_block(_PROBE_SEED + perturbations, d)
                v = v + 1e-3 * g / max(1.0, float(np.linalg.norm(g)))
                checkpoint = math.inf
                continue
            checkpoint = resid
        v = w
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(best residual {best_resid:.3e})", residual=best_resid)


def _dominance_probe(M: np.ndarray, found: np.ndarray, v: np.ndarray,
                     lam: float, tol: float) -> tuple[bool, np.ndarray]:
    """Check the complement of ``v`` for a larger eigenvalue.

    Power iteration can converge instantly when the start happens to be an
    exact subdominant eigenvector (anti-correlated 2-D data does this). A
    short deterministic probe of the complement catches that: if a direction
    with a clearly larger Rayleigh quotient exists, iteration restarts there.
    """
    d = M.shape[0]
    if found.shape[0] + 1 >= d:
        return False, v
    basis = np.vstack([found, v[None, :]])
    q = gaussian_block(_PROBE_SEED ^ (found.shape[0] + 1), d)
    margin = max(10.0 * tol, 1e-12) * max(1.0, abs(lam))
    for _ in range(_PROBE_ITERS):
        q = _project_out(q, basis)
        nrm = float(np.linalg.norm(q))
        if not math.isfinite(nrm) or nrm < 1e-300:
            return False, v
        q /= nrm
        w = M @ q
        mu = float(q @ w)
        if mu > lam + margin:
            return True, q
        q = w
    return False, v
