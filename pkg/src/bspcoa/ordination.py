"""Distance-based ordination: dissimilarities, double centering, PCoA.

Coordinates are obtained by eigendecomposition of the double-centered
Gram matrix ``G = -1/2 J D^2 J``. Non-Euclidean dissimilarities make G
indefinite; only eigenvalues above a small relative tolerance are kept,
and negative ones are dropped (no Lingoes/Cailliez correction).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DataError, NumericalError

__all__ = [
    "FeatureMatrix",
    "DistanceMatrix",
    "PcoaResult",
    "SimilaritySqrt",
    "euclidean_distance",
    "bray_curtis_distance",
    "hellinger_distance",
    "double_center",
    "pcoa",
    "similarity_sqrt",
    "DISTANCE_FUNCTIONS",
]


def _as_float_matrix(values, name):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FeatureMatrix:
    """Samples-by-features data matrix with row and column labels."""

    values: np.ndarray
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]

    def __post_init__(self):
        arr = _as_float_matrix(self.values, "feature matrix")
        n, p = arr.shape
        if n < 2 or p < 1:
            raise DataError(f"feature matrix needs n >= 2 samples and p >= 1 features, got {n}x{p}")
        if not np.all(np.isfinite(arr)):
            raise DataError("feature matrix contains non-finite entries")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        if len(self.row_ids) != n or len(self.col_ids) != p:
            raise DataError("row/column label lengths do not match matrix shape")

    @classmethod
    def from_array(cls, values, row_ids=None, col_ids=None):
        arr = _as_float_matrix(values, "feature matrix")
        n, p = arr.shape
        if row_ids is None:
            row_ids = tuple(f"s{i + 1}" for i in range(n))
        if col_ids is None:
            col_ids = tuple(f"f{j + 1}" for j in range(p))
        return cls(arr, tuple(row_ids), tuple(col_ids))

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_features(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative dissimilarity matrix with zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_float_matrix(self.values, "distance matrix")
        n, m = arr.shape
        if n != m:
            raise DataError(f"distance matrix must be square, got {n}x{m}")
        if not np.all(np.isfinite(arr)):
            raise DataError("distance matrix contains non-finite entries")
        scale = np.abs(arr).max()
        if np.abs(arr - arr.T).max() > 1e-12 * max(scale, 1e-300):
            raise DataError("distance matrix is not symmetric within 1e-12 relative tolerance")
        if np.any(np.diagonal(arr) != 0.0):
            raise DataError("distance matrix diagonal must be exactly zero")
        if arr.min() < 0.0:
            raise DataError("distance matrix has negative entries")
        object.__setattr__(self, "values", arr)

    @property
    def n_samples(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class PcoaResult:
    """Eigendecomposition products of the double-centered Gram matrix.

    ``coordinates`` holds the leading principal coordinates
    (column r has squared norm ``eigenvalues[r]``), ``eigvecs`` the
    corresponding orthonormal eigenvectors, and ``var_explained`` the
    per-axis fraction of the positive-eigenvalue mass.
    """

    eigenvalues: np.ndarray
    positive_count: int
    coordinates: np.ndarray
    eigvecs: np.ndarray
    var_explained: np.ndarray
    k_truncated: bool = field(default=False)

    @property
    def k(self):
        return self.coordinates.shape[1]


@dataclass(frozen=True)
class SimilaritySqrt:
    """Symmetric PSD square root of the positive part of a Gram matrix."""

    values: np.ndarray
    rank: int


def euclidean_distance(X: FeatureMatrix) -> DistanceMatrix:
    """Pairwise Euclidean distances between the rows of X."""
    return DistanceMatrix(squareform(pdist(X.values, metric="euclidean")))


def bray_curtis_distance(X: FeatureMatrix) -> DistanceMatrix:
    """Pairwise Bray-Curtis dissimilarities sum|x-y| / sum(x+y).

    Requires nonnegative entries. A pair of rows that are both entirely
    zero has an undefined dissimilarity and raises :class:`DataError`
    naming the two samples.
    """
    vals = X.values
    if vals.min() < 0.0:
        raise DataError("Bray-Curtis requires nonnegative entries")
    zero_rows = np.flatnonzero(vals.sum(axis=1) == 0.0)
    if zero_rows.size >= 2:
        a, b = X.row_ids[zero_rows[0]], X.row_ids[zero_rows[1]]
        raise DataError(
            f"Bray-Curtis undefined for samples {a!r} and {b!r}: both rows sum to zero"
        )
    d = squareform(pdist(vals, metric="braycurtis"))
    # exact arithmetic keeps d <= 1; guard against a final rounding ulp
    np.minimum(d, 1.0, out=d)
    return DistanceMatrix(d)


def hellinger_distance(X: FeatureMatrix) -> DistanceMatrix:
    """Euclidean distance between square-rooted row compositions.

    Rows are normalized to relative abundances internally, so the input
    may be raw counts. Values lie in [0, sqrt(2)].
    """
    vals = X.values
    if vals.min() < 0.0:
        raise DataError("Hellinger distance requires nonnegative entries")
    row_sums = vals.sum(axis=1)
    bad = np.flatnonzero(row_sums == 0.0)
    if bad.size:
        raise DataError(f"sample {X.row_ids[bad[0]]!r} has zero total abundance")
    transformed = np.sqrt(vals / row_sums[:, None])
    return DistanceMatrix(squareform(pdist(transformed, metric="euclidean")))


DISTANCE_FUNCTIONS = {
    "euclidean": euclidean_distance,
    "bray-curtis": bray_curtis_distance,
    "hellinger": hellinger_distance,
}


def double_center(D: DistanceMatrix | np.ndarray) -> np.ndarray:
    """Gower double centering ``G = -1/2 J D^2 J`` with J = I - 11'/n.

    Rows and columns of the result sum to zero; the output is
    symmetrized to remove floating-point asymmetry.
    """
    d = D.values if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)
    d2 = d * d
    row_means = d2.mean(axis=1)
    grand_mean = row_means.mean()
    G = -0.5 * (d2 - row_means[:, None] - row_means[None, :] + grand_mean)
    return 0.5 * (G + G.T)


def _check_symmetric(G, name="matrix"):
    scale = np.abs(G).max()
    if np.abs(G - G.T).max() > 1e-8 * max(scale, 1e-300):
        raise NumericalError(f"{name} is not symmetric within tolerance")


def _sorted_eigh(G):
    """Eigendecomposition sorted by descending eigenvalue with a fixed
    sign convention: each eigenvector's largest-magnitude entry is positive."""
    evals, evecs = np.linalg.eigh(G)
    order = np.argsort(evals)[::-1]
    evals = evals[order]
    evecs = evecs[:, order]
    flip = evecs[np.argmax(np.abs(evecs), axis=0), np.arange(evecs.shape[1])] < 0
    evecs[:, flip] *= -1.0
    return evals, evecs


def _eig_tol(evals, eig_tol):
    if eig_tol is None:
        return 1e-10 * max(1.0, evals[0]) if evals.size else 1e-10
    return eig_tol


def pcoa(D: DistanceMatrix, k: int, eig_tol: float | None = None) -> PcoaResult:
    """Classical principal coordinates analysis.

    Parameters
    ----------
    D : DistanceMatrix
        Pairwise dissimilarities.
    k : int
        Number of requested axes, 1 <= k <= n. If k exceeds the number
        of positive eigenvalues it is truncated with a warning.
    eig_tol : float, optional
        Threshold above which an eigenvalue counts as positive.
        Defaults to ``1e-10 * max(1, lambda_1)``.

    Returns
    -------
    PcoaResult
        Coordinates ``Z_k = H_k diag(sqrt(lambda_1..k))`` plus spectrum.
    """
    n = D.n_samples
    if not 1 <= k <= n:
        raise DataError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    G = double_center(D)
    _check_symmetric(G, "double-centered Gram matrix")
    evals, evecs = _sorted_eigh(G)
    tol = _eig_tol(evals, eig_tol)
    positive = evals > tol
    m = int(positive.sum())
    if m == 0:
        raise NumericalError("no positive eigenvalues: distance matrix carries no PCoA structure")
    truncated = k > m
    if truncated:
        warnings.warn(
            f"requested k={k} exceeds positive eigenvalue count m={m}; truncating to {m}",
            stacklevel=2,
        )
    k_eff = min(k, m)
    H_k = evecs[:, :k_eff]
    lam_k = evals[:k_eff]
    coords = H_k * np.sqrt(lam_k)
    var_explained = lam_k / evals[positive].sum()
    return PcoaResult(
        eigenvalues=evals,
        positive_count=m,
        coordinates=coords,
        eigvecs=H_k,
        var_explained=var_explained,
        k_truncated=truncated,
    )


def similarity_sqrt(G: np.ndarray, eig_tol: float | None = None) -> SimilaritySqrt:
    """Symmetric PSD square root of the positive part of G.

    Eigenvalues at or below ``eig_tol`` are zeroed, so for indefinite G
    the result squares to G with its negative part removed.
    """
    G = np.asarray(G, dtype=float)
    _check_symmetric(G, "similarity matrix")
    evals, evecs = _sorted_eigh(G)
    tol = _eig_tol(evals, eig_tol)
    positive = evals > tol
    rank = int(positive.sum())
    if rank == 0:
        raise NumericalError("similarity matrix has no positive eigenvalues")
    H = evecs[:, positive]
    S = (H * np.sqrt(evals[positive])) @ H.T
    return SimilaritySqrt(values=0.5 * (S + S.T), rank=rank)
