"""Surrogate-quality diagnostics and ordination evaluation metrics.

The delta tolerance measures the relative Frobenius error of a linear
surrogate X B against target coordinates Z_k, and the explanation index
is the cosine between X B and Z_k in the trace inner product. Their
best achievable values are linked by delta_star^2 + ExI(B_star)^2 = 1,
with B_star the pseudoinverse solution.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DataError
from .ordination import PcoaResult

__all__ = [
    "DiagnosticsReport",
    "delta",
    "exi",
    "delta_star",
    "variance_explained",
    "surrogate_variance_explained",
    "silhouette_2d",
    "bm_acc",
    "rescale_loadings",
]


@dataclass(frozen=True)
class DiagnosticsReport:
    """Flat record of surrogate and clustering diagnostics.

    Clustering fields are None when no group labels were supplied.
    ``exi_star`` always satisfies exi_star^2 + delta_star^2 = 1.
    """

    delta_B: float
    exi_B: float
    delta_star: float
    exi_star: float
    var_explained_pc: tuple[float, ...]
    n_selected_taxa: int
    silhouette_2d: float | None = None
    bm_acc: float | None = None

    def to_dict(self):
        out = asdict(self)
        out["var_explained_pc"] = list(self.var_explained_pc)
        return out


def _frob(M):
    return float(np.linalg.norm(M))


def delta(B: np.ndarray, X: np.ndarray, Z_k: np.ndarray) -> float:
    """Relative reconstruction error ||Z_k - X B||_F / ||Z_k||_F."""
    norm_z = _frob(Z_k)
    if norm_z == 0.0:
        raise DataError("delta undefined: target coordinates are identically zero")
    return _frob(Z_k - X @ B) / norm_z


def exi(B: np.ndarray, X: np.ndarray, Z_k: np.ndarray) -> float:
    """Cosine tr{(XB)' Z_k} / (||XB||_F ||Z_k||_F), in [-1, 1]."""
    XB = X @ B
    norm_s = _frob(XB)
    norm_z = _frob(Z_k)
    if norm_s == 0.0 or norm_z == 0.0:
        raise DataError("explanation index undefined: zero-norm argument")
    return float(np.trace(XB.T @ Z_k) / (norm_s * norm_z))


def delta_star(X: np.ndarray, Z_k: np.ndarray, sv_cutoff: float = 1e-10):
    """Minimum achievable delta over all B, with one minimizer.

    The minimizer is the pseudoinverse solution B_star = X^+ Z_k, with
    singular values below ``sv_cutoff * sigma_max`` treated as zero.
    Returns ``(delta_star, B_star)`` with delta_star clipped to [0, 1].
    """
    norm_z = _frob(Z_k)
    if norm_z == 0.0:
        raise DataError("delta_star undefined: target coordinates are identically zero")
    U, svals, Vt = np.linalg.svd(X, full_matrices=False)
    keep = svals > sv_cutoff * svals[0] if svals[0] > 0 else np.zeros_like(svals, bool)
    inv = np.where(keep, np.divide(1.0, svals, where=keep, out=np.zeros_like(svals)), 0.0)
    B_star = (Vt.T * inv) @ (U.T @ Z_k)
    val = _frob(Z_k - X @ B_star) / norm_z
    return float(min(max(val, 0.0), 1.0)), B_star


def variance_explained(P: PcoaResult) -> np.ndarray:
    """Per-axis fraction of the positive-eigenvalue mass."""
    if P.positive_count < 1:
        raise DataError("no positive eigenvalues")
    lam = P.eigenvalues
    pos_mass = lam[: P.positive_count].sum()
    return lam[: P.k] / pos_mass


def surrogate_variance_explained(
    coords: np.ndarray, positive_mass: float, adjusted: bool = True
) -> np.ndarray:
    """Fraction of positive-eigenvalue mass carried by surrogate axes.

    With ``adjusted=True`` overlapping (non-orthogonal) axes are
    corrected by a QR decomposition so shared variation is counted
    once; otherwise plain squared column norms are used.
    """
    coords = np.asarray(coords, dtype=float)
    if positive_mass <= 0.0:
        raise DataError("positive eigenvalue mass must be positive")
    if adjusted:
        R = np.linalg.qr(coords, mode="r")
        contrib = np.diagonal(R) ** 2
    else:
        contrib = (coords**2).sum(axis=0)
    return contrib / positive_mass


def silhouette_2d(coords: np.ndarray, labels) -> float:
    """Mean silhouette width in the 2-D embedding.

    Per point: s = (b - a) / max(a, b) with a the mean distance to the
    point's own cluster and b the smallest mean distance to another
    cluster; points in singleton clusters score 0.
    """
    coords = np.asarray(coords, dtype=float)
    labels = np.asarray(labels)
    n = coords.shape[0]
    if n < 3:
        raise DataError(f"silhouette needs n >= 3 points, got {n}")
    uniq = np.unique(labels)
    if uniq.size < 2:
        raise DataError("silhouette needs at least two clusters")
    D = cdist(coords, coords)
    scores = np.zeros(n)
    masks = {c: labels == c for c in uniq}
    for i in range(n):
        own = masks[labels[i]].copy()
        own[i] = False
        if not own.any():
            continue  # singleton cluster
        a = D[i, own].mean()
        b = min(D[i, masks[c]].mean() for c in uniq if c != labels[i])
        scores[i] = (b - a) / max(a, b)
    return float(scores.mean())


def _kmeans_two(coords, rng, restarts, max_iter=300):
    """k-means with k = 2, k-means++ seeding, best inertia over restarts
    (ties keep the first encountered)."""
    n = coords.shape[0]
    best_labels, best_inertia = None, np.inf
    for _ in range(restarts):
        first = rng.integers(n)
        d2 = ((coords - coords[first]) ** 2).sum(axis=1)
        total = d2.sum()
        if total == 0.0:
            raise DataError("k-means degenerate: all coordinates identical")
        second = rng.choice(n, p=d2 / total)
        centers = coords[[first, second]].astype(float)
        labels = None
        for _ in range(max_iter):
            d = cdist(coords, centers, metric="sqeuclidean")
            new_labels = d.argmin(axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for j in (0, 1):
                members = labels == j
                if members.any():
                    centers[j] = coords[members].mean(axis=0)
                else:
                    centers[j] = coords[cdist(coords, centers[1 - j : 2 - j]).argmax()]
        inertia = float(((coords - centers[labels]) ** 2).sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best_labels = labels
    return best_labels


def bm_acc(true_labels, coords: np.ndarray, kmeans_restarts: int = 10, rng=None) -> float:
    """Best-matched accuracy of 2-means clustering against two groups.

    Runs k-means (k = 2) on the coordinates and returns the agreement
    fraction maximized over the two cluster-label permutations.
    """
    coords = np.asarray(coords, dtype=float)
    true_labels = np.asarray(true_labels)
    groups = np.unique(true_labels)
    if groups.size != 2:
        raise DataError(f"bm_acc requires exactly two groups, got {groups.size}")
    if rng is None:
        rng = np.random.default_rng(0)
    truth = (true_labels == groups[1]).astype(int)
    assigned = _kmeans_two(coords, rng, kmeans_restarts)
    agree = (assigned == truth).mean()
    return float(max(agree, 1.0 - agree))


def rescale_loadings(B_hat: np.ndarray) -> np.ndarray:
    """Affine rescale of a loading matrix onto [0, 1] for display."""
    B_hat = np.asarray(B_hat, dtype=float)
    lo, hi = B_hat.min(), B_hat.max()
    if hi == lo:
        raise DataError("cannot rescale a constant loading matrix")
    return (B_hat - lo) / (hi - lo)
