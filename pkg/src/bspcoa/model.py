"""Bayesian sparse PCoA: alternating Gibbs estimation of B and
Procrustes updates of the orthonormal factor A.

The fitted object approximates the leading principal coordinates Z_k by
a row-sparse linear surrogate X B, estimated by:

1. initialize A with the leading k eigenvectors of the double-centered
   similarity matrix;
2. per outer iteration, simulate a pseudo-response Y = S A + E with
   fresh Gaussian noise (S the PSD square root of the similarity
   matrix), run the TPBN Gibbs chain on the working regression
   Y = X B + E, and summarize B by credible-interval selection;
3. update A to the nearest orthonormal-column matrix of S X B via SVD;
4. repeat until the summarized B stabilizes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .diagnostics import delta, delta_star
from .errors import DataError, NumericalError
from .ordination import (
    DISTANCE_FUNCTIONS,
    DistanceMatrix,
    FeatureMatrix,
    double_center,
    pcoa,
    similarity_sqrt,
)
from .shrinkage import TpbnHyper, TpbnState, gibbs_sweep

__all__ = [
    "BspcoaConfig",
    "SurrogateFit",
    "select_by_ci",
    "procrustes_update",
    "fit",
    "subsample_fit_project",
]


@dataclass(frozen=True)
class BspcoaConfig:
    """Settings for one surrogate fit.

    ``hyper=None`` selects the horseshoe defaults u = a = 1/2 with
    tau = 1/(p n log n) resolved against the data at fit time.
    """

    k: int = 2
    hyper: TpbnHyper | None = None
    mcmc_iters: int = 2000
    burn_in: int = 500
    ci_level: float = 0.95
    max_outer: int = 20
    outer_tol: float = 1e-4
    seed: int = 0
    center_x: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise DataError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.burn_in < self.mcmc_iters:
            raise DataError(
                f"need 0 <= burn_in < mcmc_iters, got {self.burn_in} / {self.mcmc_iters}"
            )
        if not 0.0 < self.ci_level < 1.0:
            raise DataError(f"ci_level must lie in (0, 1), got {self.ci_level}")
        if self.max_outer < 1:
            raise DataError("max_outer must be >= 1")


@dataclass(frozen=True)
class SurrogateFit:
    """Result of a sparse-surrogate fit.

    ``B_hat`` is the post-selection point estimate (rows are exactly
    zero or per-entry posterior medians), ``A_hat`` the orthonormal
    factor, and ``x_offset`` the column offset subtracted from X before
    regression (zeros when centering is off) — new samples are embedded
    as ``(X_new - x_offset) @ B_hat``.
    """

    B_hat: np.ndarray
    A_hat: np.ndarray
    ci_lower: np.ndarray
    ci_upper: np.ndarray
    selected_rows: np.ndarray
    delta_res: float
    exi: float
    delta_star: float
    outer_iters_used: int
    trace: np.ndarray
    x_offset: np.ndarray
    converged: bool = field(default=False)

    @property
    def k(self):
        return self.B_hat.shape[1]

    @property
    def n_selected(self):
        return int(self.selected_rows.sum())


def select_by_ci(draws: np.ndarray, level: float):
    """Credible-interval selection of a sparse point estimate.

    Each entry is zeroed when its equal-tailed interval at ``level``
    contains 0, and set to the posterior median otherwise. A row is
    selected when any of its entries survives.

    Returns ``(B_hat, ci_lower, ci_upper, selected_rows)``.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 3:
        raise DataError(f"draws must have shape (T', p, k), got {draws.shape}")
    if draws.shape[0] < 100:
        raise DataError(f"need at least 100 retained draws, got {draws.shape[0]}")
    if not 0.0 < level < 1.0:
        raise DataError(f"level must lie in (0, 1), got {level}")
    half = (1.0 - level) / 2.0
    lo = np.quantile(draws, half, axis=0)
    hi = np.quantile(draws, 1.0 - half, axis=0)
    med = np.median(draws, axis=0)
    keep = (lo > 0.0) | (hi < 0.0)
    B_hat = np.where(keep, med, 0.0)
    return B_hat, lo, hi, keep.any(axis=1)


def procrustes_update(M: np.ndarray, prev: np.ndarray | None = None) -> np.ndarray:
    """Nearest matrix with orthonormal columns to M in Frobenius norm.

    Computes the thin SVD M = U D V' and returns U V'. When M is
    rank-deficient the null left-singular directions are replaced by a
    deterministic Gram-Schmidt completion seeded from the columns of
    ``prev`` (falling back to canonical basis vectors), and a warning
    is issued.
    """
    M = np.asarray(M, dtype=float)
    n, k = M.shape
    U, svals, Vt = np.linalg.svd(M, full_matrices=False)
    if svals[0] <= 0.0:
        rank = 0
    else:
        rank = int((svals > 1e-10 * svals[0]).sum())
    if rank == 0 and prev is None:
        raise DataError("Procrustes target is identically zero and no previous basis given")
    if rank < k:
        warnings.warn(
            f"Procrustes target has rank {rank} < k={k}; completing null directions",
            stacklevel=2,
        )
        U = _complete_basis(U, rank, prev)
    return U @ Vt


def _complete_basis(U, rank, prev):
    """Replace U[:, rank:] by orthonormal vectors built from candidate
    columns of ``prev`` (then canonical basis vectors) via Gram-Schmidt."""
    n, k = U.shape
    basis = [U[:, j] for j in range(rank)]
    candidates = []
    if prev is not None:
        candidates.extend(np.asarray(prev, dtype=float).T)
    candidates.extend(np.eye(n))
    U = U.copy()
    slot = rank
    for cand in candidates:
        if slot == k:
            break
        v = cand.astype(float).copy()
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            v /= norm
            basis.append(v)
            U[:, slot] = v
            slot += 1
    if slot < k:
        raise NumericalError("could not complete an orthonormal basis for Procrustes update")
    return U


def _resolve_hyper(cfg: BspcoaConfig, n: int, p: int) -> TpbnHyper:
    return cfg.hyper if cfg.hyper is not None else TpbnHyper.horseshoe(n=n, p=p)


def fit(X: FeatureMatrix, D: DistanceMatrix, cfg: BspcoaConfig) -> SurrogateFit:
    """Fit the sparse linear surrogate of the leading PCoA coordinates.

    Parameters
    ----------
    X : FeatureMatrix
        n x p feature matrix used for the surrogate regression.
    D : DistanceMatrix
        n x n dissimilarities among the same samples.
    cfg : BspcoaConfig
        Sampler and outer-loop settings.

    Returns
    -------
    SurrogateFit
        Selected coefficients, credible bounds, orthonormal factor and
        diagnostics against the classical coordinates.
    """
    n, p = X.values.shape
    if D.n_samples != n:
        raise DataError(f"X has {n} samples but D is {D.n_samples}x{D.n_samples}")
    hyper = _resolve_hyper(cfg, n, p)
    rng = np.random.default_rng(cfg.seed)

    pco = pcoa(D, cfg.k)
    k = pco.k
    Z_k = pco.coordinates
    G = double_center(D)
    S = similarity_sqrt(G).values

    if cfg.center_x:
        x_offset = X.values.mean(axis=0)
    else:
        x_offset = np.zeros(p)
    Xc = X.values - x_offset
    xtx = Xc.T @ Xc if p <= n else None

    A = pco.eigvecs
    state = TpbnState.initial(p, k)
    n_retained = cfg.mcmc_iters - cfg.burn_in
    draws = np.empty((n_retained, p, k))

    B_prev = None
    trace = []
    converged = False
    outer_used = 0
    lo = hi = None
    selected = None
    B_hat = np.zeros((p, k))

    for outer in range(1, cfg.max_outer + 1):
        outer_used = outer
        E = rng.standard_normal((n, k))
        Y = S @ A + E
        try:
            for it in range(cfg.mcmc_iters):
                state = gibbs_sweep(state, Y, Xc, hyper, rng, xtx=xtx)
                if it >= cfg.burn_in:
                    draws[it - cfg.burn_in] = state.B
        except NumericalError as exc:
            raise NumericalError(f"Gibbs sampling failed in outer iteration {outer}: {exc}") from exc
        B_hat, lo, hi, selected = select_by_ci(draws, cfg.ci_level)
        A = procrustes_update(S @ (Xc @ B_hat), prev=A)
        trace.append(delta(B_hat, Xc, Z_k))
        if B_prev is not None:
            change = np.linalg.norm(B_hat - B_prev) / max(1.0, np.linalg.norm(B_prev))
            if change < cfg.outer_tol:
                converged = True
                B_prev = B_hat
                break
        B_prev = B_hat

    surrogate = Xc @ B_hat
    exi_val = float("nan")
    norm_s = np.linalg.norm(surrogate)
    norm_z = np.linalg.norm(Z_k)
    if norm_s > 0.0 and norm_z > 0.0:
        exi_val = float(np.trace(surrogate.T @ Z_k) / (norm_s * norm_z))
    dstar, _ = delta_star(Xc, Z_k)

    return SurrogateFit(
        B_hat=B_hat,
        A_hat=A,
        ci_lower=lo,
        ci_upper=hi,
        selected_rows=selected,
        delta_res=float(trace[-1]),
        exi=exi_val,
        delta_star=dstar,
        outer_iters_used=outer_used,
        trace=np.asarray(trace),
        x_offset=x_offset,
        converged=converged,
    )


def subsample_fit_project(
    X_full: FeatureMatrix,
    cfg: BspcoaConfig,
    m: int,
    distance: str,
    subsample_rng,
):
    """Fit on a uniform subsample and embed all samples by projection.

    Draws m row indices without replacement (kept in sorted order, so
    m = n reproduces the full-data fit exactly), computes the requested
    distance on the subsample, fits the surrogate there, and returns
    ``(fit_result, full_coords)`` where ``full_coords = (X - offset) @ B_hat``
    for every row of ``X_full``.
    """
    n = X_full.n_samples
    if not 2 <= m <= n:
        raise DataError(f"subsample size must satisfy 2 <= m <= n={n}, got {m}")
    if m < cfg.k + 1:
        raise DataError(f"subsample size m={m} must exceed k={cfg.k}")
    if distance not in DISTANCE_FUNCTIONS:
        raise DataError(
            f"unknown distance {distance!r}; expected one of {sorted(DISTANCE_FUNCTIONS)}"
        )
    idx = np.sort(subsample_rng.choice(n, size=m, replace=False))
    X_sub = FeatureMatrix(
        X_full.values[idx],
        tuple(X_full.row_ids[i] for i in idx),
        X_full.col_ids,
    )
    D_sub = DISTANCE_FUNCTIONS[distance](X_sub)
    result = fit(X_sub, D_sub, cfg)
    full_coords = (X_full.values - result.x_offset) @ result.B_hat
    return result, full_coords
