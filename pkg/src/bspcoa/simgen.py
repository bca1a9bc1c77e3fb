"""Reproducible data generators for the two simulation studies.

The Euclidean benchmark draws each sample from a two-factor model:
the first block of columns shares a latent N(0, var_v1) value, the
second block shares an independent N(0, var_v2) value, and remaining
columns are pure N(0, 1) noise.

The microbiome benchmark draws two groups of samples from a
Dirichlet-multinomial: library sizes are Poisson, per-sample
compositions are Dirichlet with group-specific concentrations

    alpha_A = (6,6,6,6,6, 2,2,2,2,2, alpha, ..., alpha)
    alpha_B = (2,2,2,2,2, 6,6,6,6,6, alpha, ..., alpha)

and counts are multinomial given both. An optional per-sample
log-normal jitter on the background concentrations adds heterogeneity
without moving the group signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import bm_acc, silhouette_2d, surrogate_variance_explained, variance_explained
from .errors import DataError
from .model import BspcoaConfig, fit
from .ordination import FeatureMatrix, bray_curtis_distance, pcoa
from .tables import CountTable

__all__ = [
    "LatentFactorSpec",
    "DirMultSpec",
    "SCENARIOS",
    "gen_latent_factor",
    "gen_dirmult",
    "run_study",
    "summarize_study",
    "STUDY_COLUMNS",
]


@dataclass(frozen=True)
class LatentFactorSpec:
    """Two-factor Euclidean benchmark layout."""

    n: int
    p: int
    p1: int
    p2: int
    var_v1: float = 10.0
    var_v2: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.p1 < self.p2 <= self.p:
            raise DataError(f"need 1 <= p1 < p2 <= p, got p1={self.p1}, p2={self.p2}, p={self.p}")
        if self.n < 2:
            raise DataError("need n >= 2")
        if self.var_v1 < 0 or self.var_v2 < 0:
            raise DataError("factor variances must be nonnegative")


@dataclass(frozen=True)
class DirMultSpec:
    """Two-group Dirichlet-multinomial microbiome benchmark."""

    n_a: int = 50
    n_b: int = 50
    p: int = 100
    alpha_bg: float = 0.5
    lib_mean: float = 8000.0
    perturb_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.p < 10:
            raise DataError(f"need p >= 10 taxa (10 differential + background), got {self.p}")
        if self.n_a < 1 or self.n_b < 1:
            raise DataError("both groups need at least one sample")
        if self.alpha_bg <= 0:
            raise DataError("background concentration must be positive")
        if self.perturb_sd < 0:
            raise DataError("perturbation sd must be nonnegative")

    def group_alphas(self):
        alpha_a = np.full(self.p, self.alpha_bg)
        alpha_a[:5] = 6.0
        alpha_a[5:10] = 2.0
        alpha_b = np.full(self.p, self.alpha_bg)
        alpha_b[:5] = 2.0
        alpha_b[5:10] = 6.0
        return alpha_a, alpha_b


def gen_latent_factor(spec: LatentFactorSpec, rng=None) -> FeatureMatrix:
    """Generate one n x p draw from the two-factor model."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    v1 = rng.normal(0.0, math.sqrt(spec.var_v1), size=spec.n)
    v2 = rng.normal(0.0, math.sqrt(spec.var_v2), size=spec.n)
    X = rng.standard_normal((spec.n, spec.p))
    X[:, : spec.p1] += v1[:, None]
    X[:, spec.p1 : spec.p2] += v2[:, None]
    return FeatureMatrix.from_array(
        X,
        col_ids=tuple(f"X{j + 1}" for j in range(spec.p)),
    )


def gen_dirmult(spec: DirMultSpec, rng=None):
    """Generate a two-group count table.

    Returns ``(CountTable, labels)`` with labels "A"/"B" in generation
    order. Compositions are built from normalized Gamma draws; when
    ``perturb_sd > 0`` the background concentrations are multiplied per
    sample by exp(N(0, perturb_sd^2)) before the Dirichlet draw.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    alpha_a, alpha_b = spec.group_alphas()
    bg = np.zeros(spec.p, dtype=bool)
    bg[10:] = True
    rows = []
    labels = []
    for label, n_grp, alpha in (("A", spec.n_a, alpha_a), ("B", spec.n_b, alpha_b)):
        for _ in range(n_grp):
            lib = rng.poisson(spec.lib_mean)
            conc = alpha.copy()
            if spec.perturb_sd > 0.0:
                conc[bg] *= np.exp(rng.normal(0.0, spec.perturb_sd, size=int(bg.sum())))
            gamma = rng.gamma(conc, 1.0)
            total = gamma.sum()
            if total <= 0.0:
                raise DataError("degenerate Dirichlet draw: zero total mass")
            rows.append(rng.multinomial(lib, gamma / total))
            labels.append(label)
    table = CountTable(
        values=np.asarray(rows, dtype=float),
        row_ids=tuple(f"s{i + 1}" for i in range(len(rows))),
        col_ids=tuple(f"otu{j + 1}" for j in range(spec.p)),
    )
    return table, np.asarray(labels)


SCENARIOS = {
    "baseline": DirMultSpec(alpha_bg=0.5, perturb_sd=0.0),
    "sparse": DirMultSpec(alpha_bg=0.1, perturb_sd=0.0),
    "perturbed": DirMultSpec(alpha_bg=0.5, perturb_sd=0.3),
}

STUDY_COLUMNS = ("Method", "var.PC1", "var.PC2", "Silhouette_2D", "delta_res", "BM-ACC", "ExI")


def _replicate_seed(seed, rep, stream):
    return int(np.random.SeedSequence([seed, rep, stream]).generate_state(1)[0])


def run_study(scenario: str, replicates: int, cfg: BspcoaConfig, seed: int = 0, spec: DirMultSpec | None = None):
    """Run the two-method comparison for one scenario.

    For each replicate: generate Dirichlet-multinomial data, run
    Bray-Curtis PCoA (k = 2) and the sparse surrogate fit, and record
    variance fractions, silhouette, residual delta, best-matched
    accuracy and the explanation index for both methods.

    Returns a list of row dicts keyed by ``STUDY_COLUMNS`` plus
    ``replicate``; replicate streams are derived from (seed, index) so
    results do not depend on execution order.
    """
    if scenario not in SCENARIOS:
        raise DataError(f"unknown scenario {scenario!r}; expected one of {sorted(SCENARIOS)}")
    if replicates < 1:
        raise DataError("replicates must be >= 1")
    base_spec = SCENARIOS[scenario] if spec is None else spec
    rows = []
    for rep in range(replicates):
        data_rng = np.random.default_rng([seed, rep, 0])
        table, labels = gen_dirmult(base_spec, data_rng)
        X = table.to_feature_matrix()
        D = bray_curtis_distance(X)
        pco = pcoa(D, 2)
        pos_mass = pco.eigenvalues[: pco.positive_count].sum()
        vfrac = variance_explained(pco)

        pcoa_coords = pco.coordinates[:, :2]
        rows.append(
            {
                "replicate": rep,
                "Method": "PCoA",
                "var.PC1": 100.0 * vfrac[0],
                "var.PC2": 100.0 * vfrac[1] if vfrac.size > 1 else float("nan"),
                "Silhouette_2D": silhouette_2d(pcoa_coords, labels),
                "delta_res": None,
                "BM-ACC": bm_acc(labels, pcoa_coords, rng=np.random.default_rng([seed, rep, 2])),
                "ExI": None,
            }
        )

        rep_cfg = replace(cfg, seed=_replicate_seed(seed, rep, 1))
        result = fit(X, D, rep_cfg)
        coords = (X.values - result.x_offset) @ result.B_hat
        svar = surrogate_variance_explained(coords[:, :2], pos_mass, adjusted=False)
        rows.append(
            {
                "replicate": rep,
                "Method": "BSPCoA",
                "var.PC1": 100.0 * svar[0],
                "var.PC2": 100.0 * svar[1] if svar.size > 1 else float("nan"),
                "Silhouette_2D": silhouette_2d(coords[:, :2], labels),
                "delta_res": result.delta_res,
                "BM-ACC": bm_acc(labels, coords[:, :2], rng=np.random.default_rng([seed, rep, 3])),
                "ExI": result.exi,
            }
        )
    return rows


def summarize_study(rows):
    """Means and standard deviations per method over the metric columns.

    Returns ``{method: {"mean": {...}, "sd": {...}}}`` skipping the
    not-applicable entries (PCoA has no delta_res / ExI).
    """
    metrics = [c for c in STUDY_COLUMNS if c != "Method"]
    out = {}
    for method in ("PCoA", "BSPCoA"):
        vals = {m: [r[m] for r in rows if r["Method"] == method and r[m] is not None] for m in metrics}
        out[method] = {
            "mean": {m: float(np.mean(v)) if v else None for m, v in vals.items()},
            "sd": {m: float(np.std(v, ddof=1)) if len(v) > 1 else (0.0 if v else None) for m, v in vals.items()},
        }
    return out
