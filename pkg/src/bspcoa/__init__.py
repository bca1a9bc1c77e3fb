"""Bayesian sparse principal coordinates analysis.

Classical distance-based ordination plus a row-sparse linear surrogate
of the leading coordinates, fit with a TPBN (horseshoe) Gibbs sampler
alternated with Procrustes updates, with delta-tolerance diagnostics
and simulation machinery for evaluation.
"""

__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticsReport,
    bm_acc,
    delta,
    delta_star,
    exi,
    rescale_loadings,
    silhouette_2d,
    surrogate_variance_explained,
    variance_explained,
)
from .errors import BspcoaError, DataError, NumericalError
from .model import (
    BspcoaConfig,
    SurrogateFit,
    fit,
    procrustes_update,
    select_by_ci,
    subsample_fit_project,
)
from .ordination import (
    DISTANCE_FUNCTIONS,
    DistanceMatrix,
    FeatureMatrix,
    PcoaResult,
    SimilaritySqrt,
    bray_curtis_distance,
    double_center,
    euclidean_distance,
    hellinger_distance,
    pcoa,
    similarity_sqrt,
)
from .shrinkage import (
    GigParams,
    TpbnHyper,
    TpbnState,
    gibbs_sweep,
    sample_gig,
    update_B,
    update_psi,
    update_zeta,
)
from .simgen import (
    SCENARIOS,
    DirMultSpec,
    LatentFactorSpec,
    gen_dirmult,
    gen_latent_factor,
    run_study,
    summarize_study,
)
from .tables import (
    CountTable,
    parse_count_table,
    prevalence_filter,
    read_matrix_csv,
    to_relative_abundance,
    write_count_table,
)

__all__ = [
    "__version__",
    "BspcoaError",
    "DataError",
    "NumericalError",
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
    "TpbnHyper",
    "TpbnState",
    "GigParams",
    "sample_gig",
    "update_B",
    "update_psi",
    "update_zeta",
    "gibbs_sweep",
    "BspcoaConfig",
    "SurrogateFit",
    "fit",
    "select_by_ci",
    "procrustes_update",
    "subsample_fit_project",
    "DiagnosticsReport",
    "delta",
    "exi",
    "delta_star",
    "variance_explained",
    "surrogate_variance_explained",
    "silhouette_2d",
    "bm_acc",
    "rescale_loadings",
    "LatentFactorSpec",
    "DirMultSpec",
    "SCENARIOS",
    "gen_latent_factor",
    "gen_dirmult",
    "run_study",
    "summarize_study",
    "CountTable",
    "parse_count_table",
    "prevalence_filter",
    "to_relative_abundance",
    "write_count_table",
    "read_matrix_csv",
]
