"""Mutual-nearest-neighbor template matching and its statistical analysis.

The package converts image windows into point sets in a joint
location-appearance space, counts mutually-nearest pairs between a template
and each candidate window, and normalizes the count into a similarity score.
It ships a naive reference matcher, an exact cached sliding matcher, classic
baselines, Monte-Carlo/quadrature tools for the score's expected behaviour,
and an evaluation harness over annotated template/target pairs.
"""

from .baselines import (
    BaselineConfig,
    BaselineKind,
    bds_from_matrix,
    chi2_histogram_distance,
    color_histogram,
    score_bds,
    score_hm_chi2,
    score_ncc,
    score_sad,
    score_ssd,
)
from .bbs import (
    DistanceMatrix,
    bbs_score,
    best_buddies,
    count_best_buddies,
    distance_matrix,
    matrix_from_values,
    measure_table,
)
from .errors import ConfigError, DimensionError, FormatError
from .evaluation import (
    Box,
    EvalReport,
    PairAnnotation,
    PairResult,
    METHODS,
    evaluate_pairs,
    load_annotations,
    map_score,
    overlap,
    success_curve,
    write_report_csv,
    write_summary_json,
)
from .features import (
    FeatureGrid,
    load_feature_grid,
    load_image,
    normalize_per_window,
    rgb_to_hsv,
    save_feature_grid,
    save_image,
    save_pgm,
)
from .matcher import (
    Algorithm,
    CacheStats,
    LikelihoodMap,
    MatcherConfig,
    MatchResult,
    benchmark_naive_vs_cached,
    match_baseline,
    match_cached,
    match_naive,
    top_modes,
)
from .pointset import (
    Measure,
    MeasureKind,
    Point,
    PointSet,
    build_point_set,
    color_measure,
    inner_table,
    pointwise_distance,
    similarity_measure,
    sq_dist_table,
)
from .statsim import (
    Distribution1D,
    SimConfig,
    chi_square,
    empirical_ebbs,
    expected_sad,
    expected_ssd,
    fig_mixtures,
    gaussian,
    integral_ebbp,
    integral_ebbs,
    lemma1_analytic,
    lemma1_empirical,
    mixture,
    mutual_nn_fraction_1d,
    mutual_nn_fraction_nd,
    overlap_integral,
    theorem1_limit,
)

__version__ = "1.0.0"
