"""Design-based Lorenz and Gini estimation with pseudo-population bootstrap bands."""

from .bootstrap import (
    BandResult,
    CiMethod,
    DominanceResult,
    GiniCI,
    PseudoPopulation,
    ReplicateStats,
    band_from_replicates,
    band_to_csv,
    bootstrap_replicates,
    build_pseudo_population,
    ci_to_csv,
    confidence_band,
    dominance_test,
    dominance_to_csv,
    empirical_quantile,
    gini_ci,
    gini_ci_from_replicates,
    replicates_to_csv,
    resample_once,
)
from .designs import (
    DesignKind,
    DesignSpec,
    DrawnSample,
    compute_pips,
    design_for_population,
    draw,
    draw_pareto,
    draw_poisson,
    draw_rejective,
    draw_sampford,
    draw_srswor,
    empirical_inclusion,
    sample_from_csv,
    sample_to_csv,
    spec_from_json,
    spec_to_json,
)
from .errors import DegeneracyError, SamplingTimeoutError, ValidationError
from .estimators import (
    GiniEstimate,
    LorenzCurve,
    PiecewiseCurve,
    StepDF,
    curve_difference,
    gini,
    hajek_df,
    lorenz,
    quantile,
    sup_distance,
    weighted_step_df,
    write_curve_csv,
)
from .population import (
    FinitePopulation,
    ModelConfig,
    generate_population,
    population_lorenz,
    reference_lorenz,
)
from .simulate import (
    CoverageReport,
    CoverageTarget,
    ExperimentConfig,
    emit_report,
    run_coverage_experiment,
)

__all__ = [
    "BandResult",
    "CiMethod",
    "CoverageReport",
    "CoverageTarget",
    "DegeneracyError",
    "DesignKind",
    "DesignSpec",
    "DominanceResult",
    "DrawnSample",
    "ExperimentConfig",
    "FinitePopulation",
    "GiniCI",
    "GiniEstimate",
    "LorenzCurve",
    "ModelConfig",
    "PiecewiseCurve",
    "PseudoPopulation",
    "ReplicateStats",
    "SamplingTimeoutError",
    "StepDF",
    "ValidationError",
    "band_from_replicates",
    "band_to_csv",
    "bootstrap_replicates",
    "build_pseudo_population",
    "ci_to_csv",
    "compute_pips",
    "confidence_band",
    "curve_difference",
    "design_for_population",
    "dominance_test",
    "dominance_to_csv",
    "draw",
    "draw_pareto",
    "draw_poisson",
    "draw_rejective",
    "draw_sampford",
    "draw_srswor",
    "emit_report",
    "empirical_inclusion",
    "empirical_quantile",
    "generate_population",
    "gini",
    "gini_ci",
    "gini_ci_from_replicates",
    "hajek_df",
    "lorenz",
    "population_lorenz",
    "quantile",
    "reference_lorenz",
    "replicates_to_csv",
    "resample_once",
    "run_coverage_experiment",
    "sample_from_csv",
    "sample_to_csv",
    "spec_from_json",
    "spec_to_json",
    "sup_distance",
    "weighted_step_df",
    "write_curve_csv",
]
