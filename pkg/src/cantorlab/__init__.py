"""Cantor-set constructions, set statistics, and scale-invariant valuation tools."""

from .errors import (
    CantorLabError,
    DegenerateInput,
    DepthOverflow,
    DomainError,
    IncompatibleWords,
    InhomogeneousSystem,
    InvalidSystem,
    InversionOutOfRange,
    NonConvergent,
    NotInSet,
    UnsupportedSystem,
)
from .numerics import (
    BigScalar,
    FitResult,
    LimitEstimate,
    Rational,
    as_big,
    eval_limit,
    get_default_precision,
    linear_fit,
    log_base,
    set_default_precision,
)
from .construction import (
    Bridge,
    CantorSystem,
    ExplicitGapSchedule,
    FluctuatingFamily,
    Gap,
    LevelStats,
    Location,
    MiddleAlpha,
    MultiBranch,
    RefinementLevel,
    SequenceSpec,
    VariableFraction,
    example2_system,
    fluctuating_family,
    gap_lengths_at,
    level_profile,
    locate,
    middle_third_system,
    refine_to,
)
from .set_statistics import (
    HOMOGENEITY_SPREAD,
    assert_homogeneous,
    box_dimension_estimate,
    fatness_exponent,
    fatness_table,
    fattened_measure_excess,
    hausdorff_dimension_closed_form,
    lebesgue_measure_limit,
    level_table,
    thickness,
    thickness_is_infinite,
)
from .cantor_function import (
    PhiValue,
    phi,
    phi_increment_check,
    phi_middle_third_digits,
    staircase_table,
)
from .scale_free_de import (
    FlatnessRow,
    LcfReport,
    PlateauSegment,
    coverage_steps_to,
    hopping_coverage,
    hopping_identity,
    lcf_solution_check,
    product_minus,
    product_plus,
)
from .ultrametrics import (
    InfinitesimalContext,
    RhoEstimate,
    ValuationEstimate,
    WordRep,
    endpoint_exponent,
    growth_of_measure_demo,
    natural_ultrametric,
    relative_infinitesimal,
    renormalised_valuation,
    scale_norm_infimum,
    sequence_norm_limit,
    valuated_exponent_estimate,
    valuation,
    valuation_trace,
    valued_measure_estimate,
    valued_neighbours,
    valued_norm_triadic,
    word_encode,
)

__version__ = "0.1.0"
