"""Reference-contingent complexity: certified lower bounds on quantum
circuit complexity from exact states or finite measurement data."""

from .bounds import (
    BoundBreakdown,
    BoundConstants,
    bound_from_divergence,
    lambert_w0,
    main_lower_bound,
    rcc,
    smoothed_lower_bound,
    solve_bootstrap,
    structon_convert,
)
from .entropy import (
    EntropyValue,
    PurityCeiling,
    bernoulli_kl,
    binary_entropy,
    explicit_test_divergence_bound,
    hypothesis_testing_divergence,
    leakage_adjusted_divergence,
    max_relative_to_reference,
    min_entropy,
    purity_upper_bound,
    relative_to_reference,
    shannon,
    spectral_skew,
    von_neumann,
)
from .errors import (
    CompleteLeakageError,
    ConfigError,
    ExclusiveSectorsError,
    LeakageError,
    NumericalError,
    ProtocolInvalidError,
    RccError,
    ValidationError,
)
from .harness import (
    RunConfig,
    born_sample,
    coverage_experiment,
    pipeline,
    protocol_ground_truth,
    simulate_record,
    stream,
    sweep_windows,
)
from .operators import (
    BlockPartition,
    DensityOperator,
    HermitianOperator,
    Projector,
    SpectralDecomposition,
    eig_hermitian,
    pinch,
    project_renormalize,
    trace_distance,
    validate_density,
)
from .reference import (
    ReferenceSet,
    SmoothedReference,
    block_reference,
    build_reference,
    misspecification_gap,
    sector_reference,
    smooth_reference,
    stabilizer_reference,
)
from .stats import (
    CertifiedBound,
    CombinedBound,
    MeasurementRecord,
    bonferroni,
    clopper_pearson_lower,
    clopper_pearson_upper,
    combine_bounds,
    dephase_protocol,
    ht_protocol,
    ht_sample_plan,
    witness_protocol,
    witness_sample_plan,
)
from .windows import (
    ObservationWindow,
    ProcessTrace,
    RectEfficiency,
    RectPerformance,
    TimeBound,
    WindowFamily,
    conditional_expectation,
    info_work,
    process_time_bound,
    rect_efficiency,
    rect_identity_check,
    rect_performance_check,
    window_leakage_error,
    windowed_pinching_bound,
    windowed_rcc,
    work_complexity_potential,
)

__version__ = "0.1.0"
