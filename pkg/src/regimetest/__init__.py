"""Squeeze-duration tests for GBM and binary regime-switching GBM price models."""
from .errors import (
    DegenerateStatisticError,
    InadmissibleSummaryError,
    InferenceError,
    InputError,
    InsufficientDurationsError,
    RedrawBudgetExhausted,
    RegimeTestError,
    SeriesFormatError,
    StepSizeError,
    ZeroVarianceError,
)
from .models import (
    GbmParams,
    MmgbmParams,
    SeriesSummary,
    SmgbmParams,
    gamma_hazard,
    gbm_admissible,
    mmgbm_admissible,
    smgbm_admissible,
    validate_step,
)
from .series_stats import (
    PricePath,
    ReturnSeries,
    SqueezeDurations,
    StatVector,
    VolTracks,
    ecdf_eval,
    percentile,
    simple_returns,
    squeeze_durations,
    squeeze_runs,
    squeeze_statistic,
    stat_vector,
    summarize,
    vol_tracks,
)
from .simulate import (
    SimRequest,
    SimResult,
    derive_seed,
    simulate,
    simulate_gbm,
    simulate_mmgbm,
    simulate_smgbm,
    sojourns,
)
from .inference import (
    Ensemble,
    TestConfig,
    TestReport,
    ThetaGrid,
    alpha_theta,
    build_ensemble,
    composite_test,
    g_fn,
    objective_grid,
)

__version__ = "0.1.0"
