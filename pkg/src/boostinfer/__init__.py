"""Componentwise L2 boosting with post-selection inference.

Greedy least-squares boosting (plain, orthogonal, and post-OLS refit
variants) for high-dimensional variable selection, two downstream
estimators (instrument selection for 2SLS, double selection for
treatment effects), seeded data-generating processes, and a
deterministic Monte Carlo harness.
"""

from .boosting import (
    BoostingConfig,
    BoostingFit,
    DegenerateDesignError,
    DesignData,
    NoDescentDirection,
    StopRule,
    Variant,
    fit_boosting,
    post_ols,
    predict,
    standardize,
)
from .dgp import (
    DgpConfigIV,
    DgpConfigTE,
    IvSample,
    TeSample,
    calibrate_first_stage,
    gen_iv,
    gen_te,
    stream,
)
from .inference import (
    IVEstimate,
    TEEstimate,
    WeakFirstStageError,
    double_selection,
    iv_estimate,
    reject_null,
)
from .montecarlo import (
    ComparisonTable,
    McConfig,
    McSummary,
    compare_table,
    render_csv,
    render_json,
    render_text,
    run_mc,
)

__all__ = [
    "BoostingConfig",
    "BoostingFit",
    "ComparisonTable",
    "DegenerateDesignError",
    "DesignData",
    "DgpConfigIV",
    "DgpConfigTE",
    "IVEstimate",
    "IvSample",
    "McConfig",
    "McSummary",
    "NoDescentDirection",
    "StopRule",
    "TEEstimate",
    "TeSample",
    "Variant",
    "WeakFirstStageError",
    "calibrate_first_stage",
    "compare_table",
    "double_selection",
    "fit_boosting",
    "gen_iv",
    "gen_te",
    "iv_estimate",
    "post_ols",
    "predict",
    "reject_null",
    "render_csv",
    "render_json",
    "render_text",
    "run_mc",
    "standardize",
    "stream",
]

__version__ = "0.1.0"
