"""Pricing and verification engine for diffusion models with price bubbles."""

from bubblepde.core import (
    INCONCLUSIVE,
    STRICT_LOCAL_MARTINGALE,
    TRUE_MARTINGALE,
    Call,
    CappedCall,
    ClassifierEvidence,
    ClassifierVerdict,
    Constant,
    ConvergenceError,
    Identity,
    MarketSpec,
    NumericError,
    Payoff,
    PayoffFlags,
    PiecewiseLinear,
    Power,
    PowerLog,
    Put,
    SupersolutionParams,
    SupersolutionReport,
    Tabulated,
    VolModel,
    alpha_eval,
    classify_martingale,
    closed_form_density_x2,
    closed_form_gamma_x2,
    closed_form_price_x2,
    default_supersolution_params,
    normal_cdf,
    normal_pdf,
    payoff_eval,
    payoff_flags,
    supersolution_h,
    verify_supersolution,
)
from bubblepde.pde import (
    CRANK_NICOLSON,
    DIRICHLET_CAPPED_PAYOFF,
    IMPLICIT_EULER,
    NEUMANN_ZERO,
    SINH,
    UNIFORM,
    CapSchedule,
    ConvergenceReport,
    Grid1D,
    GridPolicy,
    PriceSurface,
    ResidualReport,
    SolveConfig,
    nonuniqueness_family,
    pde_residual,
    solve_capped,
    solve_minimal,
    surface_to_csv,
)
from bubblepde.mc import (
    EULER_ABSORBED,
    EXACT_RECIPROCAL_BESSEL3,
    MCEstimate,
    PathConfig,
    estimate_price,
    estimate_terminal_price,
    exact_sample_x2,
    martingale_defect,
    samples_to_csv,
    simulate_terminal,
    terminal_cdf_x2,
)
from bubblepde.american import (
    AmericanSurface,
    LCPConfig,
    capped_vol_american,
    exercise_mask_to_csv,
    solve_american,
    solve_bermudan,
    stopped_american,
)
from bubblepde.analysis import (
    CONCAVE,
    CONVEX,
    DECREASING_IN_VOL,
    INCREASING_IN_VOL,
    LINEAR,
    MIXED,
    AsymptoteReport,
    BoundReport,
    MajorantCurve,
    ShapeVerdict,
    VolComparison,
    asymptote_check_x2,
    concave_majorant,
    convexity_profile,
    parity_gap,
    sublinear_bound_check,
    vol_monotonicity,
)

__version__ = "0.1.0"
