//! Numerics for the fractional Hardy–Sobolev bubble: radial grids and quadrature,
//! fractional transforms, the bubble solver, two-bubble interactions, the linearized
//! spectrum, multi-bubble stability, and the log cutoff / commutator harness.

pub mod bubble;
pub mod cutoff;
pub mod error;
mod fit;
pub mod grid;
pub mod interaction;
mod logshift;
pub mod params;
pub mod special;
pub mod spectrum;
pub mod stability;
pub mod transform;

pub use bubble::{
    bubble_derivative, dilate, mu_constant, normalization_exponent_check, order_law_ratio, profile_from_text,
    profile_to_text, solve_bubble, Bubble, ExponentCheck,
};
pub use cutoff::{
    ap_power_weight_check, commutator, cutoff_power, cutoff_weighted_norm, kpv_family, kpv_ratio, log_cutoff,
    CutoffSpec, KpvExponents,
};
pub use error::{Error, Result};
pub use grid::{
    default_grid, integrate_radial, integrate_radial_ball, integrate_radial_report, make_log_grid, weighted_lp_norm,
    IntegralReport, RadialFn, RadialGrid, DEFAULT_NODES, DEFAULT_R_MAX, DEFAULT_R_MIN,
};
pub use interaction::{
    hs_cross_inner, interaction_sweep, localized_interaction_check, qij, scaling_regression, two_bubble_integral,
    BubbleFamily, ScalingFit, ScalingModel,
};
pub use params::Params;
pub use spectrum::{
    linearized_eigs, random_bump, spectral_gap_check, spectral_gap_check_unprojected, GapCheck, SpectralReport,
};
pub use stability::{
    check_elementary_inequalities, default_bump, deficit, energy_window_check, inequality_a_ratio, inequality_b_ratio,
    project_multibubble, sharpness_family, stability_point, stability_sweep, summarize_sweep, sweep_scales,
    ElementaryConstants, EnergyWindow, ProjectOptions, StabilityReport, SweepRow, SweepSummary,
};
pub use transform::{
    dual_norm, frac_inverse, frac_power, hs_inner, inverse_radial_fourier, radial_fourier, sobolev_inner, FreqFn,
    TailCheck,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
