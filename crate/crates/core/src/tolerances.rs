//! The versioned threshold table. Every acceptance check and every CLI
//! verification references these constants; nothing redefines its own.

use serde::{Deserialize, Serialize};

/// `max |g . g_inv - I|` over sampled extended-grid points.
pub const INVERSE_CONTRACT: f64 = 1e-12;
/// `|Delta(root)|` at the located horizon radii, relative to
/// `max(1, Lambda r^3)`.
pub const HORIZON_RESIDUAL: f64 = 1e-12;
/// Deformation tensor of the Killing fields, max entry.
pub const KILLING_DEFORMATION: f64 = 1e-10;
/// `|Upsilon(g_b, g_b)|` max component.
pub const CONSTRAINT_IDENTITY: f64 = 1e-12;
/// Metric compatibility `|del g|` from exact jets.
pub const COMPATIBILITY: f64 = 1e-11;
/// Einstein residual `max |Ric + Lambda g|` at n_r = 256 spacing.
pub const EINSTEIN_RESIDUAL_FINE: f64 = 1e-6;
/// Measured convergence order of the Einstein residual.
pub const EINSTEIN_ORDER_MIN: f64 = 3.5;
/// Kerr-star component bound across the horizons.
pub const REGULAR_COMPONENT_BOUND: f64 = 1e3;
/// `F` on the middle interval.
pub const PROFILE_MIDDLE_ZERO: f64 = 1e-14;
/// Divergence-identity residual at n_r = 128.
pub const DIVERGENCE_RESIDUAL: f64 = 1e-3;
/// Required residual shrink factor at n_r = 256 with dt halved.
pub const DIVERGENCE_SHRINK_MIN: f64 = 6.0;
/// Coercivity spread bound `C / c` for the redshift slice energy.
pub const COERCIVITY_SPREAD_MAX: f64 = 1e3;
/// Projection residual bound as a multiple of the stencil floor.
pub const PROJECTION_FLOOR_FACTOR: f64 = 10.0;
/// Window for the two-amplitude quadraticity ratio at factor ten.
pub const QUADRATICITY_WINDOW: (f64, f64) = (80.0, 120.0);
/// Window for the epsilon-halving shrink of the nonlinear remainder.
pub const NONLINEARITY_WINDOW: (f64, f64) = (3.5, 4.5);
/// Constraint-norm shrink under 2x refinement for the nonlinear run.
pub const CONSTRAINT_SHRINK_MIN: f64 = 8.0;
/// Relative stability of the fitted decay rate across resolutions.
pub const DECAY_RATE_STABILITY: f64 = 0.10;
/// Allowed relative difference between the slow-rotation and nonrotating
/// fitted rates.
pub const DECAY_RATE_SPIN_SHIFT: f64 = 0.20;
/// Interpolation inequality slack on the spectral toy.
pub const INTERPOLATION_SLACK: f64 = 1e-12;

/// The same table as data, embedded into every run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdTable {
    pub inverse_contract: f64,
    pub horizon_residual: f64,
    pub killing_deformation: f64,
    pub constraint_identity: f64,
    pub compatibility: f64,
    pub einstein_residual_fine: f64,
    pub einstein_order_min: f64,
    pub regular_component_bound: f64,
    pub profile_middle_zero: f64,
    pub divergence_residual: f64,
    pub divergence_shrink_min: f64,
    pub coercivity_spread_max: f64,
    pub projection_floor_factor: f64,
    pub quadraticity_window: (f64, f64),
    pub nonlinearity_window: (f64, f64),
    pub constraint_shrink_min: f64,
    pub decay_rate_stability: f64,
    pub decay_rate_spin_shift: f64,
    pub interpolation_slack: f64,
}

impl Default for ThresholdTable {
    fn default() -> Self {
        Self {
            inverse_contract: INVERSE_CONTRACT,
            horizon_residual: HORIZON_RESIDUAL,
            killing_deformation: KILLING_DEFORMATION,
            constraint_identity: CONSTRAINT_IDENTITY,
            compatibility: COMPATIBILITY,
            einstein_residual_fine: EINSTEIN_RESIDUAL_FINE,
            einstein_order_min: EINSTEIN_ORDER_MIN,
            regular_component_bound: REGULAR_COMPONENT_BOUND,
            profile_middle_zero: PROFILE_MIDDLE_ZERO,
            divergence_residual: DIVERGENCE_RESIDUAL,
            divergence_shrink_min: DIVERGENCE_SHRINK_MIN,
            coercivity_spread_max: COERCIVITY_SPREAD_MAX,
            projection_floor_factor: PROJECTION_FLOOR_FACTOR,
            quadraticity_window: QUADRATICITY_WINDOW,
            nonlinearity_window: NONLINEARITY_WINDOW,
            constraint_shrink_min: CONSTRAINT_SHRINK_MIN,
            decay_rate_stability: DECAY_RATE_STABILITY,
            decay_rate_spin_shift: DECAY_RATE_SPIN_SHIFT,
            interpolation_slack: INTERPOLATION_SLACK,
        }
    }
}
