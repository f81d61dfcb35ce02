//! Numerical laboratory for slowly-rotating Kerr-de Sitter black holes:
//! exact geometry in horizon-regular charts, harmonic-gauge operators,
//! finite-difference wave evolution on the extended exterior, multiplier
//! currents, and decay diagnostics.

pub mod analysis;
pub mod chart;
pub mod gauge;
pub mod evolution;
pub mod grid;
pub mod par;
pub mod slice;
pub mod tolerances;
pub mod currents;
pub mod curvature;
pub mod error;
pub mod horizon;
pub mod io;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod params;
pub mod vectorfield;

pub use chart::{chart_profile_build, chart_profile_default, ChartProfile};
pub use error::{KdsError, Result};
pub use horizon::{horizon_radii, horizon_radii_default, HorizonData};
pub use metric::{
    ergosphere_indicator, g_inv_dtdt, metric_bl, metric_kerr_star, Chart, MetricJet,
    SpacetimePoint,
};
pub use params::{validate_params, BlackHoleParams};
pub use vectorfield::{VectorLabel, Vectorfield};
