use thiserror::Error;

/// Errors produced by geometry construction, gauge operators, and evolution.
#[derive(Debug, Clone, Error)]
pub enum KdsError {
    #[error("parameters rejected: {0}")]
    InvalidParams(String),

    #[error("subextremality violated: 1 - 9*Lambda*M^2 = {margin:.6e} <= 0")]
    SubextremalityViolated { margin: f64 },

    #[error("spin {spin:.6e} exceeds cap {cap:.6e} (= spin_cap * M)")]
    SpinTooLarge { spin: f64, cap: f64 },

    #[error("root finding failed: {0}")]
    RootFindingFailed(String),

    #[error("point outside chart domain: {0}")]
    ChartDomainViolation(String),

    #[error("t*-slices lost spacelikeness: max G(dt*,dt*) = {max_g:.6e} >= 0")]
    SpacelikenessLost { max_g: f64 },

    #[error("multiplier lost timelikeness: max g(N,N) = {max_g:.6e} >= 0")]
    TimelikenessLost { max_g: f64 },

    #[error("finite-difference stencil leaves the domain: {0}")]
    StencilOutOfDomain(String),

    #[error("no stable step size for directional derivative (scale {scale:.6e})")]
    EpsilonUnderflow { scale: f64 },

    #[error("|g^(t*t*)| = {value:.6e} below threshold; chart is degenerate on the slice")]
    DegenerateLapse { value: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("tensor evolution unsupported on this background: {0}")]
    UnsupportedBackground(String),

    #[error("state became non-finite at t* = {t_star:.6e}")]
    NonFiniteState { t_star: f64 },

    #[error("metric lost Lorentzian signature at t* = {t_star:.6e}")]
    SignatureLost { t_star: f64 },

    #[error("energy series not strictly positive on the fit window")]
    NonPositiveEnergy,

    #[error("fit window holds {got} samples, need at least {need}")]
    WindowTooShort { got: usize, need: usize },

    #[error("regularity budget exceeded: requested {requested} derivatives, budget {budget}")]
    RegularityBudgetExceeded { requested: usize, budget: usize },

    #[error("io error: {0}")]
    Io(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, KdsError>;
