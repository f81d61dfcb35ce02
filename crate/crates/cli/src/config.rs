//! Strict JSON scenario configuration: unknown keys are rejected, every
//! default is materialized into the manifest so a run is reproducible from
//! its artifacts alone.

use serde::{Deserialize, Serialize};

use kds_core::error::{KdsError, Result};
use kds_core::evolution::RhsKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda: f64,
    pub mass: f64,
    #[serde(default)]
    pub spin: f64,
    #[serde(default = "default_spin_cap")]
    pub spin_cap: f64,
}

fn default_spin_cap() -> f64 {
    kds_core::params::DEFAULT_SPIN_CAP
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub n_r: usize,
    pub n_theta: usize,
    pub mode_m: i32,
    /// extension width as a fraction of the horizon gap
    pub epsilon_ext_fraction: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_theta: 32,
            mode_m: 0,
            epsilon_ext_fraction: kds_core::horizon::DEFAULT_EPSILON_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub cfl: f64,
    pub t_end: f64,
    pub dissipation: f64,
    pub output_stride: usize,
    pub rhs_kind: RhsKind,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self {
            cfl: 0.25,
            t_end: 1.0,
            dissipation: 0.1,
            output_stride: 16,
            rhs_kind: RhsKind::Scalar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    T,
    N,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialDataConfig {
    /// "gaussian" for scalar pulses, "pure_gauge" for tensor pairs.
    pub kind: String,
    /// pulse center as a fraction of the extended interval
    pub r_center_fraction: f64,
    /// pulse width as a fraction of the extended interval
    pub width_fraction: f64,
    /// odd values seed an extra cos(theta) moment (kills the zero mode)
    pub theta_moment: i32,
    pub amplitude: f64,
    /// apply the slice gauge projection to tensor data
    pub project: bool,
}

impl Default for InitialDataConfig {
    fn default() -> Self {
        Self {
            kind: "gaussian".to_string(),
            r_center_fraction: 0.5,
            width_fraction: 0.08,
            theta_moment: 0,
            amplitude: 1.0,
            project: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// energy CSV produced by an evolve run
    pub input_csv: String,
    /// column to fit (name from the CSV header)
    pub column: String,
    /// fit window as fractions of the run length
    pub window_fractions: (f64, f64),
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            input_csv: "energy.csv".to_string(),
            column: "e_t".to_string(),
            window_fractions: (0.5, 1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterpConfig {
    pub l: usize,
    pub n: usize,
    pub samples: usize,
}

impl Default for InterpConfig {
    fn default() -> Self {
        Self {
            l: 3,
            n: 6,
            samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub params: ParamsConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default = "default_multipliers")]
    pub multipliers: Vec<MultiplierKind>,
    #[serde(default = "default_norms")]
    pub norms: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_data: InitialDataConfig,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub interp: InterpConfig,
    /// three radial resolutions in ratio two, for `convergence`
    #[serde(default = "default_resolutions")]
    pub resolutions: [usize; 3],
}

fn default_multipliers() -> Vec<MultiplierKind> {
    vec![MultiplierKind::T, MultiplierKind::N]
}

fn default_norms() -> Vec<usize> {
    vec![1, 2]
}

fn default_resolutions() -> [usize; 3] {
    [65, 129, 257]
}

/// Parses and validates; schema errors name the offending key, range
/// errors name the constraint.
pub fn parse_config(path: &std::path::Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| KdsError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| KdsError::Config(format!("schema: {e}")))?;
    validate(&config)?;
    Ok(config)
}

pub fn validate(config: &ScenarioConfig) -> Result<()> {
    let e = &config.evolution;
    if !(e.cfl > 0.0 && e.cfl < 1.0) {
        return Err(KdsError::Config(format!(
            "evolution.cfl must lie in (0, 1), got {}",
            e.cfl
        )));
    }
    if e.dissipation < 0.0 {
        return Err(KdsError::Config(format!(
            "evolution.dissipation must be >= 0, got {}",
            e.dissipation
        )));
    }
    if e.t_end <= 0.0 {
        return Err(KdsError::Config(format!(
            "evolution.t_end must be positive, got {}",
            e.t_end
        )));
    }
    if e.output_stride == 0 {
        return Err(KdsError::Config("evolution.output_stride must be nonzero".into()));
    }
    let g = &config.grid;
    if !(g.epsilon_ext_fraction > 0.0 && g.epsilon_ext_fraction < 0.5) {
        return Err(KdsError::Config(format!(
            "grid.epsilon_ext_fraction must lie in (0, 0.5), got {}",
            g.epsilon_ext_fraction
        )));
    }
    if !(config.initial_data.width_fraction > 0.0 && config.initial_data.width_fraction < 1.0) {
        return Err(KdsError::Config(format!(
            "initial_data.width_fraction must lie in (0, 1), got {}",
            config.initial_data.width_fraction
        )));
    }
    if config.interp.n <= config.interp.l + 2 {
        return Err(KdsError::Config(format!(
            "interp.n must exceed interp.l + 2, got l = {}, n = {}",
            config.interp.l, config.interp.n
        )));
    }
    let [a, b, c] = config.resolutions;
    if !(b == 2 * a - 1 || b == 2 * a) || !(c == 2 * b - 1 || c == 2 * b) {
        return Err(KdsError::Config(format!(
            "resolutions must double (n or 2n-1 nesting), got {:?}",
            config.resolutions
        )));
    }
    Ok(())
}
