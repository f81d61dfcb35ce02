//! Method-of-lines evolution on the extended domain.
//!
//! First-order-in-time reduction: the state carries the field and its
//! `t*`-derivative; the metric's `g^{t*t*}` block is invertible because the
//! slices are uniformly spacelike, so the second time derivative is solved
//! for pointwise. Spatial derivatives use 4th-order stencils, one-sided at
//! the caps, where spacelikeness makes boundary conditions unnecessary.

pub mod background;
pub mod nonlinear;
pub mod oneform;
pub mod scalar;
pub mod stepper;
pub mod tensor;

use serde::{Deserialize, Serialize};

use crate::error::{KdsError, Result};
use crate::grid::FieldSet;

pub use nonlinear::NonlinearRhs;
pub use oneform::OneFormWaveRhs;
pub use scalar::{courant_dt, ScalarWaveRhs};
pub use stepper::{apply_dissipation, rk4_step};
pub use tensor::TensorWaveRhs;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub cfl: f64,
    pub t_end: f64,
    pub stencil_order: usize,
    pub dissipation_strength: f64,
    pub output_stride: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            cfl: 0.25,
            t_end: 1.0,
            stencil_order: 4,
            dissipation_strength: 0.1,
            output_stride: 8,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(KdsError::Config(format!(
                "cfl must lie in (0, 1), got {}",
                self.cfl
            )));
        }
        if self.dissipation_strength < 0.0 {
            return Err(KdsError::Config(format!(
                "dissipation_strength must be >= 0, got {}",
                self.dissipation_strength
            )));
        }
        if self.stencil_order != 4 {
            return Err(KdsError::Config(format!(
                "only stencil_order 4 is implemented, got {}",
                self.stencil_order
            )));
        }
        if self.t_end <= 0.0 || self.output_stride == 0 {
            return Err(KdsError::Config(
                "t_end must be positive and output_stride nonzero".into(),
            ));
        }
        Ok(())
    }
}

/// Field and its time derivative at one instant.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub u: FieldSet,
    pub v: FieldSet,
    pub t_star: f64,
}

impl StateVector {
    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.u.max_abs().max(self.v.max_abs())
    }

    pub fn axpy(&mut self, a: f64, du: &FieldSet, dv: &FieldSet) {
        self.u.axpy(a, du);
        self.v.axpy(a, dv);
    }
}

/// Right-hand side of a first-order-in-time system on the grid.
pub trait WaveRhs: Sync {
    /// Writes the time derivative of `(u, v)` into `(du, dv)`.
    fn eval(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()>;

    /// Largest stable step for unit Courant factor.
    fn unit_courant_dt(&self) -> f64;

    /// Per-step health check; the default accepts everything.
    fn check_state(&self, _state: &StateVector) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsKind {
    Scalar,
    Tensor,
    Nonlinear,
}

/// Full evolution record: snapshot stream plus the step size used. When a
/// step fails the error is recorded and the series up to that point is
/// retained.
#[derive(Debug)]
pub struct EvolutionResult {
    pub dt: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<StateVector>,
    pub steps_taken: usize,
    pub error: Option<KdsError>,
}

/// Advances the initial state to `t_end`, recording snapshots every
/// `output_stride` steps (plus the final state) and invoking `observer`
/// after every accepted step.
pub fn evolve(
    initial: &StateVector,
    config: &EvolutionConfig,
    rhs: &dyn WaveRhs,
    mut observer: impl FnMut(usize, &StateVector),
) -> Result<EvolutionResult> {
    config.validate()?;
    let dt_raw = config.cfl * rhs.unit_courant_dt();
    if !(dt_raw > 0.0 && dt_raw.is_finite()) {
        return Err(KdsError::Config(format!("invalid step size {dt_raw}")));
    }
    let n_steps = (config.t_end / dt_raw).ceil() as usize;
    let dt = config.t_end / n_steps as f64;

    let mut state = initial.clone();
    state.t_star = initial.t_star;
    let mut result = EvolutionResult {
        dt,
        times: vec![state.t_star],
        snapshots: vec![state.clone()],
        steps_taken: 0,
        error: None,
    };
    observer(0, &state);

    for step in 1..=n_steps {
        match rk4_step(&state, rhs, dt) {
            Ok(mut next) => {
                if config.dissipation_strength > 0.0 {
                    apply_dissipation(&mut next, config.dissipation_strength);
                }
                if !next.is_finite() {
                    result.error = Some(KdsError::NonFiniteState {
                        t_star: next.t_star,
                    });
                    break;
                }
                if let Err(e) = rhs.check_state(&next) {
                    result.error = Some(e);
                    break;
                }
                state = next;
            }
            Err(e) => {
                result.error = Some(e);
                break;
            }
        }
        result.steps_taken = step;
        observer(step, &state);
        if step % config.output_stride == 0 || step == n_steps {
            result.times.push(state.t_star);
            result.snapshots.push(state.clone());
        }
    }
    Ok(result)
}
