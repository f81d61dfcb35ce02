//! Black hole parameters and the scalar functions of the metric family.

use serde::{Deserialize, Serialize};

use crate::error::{KdsError, Result};

/// Default bound on `a / M` enforced at validation.
pub const DEFAULT_SPIN_CAP: f64 = 0.1;

/// Validated parameter triple `(Lambda, M, a)` in geometric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlackHoleParams {
    lambda: f64,
    mass: f64,
    spin: f64,
    spin_cap: f64,
}

impl BlackHoleParams {
    /// Validates and constructs the parameter triple with the default spin cap.
    pub fn new(lambda: f64, mass: f64, spin: f64) -> Result<Self> {
        Self::with_spin_cap(lambda, mass, spin, DEFAULT_SPIN_CAP)
    }

    /// Validates and constructs with an explicit spin cap.
    ///
    /// `mass = 0` is accepted as the pure de Sitter degenerate member; it is
    /// useful as a maximally symmetric cross-check even though no black hole
    /// is present.
    pub fn with_spin_cap(lambda: f64, mass: f64, spin: f64, spin_cap: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(KdsError::InvalidParams(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        if !mass.is_finite() || mass < 0.0 {
            return Err(KdsError::InvalidParams(format!(
                "mass must be nonnegative and finite, got {mass}"
            )));
        }
        if !spin.is_finite() || spin < 0.0 {
            return Err(KdsError::InvalidParams(format!(
                "spin must be nonnegative and finite, got {spin}"
            )));
        }
        let margin = 1.0 - 9.0 * lambda * mass * mass;
        if margin <= 0.0 {
            return Err(KdsError::SubextremalityViolated { margin });
        }
        let cap = spin_cap * mass;
        if spin > cap {
            return Err(KdsError::SpinTooLarge { spin, cap });
        }
        Ok(Self {
            lambda,
            mass,
            spin,
            spin_cap,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spin(&self) -> f64 {
        self.spin
    }

    pub fn spin_cap(&self) -> f64 {
        self.spin_cap
    }

    /// Subextremality margin `1 - 9*Lambda*M^2`.
    pub fn subextremality_margin(&self) -> f64 {
        1.0 - 9.0 * self.lambda * self.mass * self.mass
    }

    /// The same family with the spin set to zero.
    pub fn nonrotating(&self) -> Self {
        Self {
            spin: 0.0,
            ..*self
        }
    }

    /// `Delta(r) = (r^2 + a^2)(1 - Lambda r^2 / 3) - 2 M r`.
    pub fn delta(&self, r: f64) -> f64 {
        let a2 = self.spin * self.spin;
        (r * r + a2) * (1.0 - self.lambda * r * r / 3.0) - 2.0 * self.mass * r
    }

    /// `d Delta / dr`.
    pub fn delta_prime(&self, r: f64) -> f64 {
        let a2 = self.spin * self.spin;
        2.0 * r * (1.0 - self.lambda * r * r / 3.0)
            - (r * r + a2) * (2.0 * self.lambda * r / 3.0)
            - 2.0 * self.mass
    }

    /// `mu(r) = 1 - 2M/r - Lambda r^2 / 3`, the static Schwarzschild-de
    /// Sitter profile. Only meaningful for `r > 0`.
    pub fn mu(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mass / r - self.lambda * r * r / 3.0
    }

    pub fn mu_prime(&self, r: f64) -> f64 {
        2.0 * self.mass / (r * r) - 2.0 * self.lambda * r / 3.0
    }

    /// `lambda_b = Lambda a^2 / 3`.
    pub fn lambda_b(&self) -> f64 {
        self.lambda * self.spin * self.spin / 3.0
    }

    /// `rho^2 = r^2 + a^2 cos^2(theta)`.
    pub fn rho2(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        r * r + self.spin * self.spin * c * c
    }

    /// `kappa(theta) = 1 + lambda_b cos^2(theta)`.
    pub fn varkappa(&self, theta: f64) -> f64 {
        let c = theta.cos();
        1.0 + self.lambda_b() * c * c
    }
}

/// Validates `(lambda, mass, spin)` with the default spin cap.
pub fn validate_params(lambda: f64, mass: f64, spin: f64) -> Result<BlackHoleParams> {
    BlackHoleParams::new(lambda, mass, spin)
}
