//! Horizon radii as roots of `Delta`, with the extended-interval caps.

use serde::{Deserialize, Serialize};

use crate::error::{KdsError, Result};
use crate::params::BlackHoleParams;

/// Default extension width as a fraction of `r_cosmo - r_event`.
pub const DEFAULT_EPSILON_FRACTION: f64 = 0.05;

/// Horizon radii of a subextremal family together with the extension caps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HorizonData {
    pub r_negative: f64,
    pub r_event: f64,
    pub r_cosmo: f64,
    pub epsilon_ext: f64,
    pub r_inner_cap: f64,
    pub r_outer_cap: f64,
}

impl HorizonData {
    pub fn span(&self) -> f64 {
        self.r_cosmo - self.r_event
    }

    pub fn extended_span(&self) -> f64 {
        self.r_outer_cap - self.r_inner_cap
    }
}

/// Bisection to a fixed tolerance on a bracketing interval.
fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return mid;
        }
        if (fmid > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Newton polish starting from a bisection estimate; falls back to the seed
/// when the iteration leaves the bracket.
fn newton_polish(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, seed: f64, lo: f64, hi: f64) -> f64 {
    let mut x = seed;
    for _ in 0..40 {
        let fx = f(x);
        let dfx = df(x);
        if dfx == 0.0 {
            break;
        }
        let next = x - fx / dfx;
        if !next.is_finite() || next < lo || next > hi {
            break;
        }
        if (next - x).abs() <= 1e-16 * x.abs().max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    x
}

/// All real roots of `Delta` located by a coarse sign scan over
/// `(-r_max, r_max)` followed by bisection and Newton polish.
fn delta_roots(params: &BlackHoleParams, r_max: f64, n_scan: usize) -> Vec<f64> {
    let f = |r: f64| params.delta(r);
    let df = |r: f64| params.delta_prime(r);
    let mut roots = Vec::new();
    let step = 2.0 * r_max / n_scan as f64;
    let mut prev_r = -r_max;
    let mut prev_f = f(prev_r);
    for i in 1..=n_scan {
        let r = -r_max + i as f64 * step;
        let fr = f(r);
        if prev_f == 0.0 {
            roots.push(prev_r);
        } else if (prev_f > 0.0) != (fr > 0.0) {
            let seed = bisect(&f, prev_r, r, 1e-14 * r_max);
            roots.push(newton_polish(&f, &df, seed, prev_r, r));
        }
        prev_r = r;
        prev_f = fr;
    }
    roots
}

/// Locates the horizon radii and populates the extension caps.
///
/// For `a > 0` the positive roots of the quartic `Delta` are found directly;
/// for `a = 0` the factorization `Delta = r * (r - 2M - Lambda r^3 / 3)`
/// makes the same scan exact. The scan window `(0, 2 sqrt(3/Lambda))`
/// contains every real root.
pub fn horizon_radii(params: &BlackHoleParams, epsilon_ext: f64) -> Result<HorizonData> {
    if !(epsilon_ext > 0.0) {
        return Err(KdsError::InvalidParams(format!(
            "epsilon_ext must be positive, got {epsilon_ext}"
        )));
    }
    let r_max = 2.0 * (3.0 / params.lambda()).sqrt();

    if params.mass() == 0.0 {
        // Pure de Sitter: Delta = (r^2 + a^2)(1 - Lambda r^2 / 3) has the
        // cosmological root only; there is no event horizon to extend past.
        let rc = (3.0 / params.lambda()).sqrt();
        return Ok(HorizonData {
            r_negative: -rc,
            r_event: 0.0,
            r_cosmo: rc,
            epsilon_ext,
            r_inner_cap: 0.0,
            r_outer_cap: rc + epsilon_ext,
        });
    }

    let roots = delta_roots(params, r_max, 4096);
    let positive: Vec<f64> = roots.iter().copied().filter(|&r| r > 0.0).collect();
    let negative: Vec<f64> = roots.iter().copied().filter(|&r| r < 0.0).collect();
    if positive.len() < 2 || negative.is_empty() {
        return Err(KdsError::RootFindingFailed(format!(
            "expected 2 positive and 1 negative root of Delta, found {} / {}",
            positive.len(),
            negative.len()
        )));
    }

    // Two largest distinct positive roots.
    let r_cosmo = positive[positive.len() - 1];
    let r_event = positive[positive.len() - 2];
    let r_negative = negative[0];

    let scale = (1.0f64).max(params.lambda() * r_cosmo.powi(3));
    for &root in &[r_event, r_cosmo, r_negative] {
        let residual = params.delta(root).abs();
        if residual > 1e-10 * scale {
            return Err(KdsError::RootFindingFailed(format!(
                "|Delta({root})| = {residual:.3e} exceeds 1e-10 * {scale:.3e}"
            )));
        }
        if params.delta_prime(root) == 0.0 {
            return Err(KdsError::RootFindingFailed(format!(
                "root {root} is not simple"
            )));
        }
    }

    let data = HorizonData {
        r_negative,
        r_event,
        r_cosmo,
        epsilon_ext,
        r_inner_cap: r_event - epsilon_ext,
        r_outer_cap: r_cosmo + epsilon_ext,
    };
    if data.r_inner_cap <= 0.0 {
        return Err(KdsError::InvalidParams(format!(
            "epsilon_ext {epsilon_ext} reaches r <= 0 inside the event horizon"
        )));
    }

    // Delta must stay negative on both extension strips: the caps are then
    // spacelike and evolution needs no boundary conditions there.
    for k in 1..=32 {
        let t = k as f64 / 32.0;
        let r_lo = data.r_inner_cap * (1.0 - t) + data.r_event * t;
        let r_hi = data.r_cosmo * (1.0 - t) + data.r_outer_cap * t;
        if t < 1.0 && params.delta(r_lo) >= 0.0 {
            return Err(KdsError::InvalidParams(format!(
                "Delta changes sign inside the inner strip at r = {r_lo}"
            )));
        }
        if t > 0.0 && params.delta(r_hi) >= 0.0 {
            return Err(KdsError::InvalidParams(format!(
                "Delta changes sign inside the outer strip at r = {r_hi}"
            )));
        }
    }
    Ok(data)
}

/// Horizon data with the default extension fraction of the horizon gap.
pub fn horizon_radii_default(params: &BlackHoleParams) -> Result<HorizonData> {
    // Two passes: the gap is only known once the roots are.
    let probe = horizon_radii(params, 1e-3)?;
    horizon_radii(params, DEFAULT_EPSILON_FRACTION * probe.span())
}
