//! The Kerr-star chart profile: transition function, spacelikeness
//! compensator, and the regular combinations entering the metric.
//!
//! The profile derivative is
//!
//! ```text
//! F'(r)   = s(r) (1 + lambda_b)(r^2 + a^2) / Delta(r) + c(r),
//! Phi'(r) = s(r) a (1 + lambda_b) / Delta(r),
//! ```
//!
//! with `s = -1` at and below the event horizon, `s = 0` on the middle
//! interval, `s = +1` at and beyond the cosmological horizon, and
//! `c = -s w` a compensator bump keeping the `t*`-slices spacelike where
//! `|s| = 1`. Metric components never evaluate `F'` itself: every place it
//! appears, the `1/Delta` poles cancel against `Delta` prefactors, and the
//! surviving combination `(1 - s^2)/Delta` vanishes identically on the
//! plateaus that cover both horizons.

use serde::{Deserialize, Serialize};

use crate::error::{KdsError, Result};
use crate::horizon::HorizonData;
use crate::jet::Jet2;
use crate::params::BlackHoleParams;

/// Fraction of the horizon gap covered by the default middle interval.
pub const DEFAULT_MIDDLE_FRACTION: f64 = 0.2;

/// Order-11 polynomial smoothstep: C^5 at both ends. Anything less smooth
/// leaves junction bands where 4th-order stencils drop to local third
/// order, which is measurable in every operator built on the chart.
fn smoothstep11(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let x2 = x * x;
    let x3 = x2 * x;
    let x6 = x3 * x3;
    let v = x6
        * (462.0 - 1980.0 * x + 3465.0 * x2 - 3080.0 * x3 + 1386.0 * x2 * x2 - 252.0 * x2 * x3);
    let omx = 1.0 - x;
    let omx2 = omx * omx;
    let d = 2772.0 * x2 * x3 * omx2 * omx2 * omx;
    (v, d)
}

/// Radial breakpoints of the piecewise construction, ordered
/// `inner cap <= t1a < w1a < w1b < m1 < m2 < w2a < w2b < t2b <= outer cap`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProfileBreakpoints {
    pub t1a: f64,
    pub w1a: f64,
    pub w1b: f64,
    pub m1: f64,
    pub m2: f64,
    pub w2a: f64,
    pub w2b: f64,
    pub t2b: f64,
}

/// The chart profile together with the verified spacelikeness margin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartProfile {
    pub params: BlackHoleParams,
    pub horizons: HorizonData,
    pub breaks: ProfileBreakpoints,
    /// Verified bound `G(dt*, dt*) <= -c0 < 0` over the extended grid.
    pub spacelike_margin: f64,
}

impl ChartProfile {
    /// Middle interval of the profile, where both `F` and `Phi` vanish.
    pub fn middle_interval(&self) -> (f64, f64) {
        (self.breaks.m1, self.breaks.m2)
    }

    /// Transition function `s` with derivative.
    pub fn s(&self, r: f64) -> (f64, f64) {
        let b = &self.breaks;
        if r <= b.t1a {
            (-1.0, 0.0)
        } else if r < b.m1 {
            let u = (r - b.t1a) / (b.m1 - b.t1a);
            let (v, d) = smoothstep11(u);
            (-1.0 + v, d / (b.m1 - b.t1a))
        } else if r <= b.m2 {
            (0.0, 0.0)
        } else if r < b.t2b {
            let u = (r - b.m2) / (b.t2b - b.m2);
            let (v, d) = smoothstep11(u);
            (v, d / (b.t2b - b.m2))
        } else {
            (1.0, 0.0)
        }
    }

    /// Compensator bump `w` with derivative: 1 on the horizon-side plateaus,
    /// 0 around the middle, transitions strictly inside `|s| < 1`.
    pub fn w(&self, r: f64) -> (f64, f64) {
        let b = &self.breaks;
        if r <= b.w1a {
            (1.0, 0.0)
        } else if r < b.w1b {
            let u = (r - b.w1a) / (b.w1b - b.w1a);
            let (v, d) = smoothstep11(u);
            (1.0 - v, -d / (b.w1b - b.w1a))
        } else if r <= b.w2a {
            (0.0, 0.0)
        } else if r < b.w2b {
            let u = (r - b.w2a) / (b.w2b - b.w2a);
            let (v, d) = smoothstep11(u);
            (v, d / (b.w2b - b.w2a))
        } else {
            (1.0, 0.0)
        }
    }

    /// Compensator `c = -s w` with derivative.
    pub fn c(&self, r: f64) -> (f64, f64) {
        let (s, ds) = self.s(r);
        let (w, dw) = self.w(r);
        (-s * w, -ds * w - s * dw)
    }

    /// True when `|s| = 1` identically near `r` (the horizon plateaus).
    pub fn on_plateau(&self, r: f64) -> bool {
        r <= self.breaks.t1a || r >= self.breaks.t2b
    }

    /// The regular combination `(1 - s^2)/Delta` with derivative. On the
    /// plateaus it is identically zero; elsewhere `Delta != 0`.
    pub fn q_reg(&self, r: f64) -> (f64, f64) {
        if self.on_plateau(r) {
            return (0.0, 0.0);
        }
        let (s, ds) = self.s(r);
        let delta = self.params.delta(r);
        let ddelta = self.params.delta_prime(r);
        let num = 1.0 - s * s;
        let dnum = -2.0 * s * ds;
        let v = num / delta;
        (v, (dnum - v * ddelta) / delta)
    }

    pub fn s_jet(&self, r: f64) -> Jet2 {
        let (v, d) = self.s(r);
        Jet2::of_r(v, d)
    }

    pub fn c_jet(&self, r: f64) -> Jet2 {
        let (v, d) = self.c(r);
        Jet2::of_r(v, d)
    }

    pub fn q_reg_jet(&self, r: f64) -> Jet2 {
        let (v, d) = self.q_reg(r);
        Jet2::of_r(v, d)
    }

    /// `F'(r)`; diverges at the horizons, finite elsewhere.
    pub fn f_prime(&self, r: f64) -> f64 {
        let p = &self.params;
        let (s, _) = self.s(r);
        let (c, _) = self.c(r);
        let a2 = p.spin() * p.spin();
        s * (1.0 + p.lambda_b()) * (r * r + a2) / p.delta(r) + c
    }

    /// `Phi'(r)`; diverges at the horizons, finite elsewhere.
    pub fn phi_prime(&self, r: f64) -> f64 {
        let p = &self.params;
        let (s, _) = self.s(r);
        s * p.spin() * (1.0 + p.lambda_b()) / p.delta(r)
    }

    /// `F(r)` by adaptive quadrature from the middle interval, where it is
    /// normalized to zero. Only defined strictly between the horizons; the
    /// chart itself never needs this value.
    pub fn f_value(&self, r: f64) -> Result<f64> {
        self.quadrature(r, &|x| self.f_prime(x))
    }

    /// `Phi(r)` by the same quadrature; identically zero for `a = 0`.
    pub fn phi_value(&self, r: f64) -> Result<f64> {
        if self.params.spin() == 0.0 {
            return Ok(0.0);
        }
        self.quadrature(r, &|x| self.phi_prime(x))
    }

    fn quadrature(&self, r: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        if r <= self.horizons.r_event || r >= self.horizons.r_cosmo {
            return Err(KdsError::ChartDomainViolation(format!(
                "F is finite only strictly between the horizons, got r = {r}"
            )));
        }
        let (m1, m2) = self.middle_interval();
        let from = if r < m1 {
            m1
        } else if r > m2 {
            m2
        } else {
            return Ok(0.0);
        };
        Ok(adaptive_simpson(f, from, r, 1e-12, 48))
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(a, b, fa, fm, fb);
    rec(f, a, b, fa, fm, fb, whole, tol, depth)
}

/// Default middle interval: the central fifth of the horizon gap centered on
/// `3M`, clamped so the transition zones keep room on both sides.
pub fn default_middle_interval(horizons: &HorizonData, mass: f64) -> (f64, f64) {
    let span = horizons.span();
    let half = 0.5 * DEFAULT_MIDDLE_FRACTION * span;
    let lo = horizons.r_event + 0.2 * span + half;
    let hi = horizons.r_cosmo - 0.2 * span - half;
    let center = (3.0 * mass).clamp(lo, hi);
    (center - half, center + half)
}

/// Builds the chart profile and verifies uniform spacelikeness of the
/// `t*`-slices over the extended grid.
pub fn chart_profile_build(
    params: &BlackHoleParams,
    horizons: &HorizonData,
    middle_interval: (f64, f64),
) -> Result<ChartProfile> {
    let (m1, m2) = middle_interval;
    if !(horizons.r_event < m1 && m1 < m2 && m2 < horizons.r_cosmo) {
        return Err(KdsError::InvalidParams(format!(
            "middle interval ({m1}, {m2}) must lie strictly inside the horizon gap"
        )));
    }
    // Transitions take nearly the whole room between horizon and middle
    // interval: a C^5 transition of length L carries fifth derivatives of
    // size 1/L^5, and the stencil error on everything built from the chart
    // scales like (spacing/L)^4.
    let t1a = horizons.r_event + 0.12 * (m1 - horizons.r_event);
    let t2b = horizons.r_cosmo - 0.12 * (horizons.r_cosmo - m2);
    let w1a = t1a + 0.4 * (m1 - t1a);
    let w1b = t1a + 0.8 * (m1 - t1a);
    let w2a = t2b - 0.8 * (t2b - m2);
    let w2b = t2b - 0.4 * (t2b - m2);
    let mut profile = ChartProfile {
        params: *params,
        horizons: *horizons,
        breaks: ProfileBreakpoints {
            t1a,
            w1a,
            w1b,
            m1,
            m2,
            w2a,
            w2b,
            t2b,
        },
        spacelike_margin: 0.0,
    };

    // Verified, not trusted: max of G(dt*, dt*) over a dense extended grid.
    let n_r = 257;
    let n_th = 33;
    let mut max_g = f64::NEG_INFINITY;
    for i in 0..n_r {
        let r = horizons.r_inner_cap
            + (horizons.r_outer_cap - horizons.r_inner_cap) * i as f64 / (n_r - 1) as f64;
        for j in 0..n_th {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / n_th as f64;
            let g_dtdt = crate::metric::inv_dtdt_raw(params, &profile, r, theta);
            max_g = max_g.max(g_dtdt);
        }
    }
    if max_g >= 0.0 {
        return Err(KdsError::SpacelikenessLost { max_g });
    }
    profile.spacelike_margin = -max_g;
    Ok(profile)
}

/// Profile with the default middle interval.
pub fn chart_profile_default(
    params: &BlackHoleParams,
    horizons: &HorizonData,
) -> Result<ChartProfile> {
    chart_profile_build(
        params,
        horizons,
        default_middle_interval(horizons, params.mass()),
    )
}
