//! Norms, decay fitting, interpolation verification, and convergence-order
//! measurement.

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::chart::ChartProfile;
use crate::error::{KdsError, Result};
use crate::evolution::StateVector;
use crate::grid::{pairwise_sum, Field2D, FieldSet, Grid2D, PolarStencil, RadialStencil};

/// Highest derivative count the stencil budget supports directly; beyond
/// `DIRECT_BUDGET` the operators are composed, with the documented loss of
/// accuracy, up to `MAX_BUDGET`.
pub const DIRECT_BUDGET: usize = 4;
pub const MAX_BUDGET: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Coordinate,
    WeightedSqrtG,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormSpec {
    pub k: usize,
    pub alpha: f64,
    pub measure: Measure,
}

/// Quadrature context: grid plus the `sqrt(G)` weight plane for the
/// measure option.
pub struct NormContext {
    pub grid: Grid2D,
    sqrt_gauge: Field2D,
}

impl NormContext {
    pub fn new(profile: &ChartProfile, grid: &Grid2D) -> Self {
        let sqrt_gauge = Field2D::from_fn(grid, |r, theta| {
            let (_, _, g_inv, _) = crate::metric::kerr_star_raw(profile, r, theta);
            (-1.0 / g_inv[0][0]).max(0.0).sqrt()
        });
        Self {
            grid: *grid,
            sqrt_gauge,
        }
    }

    /// Unit-weight context for synthetic fields.
    pub fn flat(grid: &Grid2D) -> Self {
        Self {
            grid: *grid,
            sqrt_gauge: Field2D::from_fn(grid, |_, _| 1.0),
        }
    }

    fn weight(&self, k: usize, measure: Measure) -> f64 {
        match measure {
            Measure::Coordinate => 1.0,
            Measure::WeightedSqrtG => self.sqrt_gauge.data[k],
        }
    }

    /// `L^2` square of one real plane: trapezoid in `r`, midpoint in
    /// `theta`.
    fn l2_sq(&self, plane: &Field2D, measure: Measure) -> f64 {
        let grid = &self.grid;
        let mut rows = Vec::with_capacity(grid.n_theta);
        for j in 0..grid.n_theta {
            let mut row = Vec::with_capacity(grid.n_r);
            for i in 0..grid.n_r {
                let k = grid.idx(i, j);
                let w_r = if i == 0 || i == grid.n_r - 1 { 0.5 } else { 1.0 };
                let v = plane.data[k];
                row.push(v * v * w_r * self.weight(k, measure));
            }
            rows.push(pairwise_sum(&row));
        }
        pairwise_sum(&rows) * grid.spacing_r * grid.spacing_theta
    }
}

/// Derivative of a plane: direct stencil up to `DIRECT_BUDGET`, composed
/// beyond. Returns the plane and its resulting parity.
fn derive_r(plane: &Field2D, parity: f64, order: usize, spacing: f64) -> (Field2D, f64) {
    if order == 0 {
        return (plane.clone(), parity);
    }
    let direct = order.min(DIRECT_BUDGET);
    let st = RadialStencil::build(plane.n_r, spacing, direct);
    let out = plane.deriv_r(&st);
    if order > direct {
        derive_r(&out, parity, order - direct, spacing)
    } else {
        (out, parity)
    }
}

fn derive_theta(plane: &Field2D, parity: f64, order: usize, spacing: f64) -> (Field2D, f64) {
    if order == 0 {
        return (plane.clone(), parity);
    }
    let direct = order.min(DIRECT_BUDGET);
    let st = PolarStencil::build(spacing, direct);
    let out = plane.deriv_theta(&st, parity);
    let new_parity = if direct % 2 == 0 { parity } else { -parity };
    if order > direct {
        derive_theta(&out, new_parity, order - direct, spacing)
    } else {
        (out, new_parity)
    }
}

/// Cumulative slice Sobolev norm: the `l^2` sum over all coordinate
/// derivatives of total order `<= k`, the azimuthal derivative realized as
/// multiplication by `i m`.
pub fn hk_norm(ctx: &NormContext, fields: &FieldSet, k: usize, measure: Measure) -> Result<f64> {
    if k > MAX_BUDGET {
        return Err(KdsError::RegularityBudgetExceeded {
            requested: k,
            budget: MAX_BUDGET,
        });
    }
    let grid = &ctx.grid;
    let m2 = (grid.mode_m as f64) * (grid.mode_m as f64);
    let mut total = 0.0;
    for (c, plane) in fields.planes.iter().enumerate() {
        let parity = fields.parities[c];
        for kr in 0..=k {
            let (dr_plane, p_r) = derive_r(plane, parity, kr, grid.spacing_r);
            for kth in 0..=(k - kr) {
                let (d_plane, _) = derive_theta(&dr_plane, p_r, kth, grid.spacing_theta);
                let base = ctx.l2_sq(&d_plane, measure);
                // remaining budget goes to phi derivatives: each adds a
                // factor m^2 to the square.
                let mut m_factor = 1.0;
                for kph in 0..=(k - kr - kth) {
                    if kph > 0 {
                        m_factor *= m2;
                    }
                    if kph > 0 && m_factor == 0.0 {
                        break;
                    }
                    total += base * m_factor;
                }
            }
        }
    }
    Ok(total.sqrt())
}

/// Slice-pair norm `sqrt( ||u||_{H^k}^2 + ||v||_{H^{k-1}}^2 )`.
pub fn slice_pair_norm(
    ctx: &NormContext,
    state: &StateVector,
    k: usize,
    measure: Measure,
) -> Result<f64> {
    let nu = hk_norm(ctx, &state.u, k, measure)?;
    let nv = if k == 0 {
        0.0
    } else {
        hk_norm(ctx, &state.v, k - 1, measure)?
    };
    Ok((nu * nu + nv * nv).sqrt())
}

/// `int e^{2 alpha t} n(t)^2 dt` by trapezoid over the recorded window.
pub fn weighted_spacetime_norm(times: &[f64], slice_norms: &[f64], alpha: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        let a = (2.0 * alpha * times[i - 1]).exp() * slice_norms[i - 1] * slice_norms[i - 1];
        let b = (2.0 * alpha * times[i]).exp() * slice_norms[i] * slice_norms[i];
        acc += 0.5 * dt * (a + b);
    }
    acc.sqrt()
}

/// The forcing-parameter norm: forcing at regularity `k + m - 1` with
/// weight `alpha`, data pair at `(k + m, k + m - 1)`.
#[allow(clippy::too_many_arguments)]
pub fn d_kam_norm(
    ctx: &NormContext,
    forcing_times: &[f64],
    forcing_slices: &[FieldSet],
    data: &StateVector,
    k: usize,
    alpha: f64,
    m: usize,
    measure: Measure,
) -> Result<f64> {
    if k + m > MAX_BUDGET {
        return Err(KdsError::RegularityBudgetExceeded {
            requested: k + m,
            budget: MAX_BUDGET,
        });
    }
    let f_norms: Vec<f64> = forcing_slices
        .iter()
        .map(|f| hk_norm(ctx, f, k + m - 1, measure))
        .collect::<Result<_>>()?;
    let forcing_part = weighted_spacetime_norm(forcing_times, &f_norms, alpha);
    let data_part = slice_pair_norm(ctx, data, k + m, measure)?;
    Ok(forcing_part + data_part)
}

/// Fitted exponential decay of an energy series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    /// decay rate of the field amplitude (half the energy rate).
    pub rate: f64,
    /// decay rate of the energy itself.
    pub rate_energy: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    pub residual: f64,
    pub n_samples: usize,
    pub resolution_tag: String,
}

/// Least-squares fit of `log E` against `t*` on the window. Both rate
/// conventions are reported: the paper states decay for the field, runs
/// measure energy, and energy decays at twice the field rate.
pub fn decay_rate_fit(
    times: &[f64],
    energies: &[f64],
    window: (f64, f64),
    resolution_tag: &str,
) -> Result<DecayFit> {
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &e) in times.iter().zip(energies.iter()) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(e > 0.0) {
            return Err(KdsError::NonPositiveEnergy);
        }
        ts.push(t);
        logs.push(e.ln());
    }
    if ts.len() < 10 {
        return Err(KdsError::WindowTooShort {
            got: ts.len(),
            need: 10,
        });
    }
    let n = ts.len() as f64;
    let mean_t = pairwise_sum(&ts) / n;
    let mean_l = pairwise_sum(&logs) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (t, l) in ts.iter().zip(logs.iter()) {
        sxx += (t - mean_t) * (t - mean_t);
        sxy += (t - mean_t) * (l - mean_l);
    }
    let slope = sxy / sxx;
    let intercept = mean_l - slope * mean_t;
    let mut ss = 0.0;
    for (t, l) in ts.iter().zip(logs.iter()) {
        let fit = intercept + slope * t;
        ss += (l - fit) * (l - fit);
    }
    Ok(DecayFit {
        rate: -slope / 2.0,
        rate_energy: -slope,
        amplitude: intercept.exp(),
        window,
        residual: (ss / n as f64).sqrt(),
        n_samples: ts.len(),
        resolution_tag: resolution_tag.to_string(),
    })
}

/// Default fit window: the last half of the run, after the prompt
/// transient.
pub fn default_fit_window(times: &[f64]) -> (f64, f64) {
    let t_end = *times.last().unwrap_or(&0.0);
    (0.5 * t_end, t_end)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub l: usize,
    pub big_n: usize,
    pub theta: f64,
    pub max_ratio: f64,
    pub single_frequency_deviation: f64,
    pub samples: usize,
}

/// Interpolation inequality on the periodic spectral toy, where Sobolev
/// norms are Fourier multipliers `<k>^s` and the interpolation constant is
/// exactly one:
/// `||u||_{l+2} <= ||u||_l^{1-theta} ||u||_N^theta`, `theta = 2/(N - l)`.
pub fn interpolation_check(l: usize, big_n: usize, samples: usize, seed: u64) -> InterpolationReport {
    assert!(big_n > l + 2, "need N > l + 2");
    let theta = 2.0 / (big_n - l) as f64;
    let modes = 24usize;
    let mut rng = Pcg64::seed_from_u64(seed);
    let norm_s = |coef: &[(f64, f64)], s: f64| -> f64 {
        let mut acc = 0.0;
        for (idx, (re, im)) in coef.iter().enumerate() {
            let k = idx as f64 - modes as f64;
            let bracket = 1.0 + k * k;
            acc += bracket.powf(s) * (re * re + im * im);
        }
        acc.sqrt()
    };
    let mut max_ratio: f64 = 0.0;
    for _ in 0..samples {
        let coef: Vec<(f64, f64)> = (0..2 * modes + 1)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let mid = norm_s(&coef, (l + 2) as f64);
        let low = norm_s(&coef, l as f64);
        let high = norm_s(&coef, big_n as f64);
        let ratio = mid / (low.powf(1.0 - theta) * high.powf(theta));
        max_ratio = max_ratio.max(ratio);
    }
    // single-frequency field: equality case.
    let mut coef = vec![(0.0, 0.0); 2 * modes + 1];
    coef[modes + 7] = (0.8, -0.6);
    let mid = norm_s(&coef, (l + 2) as f64);
    let low = norm_s(&coef, l as f64);
    let high = norm_s(&coef, big_n as f64);
    let single = (mid / (low.powf(1.0 - theta) * high.powf(theta)) - 1.0).abs();
    InterpolationReport {
        l,
        big_n,
        theta,
        max_ratio,
        single_frequency_deviation: single,
        samples,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub order: f64,
    pub coarse_diff: f64,
    pub fine_diff: f64,
    pub monotone: bool,
}

/// Richardson order estimate from three resolutions in ratio two, compared
/// at common sample locations (scalars are length-one slices).
pub fn convergence_order(coarse: &[f64], mid: &[f64], fine: &[f64]) -> ConvergenceReport {
    assert_eq!(coarse.len(), mid.len());
    assert_eq!(mid.len(), fine.len());
    let l2 = |a: &[f64], b: &[f64]| -> f64 {
        let sq: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).collect();
        (pairwise_sum(&sq) / sq.len() as f64).sqrt()
    };
    let d1 = l2(coarse, mid);
    let d2 = l2(mid, fine);
    ConvergenceReport {
        order: (d1 / d2).log2(),
        coarse_diff: d1,
        fine_diff: d2,
        monotone: d2 < d1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, scalar_parities};
    use crate::horizon::horizon_radii;
    use crate::params::validate_params;

    fn flat_ctx(n_r: usize, n_theta: usize, m: i32) -> (Grid2D, NormContext) {
        let p = validate_params(3.0, 0.1, 0.0).unwrap();
        let h = horizon_radii(&p, 0.05).unwrap();
        let grid = build_grid(&h, n_r, n_theta, m).unwrap();
        let ctx = NormContext::flat(&grid);
        (grid, ctx)
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let (grid, ctx) = flat_ctx(32, 16, 0);
        let f = FieldSet::zeros(&grid, &scalar_parities(0));
        assert_eq!(hk_norm(&ctx, &f, 3, Measure::Coordinate).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_matches_closed_form() {
        // u = sin(q (r - r0)) cos^2(theta): derivatives have closed-form L2
        // integrals; check H^1 against quadrature-exact arithmetic at high
        // resolution.
        let (grid, ctx) = flat_ctx(257, 128, 0);
        let q = 8.0;
        let r0 = grid.r_min;
        let mut f = FieldSet::zeros(&grid, &scalar_parities(0));
        f.planes[0] = Field2D::from_fn(&grid, |r, th| (q * (r - r0)).sin() * th.cos().powi(2));
        let got = hk_norm(&ctx, &f, 1, Measure::Coordinate).unwrap();

        // closed forms: int sin^2 = L/2 - sin(2qL)/(4q), etc.
        let l = grid.r_max - grid.r_min;
        let int_sin2 = 0.5 * l - (2.0 * q * l).sin() / (4.0 * q);
        let int_cos2 = 0.5 * l + (2.0 * q * l).sin() / (4.0 * q);
        // theta integrals over (0, pi): cos^4 -> 3pi/8, sin^2 cos^2 -> pi/8.
        let c4 = 3.0 * std::f64::consts::PI / 8.0;
        let s2c2 = std::f64::consts::PI / 8.0;
        let expect = (int_sin2 * c4
            + q * q * int_cos2 * c4
            + int_sin2 * 4.0 * s2c2)
            .sqrt();
        let rel = (got - expect).abs() / expect;
        assert!(rel < 1e-5, "rel = {rel:e}");
    }

    #[test]
    fn norms_are_cumulative_and_homogeneous() {
        let (grid, ctx) = flat_ctx(48, 24, 2);
        let mut f = FieldSet::zeros(&grid, &scalar_parities(2));
        f.planes[0] = Field2D::from_fn(&grid, |r, th| (3.0 * r).sin() * th.sin().powi(2));
        f.planes[1] = Field2D::from_fn(&grid, |r, th| (2.0 * r).cos() * th.sin().powi(2));
        let mut prev = 0.0;
        for k in 0..=4 {
            let n = hk_norm(&ctx, &f, k, Measure::Coordinate).unwrap();
            assert!(n >= prev);
            prev = n;
        }
        let n1 = hk_norm(&ctx, &f, 2, Measure::Coordinate).unwrap();
        let mut scaled = f.clone();
        scaled.scale(-2.5);
        let n2 = hk_norm(&ctx, &scaled, 2, Measure::Coordinate).unwrap();
        assert!((n2 - 2.5 * n1).abs() < 1e-12 * n1);
    }

    #[test]
    fn budget_is_enforced() {
        let (grid, ctx) = flat_ctx(32, 16, 0);
        let f = FieldSet::zeros(&grid, &scalar_parities(0));
        assert!(matches!(
            hk_norm(&ctx, &f, 7, Measure::Coordinate),
            Err(KdsError::RegularityBudgetExceeded { .. })
        ));
    }

    #[test]
    fn weighted_norm_closed_forms() {
        // constant unit slice norm: integral of e^{2 alpha t} over [0, T].
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.01).collect();
        let norms = vec![1.0; times.len()];
        let alpha = -0.4;
        let got = weighted_spacetime_norm(&times, &norms, alpha);
        let expect = (((2.0 * alpha * 1.0f64).exp() - 1.0) / (2.0 * alpha)).sqrt();
        assert!((got - expect).abs() < 1e-4);
        let got0 = weighted_spacetime_norm(&times, &norms, 0.0);
        assert!((got0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dkam_reduces_to_data_norm_without_forcing() {
        let (grid, ctx) = flat_ctx(32, 16, 0);
        let parities = scalar_parities(0);
        let mut u = FieldSet::zeros(&grid, &parities);
        u.planes[0] = Field2D::from_fn(&grid, |r, _| (r - 0.5) * (r - 0.5));
        let state = StateVector {
            v: FieldSet::zeros(&grid, &parities),
            u,
            t_star: 0.0,
        };
        let d = d_kam_norm(&ctx, &[], &[], &state, 3, 0.1, 1, Measure::Coordinate).unwrap();
        let pair = slice_pair_norm(&ctx, &state, 4, Measure::Coordinate).unwrap();
        assert_eq!(d, pair);
        assert!(matches!(
            d_kam_norm(&ctx, &[], &[], &state, 6, 0.1, 1, Measure::Coordinate),
            Err(KdsError::RegularityBudgetExceeded { .. })
        ));
    }

    #[test]
    fn decay_fit_recovers_synthetic_exponential() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let energies: Vec<f64> = times.iter().map(|t| 5.0 * (-0.3 * t).exp()).collect();
        let fit = decay_rate_fit(&times, &energies, (0.0, 10.0), "test").unwrap();
        assert!((fit.rate_energy - 0.3).abs() < 1e-10);
        assert!((fit.rate - 0.15).abs() < 1e-10);
        assert!((fit.amplitude - 5.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn decay_fit_flags_bad_windows() {
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let constant = vec![2.0; times.len()];
        let fit = decay_rate_fit(&times, &constant, (0.0, 10.0), "const").unwrap();
        assert!(fit.rate.abs() < 1e-12 && fit.residual < 1e-12);
        let short = decay_rate_fit(&times, &constant, (9.8, 10.0), "short");
        assert!(matches!(short, Err(KdsError::WindowTooShort { .. })));
        let negative = vec![-1.0; times.len()];
        assert!(matches!(
            decay_rate_fit(&times, &negative, (0.0, 10.0), "neg"),
            Err(KdsError::NonPositiveEnergy)
        ));
    }

    #[test]
    fn interpolation_holds_on_spectral_toy() {
        let report = interpolation_check(3, 6, 10_000, 0xC0FFEE);
        assert!((report.theta - 2.0 / 3.0).abs() < 1e-15);
        assert!(report.max_ratio <= 1.0 + 1e-12, "{}", report.max_ratio);
        assert!(report.single_frequency_deviation < 1e-12);
    }

    #[test]
    fn convergence_order_recovers_synthetic_orders() {
        // value + C h^p sequences at h, h/2, h/4.
        for p in [2.0, 4.0] {
            let base = 1.37;
            let c = 0.2;
            let coarse = vec![base + c * 1.0f64.powf(p)];
            let mid = vec![base + c * 0.5f64.powf(p)];
            let fine = vec![base + c * 0.25f64.powf(p)];
            let report = convergence_order(&coarse, &mid, &fine);
            assert!((report.order - p).abs() < 0.01, "order = {}", report.order);
            assert!(report.monotone);
        }
        let flat = convergence_order(&[1.0], &[1.1], &[1.3]);
        assert!(!flat.monotone);
    }
}
