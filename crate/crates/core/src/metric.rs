//! Metric components, inverse metric, and exact first partials in the
//! Boyer-Lindquist and Kerr-star charts.
//!
//! The covariant Kerr-star form is obtained by substituting
//! `t = t* + F(r)`, `phi = phi* + Phi(r)` into the Boyer-Lindquist form and
//! cancelling the `1/Delta` poles analytically; the contravariant form is
//! obtained independently by transforming the closed-form inverse metric.
//! `g * g_inv = I` is therefore a real cross-check, asserted in tests rather
//! than assumed.

use serde::{Deserialize, Serialize};

use crate::chart::ChartProfile;
use crate::error::{KdsError, Result};
use crate::horizon::HorizonData;
use crate::jet::Jet2;
use crate::linalg::Mat4;
use crate::params::BlackHoleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    BoyerLindquist,
    KerrStar,
}

/// A spacetime point in one of the two charts. In the Boyer-Lindquist chart
/// the starred fields hold the unstarred coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePoint {
    pub t_star: f64,
    pub r: f64,
    pub theta: f64,
    pub phi_star: f64,
    pub chart: Chart,
}

impl SpacetimePoint {
    pub fn kerr_star(r: f64, theta: f64) -> Self {
        Self {
            t_star: 0.0,
            r,
            theta,
            phi_star: 0.0,
            chart: Chart::KerrStar,
        }
    }

    pub fn boyer_lindquist(r: f64, theta: f64) -> Self {
        Self {
            t_star: 0.0,
            r,
            theta,
            phi_star: 0.0,
            chart: Chart::BoyerLindquist,
        }
    }
}

/// Metric, inverse, and partials at a point. `dg[mu]` is the derivative of
/// the component matrix along coordinate `mu`; stationarity and axisymmetry
/// make the `t*` and `phi*` slots vanish identically.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub chart: Chart,
    pub g: Mat4,
    pub g_inv: Mat4,
    pub dg: [Mat4; 4],
    pub d2g: Option<[[Mat4; 4]; 4]>,
}

impl MetricJet {
    /// `d(g_inv) = -g_inv . dg . g_inv` along coordinate `mu`.
    pub fn dg_inv(&self, mu: usize) -> Mat4 {
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        acc -= self.g_inv[a][i] * self.dg[mu][i][j] * self.g_inv[j][b];
                    }
                }
                out[a][b] = acc;
            }
        }
        out
    }

    pub fn second_partials(&self) -> Result<&[[Mat4; 4]; 4]> {
        self.d2g
            .as_ref()
            .ok_or_else(|| KdsError::StencilOutOfDomain("second partials not populated".into()))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta <= 0.0 || theta >= std::f64::consts::PI {
        return Err(KdsError::ChartDomainViolation(format!(
            "theta = {theta} is outside (0, pi)"
        )));
    }
    Ok(())
}

/// Scalar pieces shared by both charts, as jets in `(r, theta)`.
struct FamilyJets {
    delta: Jet2,
    rho2: Jet2,
    varkappa: Jet2,
    sin_theta: Jet2,
    r: Jet2,
}

fn family_jets(params: &BlackHoleParams, r: f64, theta: f64) -> FamilyJets {
    let rj = Jet2::var_r(r);
    let th = Jet2::var_theta(theta);
    let a = params.spin();
    let a2 = Jet2::constant(a * a);
    let lam = Jet2::constant(params.lambda());
    let cos_th = th.cos();
    let delta = (rj * rj + a2) * (Jet2::constant(1.0) - lam * rj * rj * (1.0 / 3.0))
        - rj * (2.0 * params.mass());
    let rho2 = rj * rj + a2 * cos_th * cos_th;
    let lam_b = Jet2::constant(params.lambda_b());
    let varkappa = Jet2::constant(1.0) + lam_b * cos_th * cos_th;
    FamilyJets {
        delta,
        rho2,
        varkappa,
        sin_theta: th.sin(),
        r: rj,
    }
}

fn sym_from_jets(m: &[[Jet2; 4]; 4]) -> (Mat4, [Mat4; 4]) {
    let mut g = [[0.0; 4]; 4];
    let mut dg = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            g[a][b] = m[a][b].v;
            dg[1][a][b] = m[a][b].dr;
            dg[2][a][b] = m[a][b].dth;
        }
    }
    (g, [dg[0], dg[1], dg[2], dg[3]])
}

/// Boyer-Lindquist components and inverse, no domain checks.
pub(crate) fn bl_raw(params: &BlackHoleParams, r: f64, theta: f64) -> (Mat4, [Mat4; 4], Mat4, [Mat4; 4]) {
    let fj = family_jets(params, r, theta);
    let a = params.spin();
    let one_lam = 1.0 + params.lambda_b();
    let aj = Jet2::constant(a);
    let r2a2 = fj.r * fj.r + Jet2::constant(a * a);
    let sin2 = fj.sin_theta * fj.sin_theta;
    let pref = (fj.rho2 * (one_lam * one_lam)).recip();
    let zero = Jet2::constant(0.0);

    // Covariant components.
    let g_tt = pref * (fj.varkappa * sin2 * aj * aj - fj.delta);
    let g_tph = pref * aj * sin2 * (fj.delta - fj.varkappa * r2a2);
    let g_phph = pref * sin2 * (fj.varkappa * r2a2 * r2a2 - fj.delta * aj * aj * sin2);
    let g_rr = fj.rho2 / fj.delta;
    let g_thth = fj.rho2 / fj.varkappa;

    let cov = [
        [g_tt, zero, zero, g_tph],
        [zero, g_rr, zero, zero],
        [zero, zero, g_thth, zero],
        [g_tph, zero, zero, g_phph],
    ];

    // Contravariant components from the closed-form inverse.
    let pref2 = (Jet2::constant(one_lam * one_lam)) / fj.rho2;
    let gi_tt = pref2 * (aj * aj * sin2 / fj.varkappa - r2a2 * r2a2 / fj.delta);
    let gi_tph = pref2 * aj * (fj.varkappa.recip() - r2a2 / fj.delta);
    let gi_phph = pref2 * ((fj.varkappa * sin2).recip() - aj * aj / fj.delta);
    let gi_rr = fj.delta / fj.rho2;
    let gi_thth = fj.varkappa / fj.rho2;

    let con = [
        [gi_tt, zero, zero, gi_tph],
        [zero, gi_rr, zero, zero],
        [zero, zero, gi_thth, zero],
        [gi_tph, zero, zero, gi_phph],
    ];

    let (g, dg) = sym_from_jets(&cov);
    let (g_inv, dg_inv) = sym_from_jets(&con);
    (g, dg, g_inv, dg_inv)
}

/// Kerr-star components and inverse from the horizon-regular combinations,
/// no domain checks.
pub(crate) fn kerr_star_raw(
    profile: &ChartProfile,
    r: f64,
    theta: f64,
) -> (Mat4, [Mat4; 4], Mat4, [Mat4; 4]) {
    let params = &profile.params;
    let fj = family_jets(params, r, theta);
    let a = params.spin();
    let one_lam = 1.0 + params.lambda_b();
    let aj = Jet2::constant(a);
    let r2a2 = fj.r * fj.r + Jet2::constant(a * a);
    let sin2 = fj.sin_theta * fj.sin_theta;
    let zero = Jet2::constant(0.0);

    let s = profile.s_jet(r);
    let c = profile.c_jet(r);
    let q_reg = profile.q_reg_jet(r);

    // One-form factors of the regular decomposition:
    //   P = a dt* - (r^2+a^2) dphi* + a c dr   (from  a dt - (r^2+a^2) dphi)
    //   Q = dt* - a sin^2 dphi* + c dr         (from  dt - a sin^2 dphi, regular part)
    let p_form = [aj, aj * c, zero, -r2a2];
    let q_form = [Jet2::constant(1.0), c, zero, -(aj * sin2)];

    let alpha = fj.varkappa * sin2 / (fj.rho2 * (one_lam * one_lam));
    let beta = fj.delta / (fj.rho2 * (one_lam * one_lam));
    let gamma = s * (1.0 / one_lam);

    let mut cov = [[zero; 4]; 4];
    for m in 0..4 {
        for n in m..4 {
            let mut val = alpha * p_form[m] * p_form[n] - beta * q_form[m] * q_form[n];
            if n == 1 {
                val = val - gamma * q_form[m];
            }
            if m == 1 {
                val = val - gamma * q_form[n];
            }
            if m == 1 && n == 1 {
                val = val + q_reg * fj.rho2;
            }
            if m == 2 && n == 2 {
                val = val + fj.rho2 / fj.varkappa;
            }
            cov[m][n] = val;
            cov[n][m] = val;
        }
    }

    // Contravariant components: transform the Boyer-Lindquist inverse by
    // dt* = dt - F' dr, dphi* = dphi - Phi' dr; every divergent piece
    // collapses into q_reg = (1 - s^2)/Delta.
    let pref2 = (Jet2::constant(one_lam * one_lam)) / fj.rho2;
    let gi_tt = pref2 * (aj * aj * sin2 / fj.varkappa) - q_reg * pref2 * r2a2 * r2a2
        + (s * c * r2a2 * (2.0 * one_lam) + c * c * fj.delta) / fj.rho2;
    let gi_tr = -(s * r2a2 * one_lam + c * fj.delta) / fj.rho2;
    let gi_tph = pref2 * aj / fj.varkappa - q_reg * pref2 * aj * r2a2
        + s * c * aj * (one_lam) / fj.rho2;
    let gi_rr = fj.delta / fj.rho2;
    let gi_rph = -(s * aj * (one_lam)) / fj.rho2;
    let gi_thth = fj.varkappa / fj.rho2;
    let gi_phph = pref2 * (fj.varkappa * sin2).recip() - q_reg * pref2 * aj * aj;

    let con = [
        [gi_tt, gi_tr, zero, gi_tph],
        [gi_tr, gi_rr, zero, gi_rph],
        [zero, zero, gi_thth, zero],
        [gi_tph, gi_rph, zero, gi_phph],
    ];

    let (g, dg) = sym_from_jets(&cov);
    let (g_inv, dg_inv) = sym_from_jets(&con);
    (g, dg, g_inv, dg_inv)
}

/// `G(dt*, dt*)` alone, for spacelikeness sweeps.
pub(crate) fn inv_dtdt_raw(_params: &BlackHoleParams, profile: &ChartProfile, r: f64, theta: f64) -> f64 {
    let (_, _, g_inv, _) = kerr_star_raw(profile, r, theta);
    g_inv[0][0]
}

/// Boyer-Lindquist metric jet; refuses horizon-adjacent points, where the
/// chart degenerates.
pub fn metric_bl(
    params: &BlackHoleParams,
    horizons: &HorizonData,
    point: &SpacetimePoint,
) -> Result<MetricJet> {
    if point.chart != Chart::BoyerLindquist {
        return Err(KdsError::ChartDomainViolation(
            "point is not in the Boyer-Lindquist chart".into(),
        ));
    }
    check_theta(point.theta)?;
    if point.r <= horizons.r_event || point.r >= horizons.r_cosmo {
        return Err(KdsError::ChartDomainViolation(format!(
            "r = {} is outside the open horizon gap ({}, {})",
            point.r, horizons.r_event, horizons.r_cosmo
        )));
    }
    let (g, dg, g_inv, _) = bl_raw(params, point.r, point.theta);
    Ok(MetricJet {
        chart: Chart::BoyerLindquist,
        g,
        g_inv,
        dg,
        d2g: None,
    })
}

/// Kerr-star metric jet on the extended interval, regular across both
/// horizons.
pub fn metric_kerr_star(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    point: &SpacetimePoint,
) -> Result<MetricJet> {
    debug_assert_eq!(*params, profile.params);
    if point.chart != Chart::KerrStar {
        return Err(KdsError::ChartDomainViolation(
            "point is not in the Kerr-star chart".into(),
        ));
    }
    check_theta(point.theta)?;
    let h = &profile.horizons;
    if point.r < h.r_inner_cap || point.r > h.r_outer_cap {
        return Err(KdsError::ChartDomainViolation(format!(
            "r = {} is outside the extended interval [{}, {}]",
            point.r, h.r_inner_cap, h.r_outer_cap
        )));
    }
    let (g, dg, g_inv, _) = kerr_star_raw(profile, point.r, point.theta);
    Ok(MetricJet {
        chart: Chart::KerrStar,
        g,
        g_inv,
        dg,
        d2g: None,
    })
}

/// Evaluates the chart's component jet at raw `(r, theta)`, used by stencil
/// sweeps that stay inside the chart by construction.
pub fn metric_raw(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    chart: Chart,
    r: f64,
    theta: f64,
) -> MetricJet {
    let (g, dg, g_inv, _) = match chart {
        Chart::BoyerLindquist => bl_raw(params, r, theta),
        Chart::KerrStar => kerr_star_raw(profile, r, theta),
    };
    MetricJet {
        chart,
        g,
        g_inv,
        dg,
        d2g: None,
    }
}

/// Fills second partials by 4th-order central differences of the exact
/// first partials. Only the `(r, theta)` block is nonzero.
pub fn with_second_partials(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    chart: Chart,
    r: f64,
    theta: f64,
    spacing: f64,
) -> MetricJet {
    let jet0 = metric_raw(params, profile, chart, r, theta);
    let mut jet = jet0;
    let eval = |rr: f64, tt: f64| -> [Mat4; 4] {
        match chart {
            Chart::BoyerLindquist => bl_raw(params, rr, tt).1,
            Chart::KerrStar => kerr_star_raw(profile, rr, tt).1,
        }
    };
    let mut d2 = [[[[0.0; 4]; 4]; 4]; 4];
    // Central 4th-order weights for the first derivative.
    let w = [1.0, -8.0, 8.0, -1.0];
    let off = [-2.0, -1.0, 1.0, 2.0];
    let denom = 12.0 * spacing;
    for (k, &o) in off.iter().enumerate() {
        let dg_r = eval(r + o * spacing, theta);
        let dg_t = eval(r, theta + o * spacing);
        for a in 0..4 {
            for b in 0..4 {
                // d2[r][mu] from r-sweep, d2[theta][mu] from theta-sweep.
                for mu in 0..4 {
                    d2[1][mu][a][b] += w[k] * dg_r[mu][a][b] / denom;
                    d2[2][mu][a][b] += w[k] * dg_t[mu][a][b] / denom;
                }
            }
        }
    }
    // Symmetrize the mixed block to kill the asymmetric part of the
    // truncation error.
    for a in 0..4 {
        for b in 0..4 {
            let m = 0.5 * (d2[1][2][a][b] + d2[2][1][a][b]);
            d2[1][2][a][b] = m;
            d2[2][1][a][b] = m;
        }
    }
    jet.d2g = Some(d2);
    jet
}

/// The uniform-spacelikeness scalar `G = -1 / G(dt*, dt*)`, positive on the
/// whole extended region.
pub fn g_inv_dtdt(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    point: &SpacetimePoint,
) -> Result<f64> {
    let jet = metric_kerr_star(params, profile, point)?;
    let denom = jet.g_inv[0][0];
    if denom >= 0.0 {
        return Err(KdsError::SpacelikenessLost { max_g: denom });
    }
    Ok(-1.0 / denom)
}

/// `g(T, T)`: positive values flag the ergoregion.
pub fn ergosphere_indicator(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    point: &SpacetimePoint,
) -> Result<f64> {
    let jet = metric_kerr_star(params, profile, point)?;
    Ok(jet.g[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::chart_profile_default;
    use crate::horizon::horizon_radii;
    use crate::linalg::{mat_mul, max_abs_diff, negative_eigenvalue_count, IDENTITY};
    use crate::params::validate_params;

    fn setup(a: f64) -> (BlackHoleParams, HorizonData, ChartProfile) {
        let p = validate_params(3.0, 0.1, a).unwrap();
        let h = horizon_radii(&p, 0.05).unwrap();
        let pr = chart_profile_default(&p, &h).unwrap();
        (p, h, pr)
    }

    #[test]
    fn sds_bl_is_diagonal_with_known_g_tt() {
        let (p, h, _) = setup(0.0);
        let point = SpacetimePoint::boyer_lindquist(0.5, std::f64::consts::FRAC_PI_2);
        let jet = metric_bl(&p, &h, &point).unwrap();
        // mu(0.5) = 1 - 0.4 - 0.25 = 0.35
        assert!((jet.g[0][0] + 0.35).abs() < 1e-14);
        assert!((jet.g[1][1] - 1.0 / 0.35).abs() < 1e-13);
        assert!((jet.g[2][2] - 0.25).abs() < 1e-14);
        assert!((jet.g[3][3] - 0.25).abs() < 1e-14);
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    assert_eq!(jet.g[a][b], 0.0);
                }
            }
        }
        assert!((jet.g[3][3] - 0.5f64.powi(2) * 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_contract_and_signature_across_charts() {
        for a in [0.0, 1e-4] {
            let (p, h, pr) = setup(a);
            for k in 0..24 {
                let r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * (k as f64 + 0.5) / 24.0;
                for j in 0..6 {
                    let th = std::f64::consts::PI * (j as f64 + 0.5) / 6.0;
                    let jet =
                        metric_kerr_star(&p, &pr, &SpacetimePoint::kerr_star(r, th)).unwrap();
                    let prod = mat_mul(&jet.g, &jet.g_inv);
                    assert!(
                        max_abs_diff(&prod, &IDENTITY) < 1e-12,
                        "a={a} r={r} th={th}: {:e}",
                        max_abs_diff(&prod, &IDENTITY)
                    );
                    assert_eq!(negative_eigenvalue_count(&jet.g), 1);
                }
            }
        }
    }

    #[test]
    fn kerr_star_equals_bl_on_middle_interval() {
        let (p, h, pr) = setup(0.0);
        let (m1, m2) = pr.middle_interval();
        let r = 0.5 * (m1 + m2);
        let th = 1.1;
        let ks = metric_kerr_star(&p, &pr, &SpacetimePoint::kerr_star(r, th)).unwrap();
        let bl = metric_bl(&p, &h, &SpacetimePoint::boyer_lindquist(r, th)).unwrap();
        assert!(max_abs_diff(&ks.g, &bl.g) < 1e-14);
        assert!(max_abs_diff(&ks.g_inv, &bl.g_inv) < 1e-14);
    }

    #[test]
    fn kerr_star_regular_at_both_horizons() {
        for a in [0.0, 1e-4] {
            let (p, _, pr) = setup(a);
            for r in [pr.horizons.r_event, pr.horizons.r_cosmo] {
                let jet = metric_kerr_star(&p, &pr, &SpacetimePoint::kerr_star(r, 0.9)).unwrap();
                let prod = mat_mul(&jet.g, &jet.g_inv);
                assert!(max_abs_diff(&prod, &IDENTITY) < 1e-12);
                for row in &jet.g {
                    for &x in row {
                        assert!(x.is_finite() && x.abs() < 1e3);
                    }
                }
            }
        }
    }

    #[test]
    fn sds_substitution_formulas_hold_off_plateau() {
        // One-time hand substitution: g_{t*r} = -mu F', g_rr = 1/mu - mu F'^2.
        let (p, _, pr) = setup(0.0);
        let samples = [
            0.5 * (pr.breaks.t1a + pr.breaks.m1),
            0.31,
            0.5 * (pr.breaks.m2 + pr.breaks.t2b),
        ];
        for r in samples {
            let th = 0.7;
            let jet = metric_kerr_star(&p, &pr, &SpacetimePoint::kerr_star(r, th)).unwrap();
            let mu = p.mu(r);
            let fp = pr.f_prime(r);
            assert!((jet.g[0][1] + mu * fp).abs() < 1e-13, "r={r}");
            assert!((jet.g[1][1] - (1.0 / mu - mu * fp * fp)).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn exact_partials_match_central_differences() {
        let (p, _, pr) = setup(1e-4);
        let r = 0.4;
        let th = 1.0;
        let h = 1e-6;
        let jet = metric_raw(&p, &pr, Chart::KerrStar, r, th);
        let gp = kerr_star_raw(&pr, r + h, th).0;
        let gm = kerr_star_raw(&pr, r - h, th).0;
        let gtp = kerr_star_raw(&pr, r, th + h).0;
        let gtm = kerr_star_raw(&pr, r, th - h).0;
        for a in 0..4 {
            for b in 0..4 {
                let fd_r = (gp[a][b] - gm[a][b]) / (2.0 * h);
                let fd_t = (gtp[a][b] - gtm[a][b]) / (2.0 * h);
                assert!((jet.dg[1][a][b] - fd_r).abs() < 1e-6, "dr[{a}][{b}]");
                assert!((jet.dg[2][a][b] - fd_t).abs() < 1e-6, "dth[{a}][{b}]");
            }
        }
    }

    #[test]
    fn g_inv_dtdt_is_mu_on_middle_interval_for_sds() {
        let (p, _, pr) = setup(0.0);
        let (m1, m2) = pr.middle_interval();
        let r = 0.5 * (m1 + m2);
        let val = g_inv_dtdt(&p, &pr, &SpacetimePoint::kerr_star(r, 1.3)).unwrap();
        assert!((val - p.mu(r)).abs() < 1e-14);
    }

    #[test]
    fn g_inv_dtdt_positive_and_quadratic_in_spin() {
        let (p0, _, pr0) = setup(0.0);
        let mut min_g = f64::INFINITY;
        for k in 0..64 {
            let r = pr0.horizons.r_inner_cap
                + (pr0.horizons.r_outer_cap - pr0.horizons.r_inner_cap) * (k as f64 + 0.5) / 64.0;
            let v = g_inv_dtdt(&p0, &pr0, &SpacetimePoint::kerr_star(r, 0.8)).unwrap();
            min_g = min_g.min(v);
        }
        assert!(min_g > 0.0);

        // |G(a) - G(0)| should scale like a^2: quadruple under a -> 2a.
        let r = 0.5;
        let th = 1.2;
        let base = g_inv_dtdt(&p0, &pr0, &SpacetimePoint::kerr_star(r, th)).unwrap();
        let mut diffs = Vec::new();
        for a in [5e-5, 1e-4] {
            let (p, _, pr) = setup(a);
            let v = g_inv_dtdt(&p, &pr, &SpacetimePoint::kerr_star(r, th)).unwrap();
            diffs.push((v - base).abs());
        }
        let ratio = diffs[1] / diffs[0];
        assert!((ratio - 4.0).abs() < 0.2, "ratio = {ratio}");
    }

    #[test]
    fn ergoregion_sign_pattern_for_sds() {
        let (p, h, pr) = setup(0.0);
        let inside =
            ergosphere_indicator(&p, &pr, &SpacetimePoint::kerr_star(0.5, 1.0)).unwrap();
        assert!(inside < 0.0);
        let strip_in = ergosphere_indicator(
            &p,
            &pr,
            &SpacetimePoint::kerr_star(0.5 * (h.r_inner_cap + h.r_event), 1.0),
        )
        .unwrap();
        assert!(strip_in > 0.0);
        let strip_out = ergosphere_indicator(
            &p,
            &pr,
            &SpacetimePoint::kerr_star(0.5 * (h.r_cosmo + h.r_outer_cap), 1.0),
        )
        .unwrap();
        assert!(strip_out > 0.0);
        let on_horizon =
            ergosphere_indicator(&p, &pr, &SpacetimePoint::kerr_star(h.r_event, 1.0)).unwrap();
        assert!(on_horizon.abs() < 1e-10);
    }

    #[test]
    fn bl_refuses_horizon_adjacent_points() {
        let (p, h, _) = setup(0.0);
        let err = metric_bl(&p, &h, &SpacetimePoint::boyer_lindquist(h.r_event, 1.0));
        assert!(matches!(err, Err(KdsError::ChartDomainViolation(_))));
    }
}
