//! Christoffel symbols, curvature contractions, and Lie derivatives.

use crate::chart::ChartProfile;
use crate::error::{KdsError, Result};
use crate::linalg::Mat4;
use crate::metric::{metric_raw, Chart, MetricJet, SpacetimePoint};
use crate::params::BlackHoleParams;

pub type Rank3 = [[[f64; 4]; 4]; 4];

/// Levi-Civita connection from a metric jet:
/// `Gamma^x_{mn} = 1/2 g^{xs} (d_m g_{sn} + d_n g_{sm} - d_s g_{mn})`.
pub fn christoffel(jet: &MetricJet) -> Rank3 {
    let mut out = [[[0.0; 4]; 4]; 4];
    for x in 0..4 {
        for m in 0..4 {
            for n in m..4 {
                let mut acc = 0.0;
                for s in 0..4 {
                    acc += 0.5
                        * jet.g_inv[x][s]
                        * (jet.dg[m][s][n] + jet.dg[n][s][m] - jet.dg[s][m][n]);
                }
                out[x][m][n] = acc;
                out[x][n][m] = acc;
            }
        }
    }
    out
}

/// Partials of the Christoffel symbols from a jet carrying second partials.
/// `out[mu][x][m][n] = d_mu Gamma^x_{mn}`.
pub fn dchristoffel(jet: &MetricJet) -> Result<[Rank3; 4]> {
    let d2 = *jet.second_partials()?;
    let mut out = [[[[0.0; 4]; 4]; 4]; 4];
    for mu in 0..4 {
        let dginv = jet.dg_inv(mu);
        for x in 0..4 {
            for m in 0..4 {
                for n in m..4 {
                    let mut acc = 0.0;
                    for s in 0..4 {
                        acc += 0.5
                            * dginv[x][s]
                            * (jet.dg[m][s][n] + jet.dg[n][s][m] - jet.dg[s][m][n]);
                        acc += 0.5
                            * jet.g_inv[x][s]
                            * (d2[mu][m][s][n] + d2[mu][n][s][m] - d2[mu][s][m][n]);
                    }
                    out[mu][x][m][n] = acc;
                    out[mu][x][n][m] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Ricci tensor in the curvature convention where the exact family
/// satisfies `Ric(g) + Lambda g = 0`:
/// `R_{mn} = d_n Gamma^x_{mx} - d_x Gamma^x_{mn}
///          + Gamma^x_{ns} Gamma^s_{mx} - Gamma^x_{xs} Gamma^s_{mn}`.
///
/// This is the opposite contraction to the sphere-positive one; with it,
/// and with the symmetric gradient defined as `-1/2 Lie`, the gauge-fixed
/// operator `Ric + Lambda g - grad* Upsilon` is quasilinear hyperbolic.
pub fn ricci_from_connection(gamma: &Rank3, dgamma: &[Rank3; 4]) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            let mut acc = 0.0;
            for x in 0..4 {
                acc += dgamma[n][x][m][x] - dgamma[x][x][m][n];
                for s in 0..4 {
                    acc += gamma[x][n][s] * gamma[s][m][x] - gamma[x][x][s] * gamma[s][m][n];
                }
            }
            out[m][n] = acc;
        }
    }
    // The contraction is symmetric analytically; symmetrize the stencil noise.
    for m in 0..4 {
        for n in m + 1..4 {
            let v = 0.5 * (out[m][n] + out[n][m]);
            out[m][n] = v;
            out[n][m] = v;
        }
    }
    out
}

/// Ricci tensor of an exact family member at a point. Second metric
/// derivatives come from 4th-order central differences of the closed-form
/// Christoffels with the given `spacing`.
pub fn ricci(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    point: &SpacetimePoint,
    chart: Chart,
    spacing: f64,
) -> Result<Mat4> {
    let h = &profile.horizons;
    let (r, theta) = (point.r, point.theta);
    let margin = 2.0 * spacing;
    match chart {
        Chart::KerrStar => {
            if r - margin < h.r_inner_cap || r + margin > h.r_outer_cap {
                return Err(KdsError::StencilOutOfDomain(format!(
                    "r = {r} with spacing {spacing} leaves the extended interval"
                )));
            }
        }
        Chart::BoyerLindquist => {
            if r - margin <= h.r_event || r + margin >= h.r_cosmo {
                return Err(KdsError::StencilOutOfDomain(format!(
                    "r = {r} with spacing {spacing} leaves the horizon gap"
                )));
            }
        }
    }
    if theta - margin <= 0.0 || theta + margin >= std::f64::consts::PI {
        return Err(KdsError::StencilOutOfDomain(format!(
            "theta = {theta} with spacing {spacing} leaves (0, pi)"
        )));
    }

    let gamma_at = |rr: f64, tt: f64| christoffel(&metric_raw(params, profile, chart, rr, tt));
    let gamma = gamma_at(r, theta);
    let w = [1.0, -8.0, 8.0, -1.0];
    let off = [-2.0, -1.0, 1.0, 2.0];
    let denom = 12.0 * spacing;
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for (k, &o) in off.iter().enumerate() {
        let gr = gamma_at(r + o * spacing, theta);
        let gt = gamma_at(r, theta + o * spacing);
        for x in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    dgamma[1][x][m][n] += w[k] * gr[x][m][n] / denom;
                    dgamma[2][x][m][n] += w[k] * gt[x][m][n] / denom;
                }
            }
        }
    }
    Ok(ricci_from_connection(&gamma, &dgamma))
}

/// Max-norm of `Ric(g) + Lambda g` at a point; zero for exact solutions.
pub fn einstein_residual(
    params: &BlackHoleParams,
    profile: &ChartProfile,
    point: &SpacetimePoint,
    chart: Chart,
    spacing: f64,
) -> Result<f64> {
    let ric = ricci(params, profile, point, chart, spacing)?;
    let jet = metric_raw(params, profile, chart, point.r, point.theta);
    let mut worst: f64 = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            worst = worst.max((ric[m][n] + params.lambda() * jet.g[m][n]).abs());
        }
    }
    Ok(worst)
}

/// Vector field value and partials at a point: `(X, dX)` with
/// `dX[mu][a] = d_mu X^a`.
pub type VectorJet = ([f64; 4], [[f64; 4]; 4]);

/// `(Lie_X g)_{mn} = X^s d_s g_{mn} + g_{sn} d_m X^s + g_{ms} d_n X^s`.
pub fn lie_derivative_metric(x: &VectorJet, jet: &MetricJet) -> Mat4 {
    let (xv, dx) = x;
    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            let mut acc = 0.0;
            for s in 0..4 {
                acc += xv[s] * jet.dg[s][m][n] + jet.g[s][n] * dx[m][s] + jet.g[m][s] * dx[n][s];
            }
            out[m][n] = acc;
        }
    }
    out
}

/// Covariant derivative of a one-form: `del_b w_m = d_b w_m - Gamma^s_{bm} w_s`.
pub fn covariant_derivative_oneform(
    omega: &[f64; 4],
    domega: &[[f64; 4]; 4],
    gamma: &Rank3,
) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for b in 0..4 {
        for m in 0..4 {
            let mut acc = domega[b][m];
            for s in 0..4 {
                acc -= gamma[s][b][m] * omega[s];
            }
            out[b][m] = acc;
        }
    }
    out
}

/// Metric compatibility residual `max |del_x g_{mn}|`; vanishes for the
/// Levi-Civita connection.
pub fn compatibility_residual(jet: &MetricJet) -> f64 {
    let gamma = christoffel(jet);
    let mut worst: f64 = 0.0;
    for x in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                let mut acc = jet.dg[x][m][n];
                for s in 0..4 {
                    acc -= gamma[s][x][m] * jet.g[s][n] + gamma[s][x][n] * jet.g[m][s];
                }
                worst = worst.max(acc.abs());
            }
        }
    }
    worst
}
