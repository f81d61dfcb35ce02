//! Harmonic-gauge machinery: constraint one-form, trace reversal, symmetric
//! gradient, the gauge-fixed Einstein operator, its induced linearization,
//! the nonlinear remainder, constraint propagation, and the slice
//! projection.
//!
//! All operators here act pointwise on jets. Complex mode fields are
//! handled by the grid layer, which fills the `phi*` derivative slots of
//! the real and imaginary parts with the `i m` cross terms and calls these
//! functions twice.

use crate::curvature::{christoffel, dchristoffel, lie_derivative_metric, ricci_from_connection, Rank3};
use crate::error::{KdsError, Result};
use crate::linalg::{self, Mat4};
use crate::metric::MetricJet;

/// Symmetric 2-tensor value with first and optional second partials.
/// `dh[mu]` differentiates along coordinate `mu` of the point's chart.
#[derive(Debug, Clone)]
pub struct SymTensorJet {
    pub h: Mat4,
    pub dh: [Mat4; 4],
    pub d2h: Option<[[Mat4; 4]; 4]>,
}

impl SymTensorJet {
    pub fn zero() -> Self {
        Self {
            h: [[0.0; 4]; 4],
            dh: [[[0.0; 4]; 4]; 4],
            d2h: Some([[[[0.0; 4]; 4]; 4]; 4]),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = linalg::max_abs(&self.h);
        for mu in 0..4 {
            m = m.max(linalg::max_abs(&self.dh[mu]));
        }
        if let Some(d2) = &self.d2h {
            for row in d2 {
                for blk in row {
                    m = m.max(linalg::max_abs(blk));
                }
            }
        }
        m
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for a in 0..4 {
            for b in 0..4 {
                out.h[a][b] *= factor;
                for mu in 0..4 {
                    out.dh[mu][a][b] *= factor;
                }
            }
        }
        if let Some(d2) = &mut out.d2h {
            for mu in 0..4 {
                for nu in 0..4 {
                    for a in 0..4 {
                        for b in 0..4 {
                            d2[mu][nu][a][b] *= factor;
                        }
                    }
                }
            }
        }
        out
    }
}

/// One-form value with first and optional second partials.
#[derive(Debug, Clone)]
pub struct OneFormJet {
    pub w: [f64; 4],
    pub dw: [[f64; 4]; 4],
    pub d2w: Option<[[[f64; 4]; 4]; 4]>,
}

impl OneFormJet {
    pub fn zero() -> Self {
        Self {
            w: [0.0; 4],
            dw: [[0.0; 4]; 4],
            d2w: Some([[[0.0; 4]; 4]; 4]),
        }
    }
}

/// The metric perturbed by a symmetric tensor jet: `g = g0 + h`, with the
/// inverse recomputed numerically and second partials combined when both
/// sides carry them.
pub fn perturbed_metric(bg: &MetricJet, pert: &SymTensorJet, factor: f64) -> Result<MetricJet> {
    let mut g = bg.g;
    let mut dg = bg.dg;
    for a in 0..4 {
        for b in 0..4 {
            g[a][b] += factor * pert.h[a][b];
            for mu in 0..4 {
                dg[mu][a][b] += factor * pert.dh[mu][a][b];
            }
        }
    }
    let g_inv = linalg::invert(&g).ok_or(KdsError::SignatureLost { t_star: f64::NAN })?;
    let d2g = match (&bg.d2g, &pert.d2h) {
        (Some(b2), Some(p2)) => {
            let mut out = *b2;
            for mu in 0..4 {
                for nu in 0..4 {
                    for a in 0..4 {
                        for b in 0..4 {
                            out[mu][nu][a][b] += factor * p2[mu][nu][a][b];
                        }
                    }
                }
            }
            Some(out)
        }
        _ => None,
    };
    Ok(MetricJet {
        chart: bg.chart,
        g,
        g_inv,
        dg,
        d2g,
    })
}

/// Gauge constraint one-form
/// `Upsilon(g, g0)_m = g_{mx} g^{nl} (Gamma[g]^x_{nl} - Gamma[g0]^x_{nl})`.
pub fn constraint_op(g: &MetricJet, g0: &MetricJet) -> [f64; 4] {
    let gamma = christoffel(g);
    let gamma0 = christoffel(g0);
    contraction_oneform(g, &gamma, &gamma0)
}

fn contraction_oneform(g: &MetricJet, gamma: &Rank3, gamma0: &Rank3) -> [f64; 4] {
    let mut cupper = [0.0; 4];
    for x in 0..4 {
        let mut acc = 0.0;
        for n in 0..4 {
            for l in 0..4 {
                acc += g.g_inv[n][l] * (gamma[x][n][l] - gamma0[x][n][l]);
            }
        }
        cupper[x] = acc;
    }
    let mut out = [0.0; 4];
    for m in 0..4 {
        for x in 0..4 {
            out[m] += g.g[m][x] * cupper[x];
        }
    }
    out
}

/// Trace reversal `h_hat = h - 1/2 (tr_g h) g`.
pub fn trace_reversal(h: &Mat4, g: &MetricJet) -> Mat4 {
    let tr = trace(h, &g.g_inv);
    let mut out = *h;
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] -= 0.5 * tr * g.g[a][b];
        }
    }
    out
}

pub fn trace(h: &Mat4, g_inv: &Mat4) -> f64 {
    let mut tr = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            tr += g_inv[a][b] * h[a][b];
        }
    }
    tr
}

/// Raises a one-form jet to a vector jet: `X^a = g^{ab} w_b` with partials.
fn raise(omega: &OneFormJet, g: &MetricJet) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut x = [0.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            x[a] += g.g_inv[a][b] * omega.w[b];
        }
    }
    let mut dx = [[0.0; 4]; 4];
    for mu in 0..4 {
        let dginv = g.dg_inv(mu);
        for a in 0..4 {
            for b in 0..4 {
                dx[mu][a] += dginv[a][b] * omega.w[b] + g.g_inv[a][b] * omega.dw[mu][b];
            }
        }
    }
    (x, dx)
}

/// Symmetric gradient `grad* w = -1/2 Lie_{w_sharp} g`.
pub fn symmetric_gradient(omega: &OneFormJet, g: &MetricJet) -> Mat4 {
    let (x, dx) = raise(omega, g);
    let lie = lie_derivative_metric(&(x, dx), g);
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = -0.5 * lie[a][b];
        }
    }
    out
}

/// Linearized constraint: the directional derivative of `constraint_op` at
/// the background, which works out to `dUpsilon_g(h) = +div_g (trace
/// reversal of h)` with this crate's conventions. The sign is pinned by the
/// requirement that this agree with the epsilon-quotient of the nonlinear
/// constraint, which tests assert directly.
pub fn linearized_constraint(h: &SymTensorJet, g: &MetricJet) -> [f64; 4] {
    let gamma = christoffel(g);
    // Trace-reversed jet: hat = h - 1/2 (tr h) g, with first partials.
    let tr = trace(&h.h, &g.g_inv);
    let mut hat = h.h;
    for a in 0..4 {
        for b in 0..4 {
            hat[a][b] -= 0.5 * tr * g.g[a][b];
        }
    }
    let mut dhat = h.dh;
    for mu in 0..4 {
        let dginv = g.dg_inv(mu);
        let dtr = trace(&h.dh[mu], &g.g_inv) + trace(&h.h, &dginv);
        for a in 0..4 {
            for b in 0..4 {
                dhat[mu][a][b] -= 0.5 * (dtr * g.g[a][b] + tr * g.dg[mu][a][b]);
            }
        }
    }
    // (div hat)_m = g^{nl} del_l hat_{nm}.
    let mut out = [0.0; 4];
    for m in 0..4 {
        let mut acc = 0.0;
        for n in 0..4 {
            for l in 0..4 {
                let mut cov = dhat[l][n][m];
                for s in 0..4 {
                    cov -= gamma[s][l][n] * hat[s][m] + gamma[s][l][m] * hat[n][s];
                }
                acc += g.g_inv[n][l] * cov;
            }
        }
        out[m] = acc;
    }
    out
}

/// Precomputed Levi-Civita connection and its partials for a fixed jet.
#[derive(Debug, Clone)]
pub struct ConnectionCache {
    pub gamma: Rank3,
    pub dgamma: [Rank3; 4],
}

impl ConnectionCache {
    pub fn of(jet: &MetricJet) -> Result<Self> {
        Ok(Self {
            gamma: christoffel(jet),
            dgamma: dchristoffel(jet)?,
        })
    }
}

/// The gauge-fixed Einstein operator
/// `E(g) = Ric(g) + Lambda g - grad*_g Upsilon(g, g0)`.
///
/// Both jets must carry second partials. With the curvature convention of
/// this crate the operator is quasilinear hyperbolic: every second
/// derivative enters through `+1/2 g^{ab} d_a d_b g_{mn}`.
pub fn gauge_fixed_einstein(g: &MetricJet, g0: &MetricJet, lambda: f64) -> Result<Mat4> {
    let conn0 = ConnectionCache::of(g0)?;
    gauge_fixed_einstein_cached(g, &conn0, lambda)
}

/// Same operator with the reference connection supplied, for per-step
/// evaluation against a fixed background. Only the connection of the
/// reference metric enters the constraint, so the cache is all that is
/// needed of `g0`.
pub fn gauge_fixed_einstein_cached(
    g: &MetricJet,
    conn0: &ConnectionCache,
    lambda: f64,
) -> Result<Mat4> {
    let gamma = christoffel(g);
    let dgamma = dchristoffel(g)?;
    let gamma0 = &conn0.gamma;
    let dgamma0 = &conn0.dgamma;
    let ric = ricci_from_connection(&gamma, &dgamma);

    // Upsilon and its coordinate partials.
    let upsilon = contraction_oneform(g, &gamma, &gamma0);
    let mut cupper = [0.0; 4];
    for x in 0..4 {
        for n in 0..4 {
            for l in 0..4 {
                cupper[x] += g.g_inv[n][l] * (gamma[x][n][l] - gamma0[x][n][l]);
            }
        }
    }
    let mut dups = [[0.0; 4]; 4];
    for mu in 0..4 {
        let dginv = g.dg_inv(mu);
        let mut dcup = [0.0; 4];
        for x in 0..4 {
            for n in 0..4 {
                for l in 0..4 {
                    dcup[x] += dginv[n][l] * (gamma[x][n][l] - gamma0[x][n][l])
                        + g.g_inv[n][l] * (dgamma[mu][x][n][l] - dgamma0[mu][x][n][l]);
                }
            }
        }
        for m in 0..4 {
            for x in 0..4 {
                dups[mu][m] += g.dg[mu][m][x] * cupper[x] + g.g[m][x] * dcup[x];
            }
        }
    }
    // grad* Upsilon = -sym(cov derivative) of the one-form.
    let mut grad_star = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            let mut cov_mn = dups[m][n];
            let mut cov_nm = dups[n][m];
            for s in 0..4 {
                cov_mn -= gamma[s][m][n] * upsilon[s];
                cov_nm -= gamma[s][n][m] * upsilon[s];
            }
            grad_star[m][n] = -0.5 * (cov_mn + cov_nm);
        }
    }

    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            out[m][n] = ric[m][n] + lambda * g.g[m][n] - grad_star[m][n];
        }
    }
    Ok(out)
}

/// Central directional derivative of the gauge-fixed operator at the
/// background: the induced gauged linearized Einstein operator. The step is
/// chosen from the machine epsilon and the jet scale, then validated by a
/// two-step Richardson consistency check.
pub fn linearized_einstein(h: &SymTensorJet, bg: &MetricJet, lambda: f64) -> Result<Mat4> {
    let scale = h.max_abs();
    if scale == 0.0 {
        return Ok([[0.0; 4]; 4]);
    }
    let eps0 = f64::EPSILON.cbrt() / scale;
    let diff = |eps: f64| -> Result<Mat4> {
        let gp = perturbed_metric(bg, h, eps)?;
        let gm = perturbed_metric(bg, h, -eps)?;
        let ep = gauge_fixed_einstein(&gp, bg, lambda)?;
        let em = gauge_fixed_einstein(&gm, bg, lambda)?;
        let mut out = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                out[a][b] = (ep[a][b] - em[a][b]) / (2.0 * eps);
            }
        }
        Ok(out)
    };
    let d1 = diff(eps0)?;
    let d2 = diff(0.5 * eps0)?;
    // Richardson: central differences are O(eps^2), so the extrapolant
    // (4 d2 - d1)/3 cancels the leading error; the difference between the
    // two steps bounds it.
    let mut out = [[0.0; 4]; 4];
    let mut err: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = (4.0 * d2[a][b] - d1[a][b]) / 3.0;
            err = err.max((d2[a][b] - d1[a][b]).abs());
            mag = mag.max(out[a][b].abs());
        }
    }
    if !mag.is_finite() || (mag > 0.0 && err > 1e-3 * mag.max(scale)) {
        return Err(KdsError::EpsilonUnderflow { scale });
    }
    Ok(out)
}

/// Nonlinear remainder `N(h) = L h - (E(g0 + h) - E(g0))`; vanishes
/// identically at `h = 0` and quadratically near it, and solutions of the
/// gauge-fixed system satisfy `L h = N(h)`.
pub fn nonlinearity_eval(h: &SymTensorJet, bg: &MetricJet, lambda: f64) -> Result<Mat4> {
    let lh = linearized_einstein(h, bg, lambda)?;
    if h.max_abs() == 0.0 {
        return Ok([[0.0; 4]; 4]);
    }
    let g = perturbed_metric(bg, h, 1.0)?;
    let e_full = gauge_fixed_einstein(&g, bg, lambda)?;
    let e_base = gauge_fixed_einstein(bg, bg, lambda)?;
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = lh[a][b] - (e_full[a][b] - e_base[a][b]);
        }
    }
    Ok(out)
}

/// Constraint propagation operator, divergence realization:
/// `-2 div_g (trace reversal of grad* psi)`.
pub fn constraint_propagation_div(psi: &OneFormJet, g: &MetricJet) -> Result<[f64; 4]> {
    let d2w = psi
        .d2w
        .as_ref()
        .ok_or_else(|| KdsError::StencilOutOfDomain("one-form second partials missing".into()))?;
    let d2g = *g.second_partials()?;

    // X = psi^sharp with two partials.
    let (x, dx) = raise(psi, g);
    let mut dginv = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        dginv[mu] = g.dg_inv(mu);
    }
    // d2(g_inv)[m][n] = -d(g_inv)[n] dg[m] g_inv - g_inv d2g[n][m] g_inv
    //                   - g_inv dg[m] d(g_inv)[n].
    let mut d2x = [[[0.0; 4]; 4]; 4];
    for m in 0..4 {
        for n in 0..4 {
            let mut d2ginv = [[0.0; 4]; 4];
            for a in 0..4 {
                for b in 0..4 {
                    let mut acc = 0.0;
                    for i in 0..4 {
                        for j in 0..4 {
                            acc -= dginv[n][a][i] * g.dg[m][i][j] * g.g_inv[j][b]
                                + g.g_inv[a][i] * d2g[n][m][i][j] * g.g_inv[j][b]
                                + g.g_inv[a][i] * g.dg[m][i][j] * dginv[n][j][b];
                        }
                    }
                    d2ginv[a][b] = acc;
                }
            }
            for a in 0..4 {
                for b in 0..4 {
                    d2x[m][n][a] += d2ginv[a][b] * psi.w[b]
                        + dginv[n][a][b] * psi.dw[m][b]
                        + dginv[m][a][b] * psi.dw[n][b]
                        + g.g_inv[a][b] * d2w[m][n][b];
                }
            }
        }
    }

    // u = grad* psi = -1/2 Lie_X g with first partials.
    let mut u = [[0.0; 4]; 4];
    let mut du = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut acc = 0.0;
            for s in 0..4 {
                acc += x[s] * g.dg[s][a][b] + g.g[s][b] * dx[a][s] + g.g[a][s] * dx[b][s];
            }
            u[a][b] = -0.5 * acc;
        }
    }
    for l in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for s in 0..4 {
                    acc += dx[l][s] * g.dg[s][a][b]
                        + x[s] * d2g[l][s][a][b]
                        + g.dg[l][s][b] * dx[a][s]
                        + g.g[s][b] * d2x[l][a][s]
                        + g.dg[l][a][s] * dx[b][s]
                        + g.g[a][s] * d2x[l][b][s];
                }
                du[l][a][b] = -0.5 * acc;
            }
        }
    }

    // Trace reversal of u with first partials.
    let tr = trace(&u, &g.g_inv);
    let mut hat = u;
    for a in 0..4 {
        for b in 0..4 {
            hat[a][b] -= 0.5 * tr * g.g[a][b];
        }
    }
    let mut dhat = du;
    for mu in 0..4 {
        let dtr = trace(&du[mu], &g.g_inv) + trace(&u, &dginv[mu]);
        for a in 0..4 {
            for b in 0..4 {
                dhat[mu][a][b] -= 0.5 * (dtr * g.g[a][b] + tr * g.dg[mu][a][b]);
            }
        }
    }

    let gamma = christoffel(g);
    let mut out = [0.0; 4];
    for m in 0..4 {
        let mut acc = 0.0;
        for n in 0..4 {
            for l in 0..4 {
                let mut cov = dhat[l][n][m];
                for s in 0..4 {
                    cov -= gamma[s][l][n] * hat[s][m] + gamma[s][l][m] * hat[n][s];
                }
                acc += g.g_inv[n][l] * cov;
            }
        }
        out[m] = -2.0 * acc;
    }
    Ok(out)
}

/// Constraint propagation operator, wave realization:
/// `box psi - Ric(g)(psi, .)` with this crate's curvature convention.
pub fn constraint_propagation_wave(psi: &OneFormJet, g: &MetricJet) -> Result<[f64; 4]> {
    let d2w = psi
        .d2w
        .as_ref()
        .ok_or_else(|| KdsError::StencilOutOfDomain("one-form second partials missing".into()))?;
    let gamma = christoffel(g);
    let dgamma = dchristoffel(g)?;
    let ric = ricci_from_connection(&gamma, &dgamma);

    // A_{bm} = del_b psi_m.
    let mut a_cov = [[0.0; 4]; 4];
    for b in 0..4 {
        for m in 0..4 {
            let mut acc = psi.dw[b][m];
            for s in 0..4 {
                acc -= gamma[s][b][m] * psi.w[s];
            }
            a_cov[b][m] = acc;
        }
    }
    let mut out = [0.0; 4];
    for m in 0..4 {
        // box psi_m = g^{ab} del_a A_{bm}.
        let mut boxed = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut d_a = d2w[a][b][m];
                for s in 0..4 {
                    d_a -= dgamma[a][s][b][m] * psi.w[s] + gamma[s][b][m] * psi.dw[a][s];
                }
                let mut cov = d_a;
                for s in 0..4 {
                    cov -= gamma[s][a][b] * a_cov[s][m] + gamma[s][a][m] * a_cov[b][s];
                }
                boxed += g.g_inv[a][b] * cov;
            }
        }
        let mut ric_term = 0.0;
        for n in 0..4 {
            for s in 0..4 {
                ric_term += g.g_inv[n][s] * ric[m][s] * psi.w[n];
            }
        }
        out[m] = boxed - ric_term;
    }
    Ok(out)
}

/// Pointwise slice gauge projection: returns the time derivatives of the
/// `t*` row that annihilate the linearized constraint, given the rest of
/// the jet. The 4x4 linear map is probed numerically from
/// `linearized_constraint`, so any index-ordering ambiguity resolves itself.
pub fn project_point(h: &SymTensorJet, bg: &MetricJet) -> Result<[f64; 4]> {
    if bg.g_inv[0][0].abs() < 1e-8 {
        return Err(KdsError::DegenerateLapse {
            value: bg.g_inv[0][0],
        });
    }
    let eval = |x: &[f64; 4]| -> [f64; 4] {
        let mut jet = h.clone();
        for nu in 0..4 {
            jet.dh[0][0][nu] = x[nu];
            jet.dh[0][nu][0] = x[nu];
        }
        linearized_constraint(&jet, bg)
    };
    let base = eval(&[0.0; 4]);
    let mut a = [[0.0; 4]; 4];
    for nu in 0..4 {
        let mut unit = [0.0; 4];
        unit[nu] = 1.0;
        let col = eval(&unit);
        for m in 0..4 {
            a[m][nu] = col[m] - base[m];
        }
    }
    let rhs = [-base[0], -base[1], -base[2], -base[3]];
    linalg::solve4(&a, &rhs).ok_or(KdsError::DegenerateLapse {
        value: bg.g_inv[0][0],
    })
}
