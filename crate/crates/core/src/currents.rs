//! Multiplier currents and energy bookkeeping.
//!
//! Pointwise: the energy-momentum tensor of a multi-component complex
//! field, the `J`/`K` currents of a multiplier `(X, q)`, and deformation
//! tensors. Gridwise: slice energies with the induced measure, cap fluxes,
//! the discrete divergence-identity residual of an evolution run, and the
//! Gronwall-type bound check.
//!
//! Densities are integrated in the form `P^mu = sqrt(-det g) J^mu`, so the
//! discrete balance is the flux theorem for `d_mu P^mu` with no leftover
//! volume factors; the polar boundary terms vanish with `sin(theta)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chart::ChartProfile;
use crate::curvature::{christoffel, VectorJet};
use crate::error::{KdsError, Result};
use crate::evolution::StateVector;
use crate::grid::{pairwise_sum, Grid2D, PolarStencil, RadialStencil};
use crate::linalg::Mat4;
use crate::metric::{kerr_star_raw, Chart, MetricJet, SpacetimePoint};
use crate::params::BlackHoleParams;
use crate::vectorfield::Vectorfield;

/// One field component with its coordinate derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct CompJet {
    pub h: Complex64,
    pub dh: [Complex64; 4],
}

/// Lagrangian corrector value with the derivatives the currents need.
#[derive(Debug, Clone, Copy)]
pub struct QJet {
    pub q: f64,
    pub dq: [f64; 4],
    pub box_q: f64,
}

impl QJet {
    pub const ZERO: QJet = QJet {
        q: 0.0,
        dq: [0.0; 4],
        box_q: 0.0,
    };

    pub const ONE: QJet = QJet {
        q: 1.0,
        dq: [0.0; 4],
        box_q: 0.0,
    };
}

/// A multiplier: vector field plus Lagrangian corrector.
pub struct Multiplier {
    pub field: Vectorfield,
    pub q: QJet,
}

impl Multiplier {
    pub fn killing_t() -> Self {
        Self {
            field: Vectorfield::killing_t(),
            q: QJet::ZERO,
        }
    }
}

/// `T_mn[h] = Re( d_(m conj(h) . d_n) h ) - 1/2 g_mn Re( d_a conj(h) . d^a h )`.
pub fn energy_momentum_tensor(comps: &[CompJet], g: &MetricJet) -> Mat4 {
    let mut grad2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if g.g_inv[a][b] == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            for c in comps {
                dot += (c.dh[a].conj() * c.dh[b]).re;
            }
            grad2 += g.g_inv[a][b] * dot;
        }
    }
    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in m..4 {
            let mut sym = 0.0;
            for c in comps {
                sym += 0.5 * ((c.dh[m].conj() * c.dh[n]).re + (c.dh[n].conj() * c.dh[m]).re);
            }
            let val = sym - 0.5 * g.g[m][n] * grad2;
            out[m][n] = val;
            out[n][m] = val;
        }
    }
    out
}

/// `J^{X,q}_m[h] = X^n T_mn + q/2 d_m |h|^2 - 1/2 d_m q |h|^2`.
pub fn j_current(x: &[f64; 4], q: &QJet, comps: &[CompJet], g: &MetricJet) -> [f64; 4] {
    let emt = energy_momentum_tensor(comps, g);
    let mut h2 = 0.0;
    let mut dh2 = [0.0; 4];
    for c in comps {
        h2 += c.h.norm_sqr();
        for m in 0..4 {
            dh2[m] += 2.0 * (c.h.conj() * c.dh[m]).re;
        }
    }
    let mut out = [0.0; 4];
    for m in 0..4 {
        let mut acc = 0.0;
        for n in 0..4 {
            acc += x[n] * emt[m][n];
        }
        out[m] = acc + 0.5 * q.q * dh2[m] - 0.5 * q.dq[m] * h2;
    }
    out
}

/// `K^{X,q}[h] = pi^X . T[h] + q d^a h . d_a conj(h) - 1/2 box(q) |h|^2`,
/// the deformation tensor contracted with both indices raised.
pub fn k_current(pi_lower: &Mat4, q: &QJet, comps: &[CompJet], g: &MetricJet) -> f64 {
    let emt = energy_momentum_tensor(comps, g);
    let mut pi_dot_t = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            let mut pi_up = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    pi_up += g.g_inv[m][a] * g.g_inv[n][b] * pi_lower[a][b];
                }
            }
            pi_dot_t += pi_up * emt[m][n];
        }
    }
    let mut grad2 = 0.0;
    let mut h2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            if g.g_inv[a][b] == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            for c in comps {
                dot += (c.dh[a].conj() * c.dh[b]).re;
            }
            grad2 += g.g_inv[a][b] * dot;
        }
    }
    for c in comps {
        h2 += c.h.norm_sqr();
    }
    pi_dot_t + q.q * grad2 - 0.5 * q.box_q * h2
}

/// Deformation tensor `pi^X_mn = 1/2 (del_m X_n + del_n X_m)`, equal to
/// half the Lie derivative of the metric along `X`.
pub fn deformation_tensor(x: &VectorJet, g: &MetricJet) -> Mat4 {
    let (xv, dx) = x;
    let gamma = christoffel(g);
    // Lower the index with derivatives: X_n = g_ns X^s.
    let mut x_low = [0.0; 4];
    let mut dx_low = [[0.0; 4]; 4];
    for n in 0..4 {
        for s in 0..4 {
            x_low[n] += g.g[n][s] * xv[s];
        }
        for m in 0..4 {
            for s in 0..4 {
                dx_low[m][n] += g.dg[m][n][s] * xv[s] + g.g[n][s] * dx[m][s];
            }
        }
    }
    let mut out = [[0.0; 4]; 4];
    for m in 0..4 {
        for n in m..4 {
            let mut cov_mn = dx_low[m][n];
            let mut cov_nm = dx_low[n][m];
            for s in 0..4 {
                cov_mn -= gamma[s][m][n] * x_low[s];
                cov_nm -= gamma[s][n][m] * x_low[s];
            }
            let val = 0.5 * (cov_mn + cov_nm);
            out[m][n] = val;
            out[n][m] = val;
        }
    }
    out
}

/// Builds the redshift multiplier and verifies uniform timelikeness on the
/// extended grid. Returns the multiplier and the measured margin
/// `delta = -max g(N, N) > 0`.
pub fn redshift_multiplier_build(
    params: &BlackHoleParams,
    profile: &ChartProfile,
) -> Result<(Multiplier, f64)> {
    let field = Vectorfield::redshift(params, profile);
    let h = &profile.horizons;
    let mut max_g = f64::NEG_INFINITY;
    for k in 0..193 {
        let r = h.r_inner_cap + (h.r_outer_cap - h.r_inner_cap) * k as f64 / 192.0;
        for j in 0..24 {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / 24.0;
            let pt = SpacetimePoint::kerr_star(r, theta);
            let (g, _, _, _) = kerr_star_raw(profile, r, theta);
            let (x, _) = field.eval(&pt);
            let mut norm = 0.0;
            for m in 0..4 {
                for n in 0..4 {
                    norm += g[m][n] * x[m] * x[n];
                }
            }
            max_g = max_g.max(norm);
        }
    }
    if max_g >= 0.0 {
        return Err(KdsError::TimelikenessLost { max_g });
    }
    Ok((
        Multiplier {
            field,
            q: QJet::ZERO,
        },
        -max_g,
    ))
}

/// Per-node geometry and multiplier data for fast current evaluation on a
/// grid.
pub struct MultiplierCache {
    pub grid: Grid2D,
    /// g, g_inv, dg per node (the jet), shared geometry.
    jets: Vec<MetricJet>,
    pub sqrt_g: Vec<f64>,
    /// multiplier components per node.
    x: Vec<[f64; 4]>,
    /// lowered deformation tensor per node.
    pi: Vec<Mat4>,
    pub q: QJet,
}

impl MultiplierCache {
    pub fn build(profile: &ChartProfile, grid: &Grid2D, mult: &Multiplier) -> Self {
        let n = grid.len();
        let mut jets = Vec::with_capacity(n);
        let mut sqrt_g = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        let mut pi = Vec::with_capacity(n);
        for j in 0..grid.n_theta {
            let theta = grid.theta(j);
            for i in 0..grid.n_r {
                let r = grid.r(i);
                let (g, dg, g_inv, _) = kerr_star_raw(profile, r, theta);
                let jet = MetricJet {
                    chart: Chart::KerrStar,
                    g,
                    g_inv,
                    dg,
                    d2g: None,
                };
                let det = crate::linalg::determinant(&g);
                sqrt_g.push((-det).max(0.0).sqrt());
                let pt = SpacetimePoint::kerr_star(r, theta);
                let xjet = mult.field.eval(&pt);
                pi.push(deformation_tensor(&xjet, &jet));
                x.push(xjet.0);
                jets.push(jet);
            }
        }
        Self {
            grid: *grid,
            jets,
            sqrt_g,
            x,
            pi,
            q: mult.q,
        }
    }

    pub fn jet(&self, k: usize) -> &MetricJet {
        &self.jets[k]
    }

    pub fn x(&self, k: usize) -> &[f64; 4] {
        &self.x[k]
    }

    pub fn pi(&self, k: usize) -> &Mat4 {
        &self.pi[k]
    }
}

/// Component jets of a state at every node: value, time derivative from
/// the companion, spatial derivatives by stencils, azimuthal by `i m`.
pub struct StateJets {
    pub n_comps: usize,
    pub complex_pairs: bool,
    pub mode_m: i32,
    values: Vec<Complex64>,
    derivs: Vec<[Complex64; 4]>,
}

impl StateJets {
    pub fn build(state: &StateVector, grid: &Grid2D) -> Self {
        let st_r = RadialStencil::build(grid.n_r, grid.spacing_r, 1);
        let st_t = PolarStencil::build(grid.spacing_theta, 1);
        let complex_pairs = state.u.n_planes() == 2;
        let n_comps = if complex_pairs { 1 } else { state.u.n_planes() };
        let n = grid.len();
        let mut values = vec![Complex64::default(); n_comps * n];
        let mut derivs = vec![[Complex64::default(); 4]; n_comps * n];

        if complex_pairs {
            let ur = &state.u.planes[0];
            let ui = &state.u.planes[1];
            let parity = state.u.parities[0];
            let ur_r = ur.deriv_r(&st_r);
            let ui_r = ui.deriv_r(&st_r);
            let ur_t = ur.deriv_theta(&st_t, parity);
            let ui_t = ui.deriv_theta(&st_t, parity);
            let m = grid.mode_m as f64;
            for k in 0..n {
                let h = Complex64::new(ur.data[k], ui.data[k]);
                values[k] = h;
                derivs[k] = [
                    Complex64::new(state.v.planes[0].data[k], state.v.planes[1].data[k]),
                    Complex64::new(ur_r.data[k], ui_r.data[k]),
                    Complex64::new(ur_t.data[k], ui_t.data[k]),
                    Complex64::new(0.0, m) * h,
                ];
            }
        } else {
            for (c, plane) in state.u.planes.iter().enumerate() {
                let parity = state.u.parities[c];
                let p_r = plane.deriv_r(&st_r);
                let p_t = plane.deriv_theta(&st_t, parity);
                for k in 0..n {
                    values[c * n + k] = Complex64::new(plane.data[k], 0.0);
                    derivs[c * n + k] = [
                        Complex64::new(state.v.planes[c].data[k], 0.0),
                        Complex64::new(p_r.data[k], 0.0),
                        Complex64::new(p_t.data[k], 0.0),
                        Complex64::default(),
                    ];
                }
            }
        }
        Self {
            n_comps,
            complex_pairs,
            mode_m: grid.mode_m,
            values,
            derivs,
        }
    }

    pub fn comps_at(&self, k: usize, n_nodes: usize) -> Vec<CompJet> {
        (0..self.n_comps)
            .map(|c| CompJet {
                h: self.values[c * n_nodes + k],
                dh: self.derivs[c * n_nodes + k],
            })
            .collect()
    }
}

/// Slice energy `E = int_Sigma J . n dmu = -int J^t sqrt(-g) d^3x`,
/// nonnegative for verified timelike multipliers.
pub fn slice_energy(cache: &MultiplierCache, state: &StateVector) -> f64 {
    let grid = &cache.grid;
    let n = grid.len();
    let jets = StateJets::build(state, grid);
    let mut rows = Vec::with_capacity(grid.n_theta);
    for j in 0..grid.n_theta {
        let mut row = Vec::with_capacity(grid.n_r);
        for i in 0..grid.n_r {
            let k = grid.idx(i, j);
            let comps = jets.comps_at(k, n);
            let jc = j_current(cache.x(k), &cache.q, &comps, cache.jet(k));
            let mut j_up_t = 0.0;
            for m in 0..4 {
                j_up_t += cache.jet(k).g_inv[0][m] * jc[m];
            }
            // trapezoid weight in r
            let w_r = if i == 0 || i == grid.n_r - 1 { 0.5 } else { 1.0 };
            row.push(-j_up_t * cache.sqrt_g[k] * w_r);
        }
        rows.push(pairwise_sum(&row));
    }
    pairwise_sum(&rows) * grid.spacing_r * grid.spacing_theta * 2.0 * std::f64::consts::PI
}

/// Instantaneous cap flux densities: `(inner, outer)` integrals of
/// `sqrt(-g) J^r` over the cap spheres.
pub fn cap_fluxes(cache: &MultiplierCache, state: &StateVector) -> (f64, f64) {
    let grid = &cache.grid;
    let n = grid.len();
    let jets = StateJets::build(state, grid);
    let mut inner = Vec::with_capacity(grid.n_theta);
    let mut outer = Vec::with_capacity(grid.n_theta);
    for j in 0..grid.n_theta {
        for (i, acc) in [(0usize, &mut inner), (grid.n_r - 1, &mut outer)] {
            let k = grid.idx(i, j);
            let comps = jets.comps_at(k, n);
            let jc = j_current(cache.x(k), &cache.q, &comps, cache.jet(k));
            let mut j_up_r = 0.0;
            for m in 0..4 {
                j_up_r += cache.jet(k).g_inv[1][m] * jc[m];
            }
            acc.push(j_up_r * cache.sqrt_g[k]);
        }
    }
    let scale = grid.spacing_theta * 2.0 * std::f64::consts::PI;
    (pairwise_sum(&inner) * scale, pairwise_sum(&outer) * scale)
}

/// Instantaneous bulk integrand: `int sqrt(-g) (K + Re[(X h + q h)conj . f])`.
/// `forcing` supplies the complex forcing value per node, or `None` for
/// free evolution.
pub fn bulk_rate(
    cache: &MultiplierCache,
    state: &StateVector,
    forcing: Option<&dyn Fn(usize) -> Complex64>,
) -> f64 {
    let grid = &cache.grid;
    let n = grid.len();
    let jets = StateJets::build(state, grid);
    let mut rows = Vec::with_capacity(grid.n_theta);
    for j in 0..grid.n_theta {
        let mut row = Vec::with_capacity(grid.n_r);
        for i in 0..grid.n_r {
            let k = grid.idx(i, j);
            let comps = jets.comps_at(k, n);
            let mut integrand = k_current(cache.pi(k), &cache.q, &comps, cache.jet(k));
            if let Some(f) = forcing {
                let fv = f(k);
                // Re[(X conj(h) + q conj(h)) . f] for the scalar case.
                let c = &comps[0];
                let mut xh = Complex64::default();
                for m in 0..4 {
                    xh += cache.x(k)[m] * c.dh[m].conj();
                }
                xh += cache.q.q * c.h.conj();
                integrand += (xh * fv).re;
            }
            let w_r = if i == 0 || i == grid.n_r - 1 { 0.5 } else { 1.0 };
            row.push(integrand * cache.sqrt_g[k] * w_r);
        }
        rows.push(pairwise_sum(&row));
    }
    pairwise_sum(&rows) * grid.spacing_r * grid.spacing_theta * 2.0 * std::f64::consts::PI
}

/// Energy report rows for the emitted CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t_star: f64,
    pub e_t: f64,
    pub e_n: f64,
    pub flux_inner: f64,
    pub flux_outer: f64,
    pub bulk_k: f64,
    pub identity_residual: f64,
}

/// Per-step series recorded during a run for the divergence identity.
#[derive(Debug, Clone, Default)]
pub struct DivergenceSeries {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub flux_inner: Vec<f64>,
    pub flux_outer: Vec<f64>,
    pub bulk: Vec<f64>,
}

impl DivergenceSeries {
    pub fn record(&mut self, t: f64, energy: f64, fluxes: (f64, f64), bulk: f64) {
        self.times.push(t);
        self.energy.push(energy);
        self.flux_inner.push(fluxes.0);
        self.flux_outer.push(fluxes.1);
        self.bulk.push(bulk);
    }
}

/// Composite quadrature of a uniformly sampled series: Simpson 1/3 pairs
/// with a 3/8 tail when the panel count is odd, O(dt^4).
pub fn integrate_series(dt: f64, f: &[f64]) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * dt * (f[0] + f[1]);
    }
    if n == 3 {
        return dt / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
    }
    let panels = n - 1;
    if panels % 2 == 0 {
        let mut acc = f[0] + f[n - 1];
        for (idx, &v) in f.iter().enumerate().take(n - 1).skip(1) {
            acc += if idx % 2 == 1 { 4.0 * v } else { 2.0 * v };
        }
        dt / 3.0 * acc
    } else {
        // Simpson over the first n-4 panels (even count), 3/8 on the last 3.
        let head = integrate_series(dt, &f[..n - 3]);
        let tail = 3.0 * dt / 8.0 * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]);
        head + tail
    }
}

/// Divergence-identity residual over `[t1, t2]` (the whole recorded
/// window): `|E(t1) - E(t2) + Flux_out - Flux_in - Bulk| / E(t1)`.
pub fn divergence_residual(series: &DivergenceSeries) -> Result<f64> {
    let n = series.times.len();
    if n < 3 {
        return Err(KdsError::Config(
            "need at least three recorded steps for the balance".into(),
        ));
    }
    let dt = series.times[1] - series.times[0];
    let e1 = series.energy[0];
    let e2 = series.energy[n - 1];
    let flux_in = integrate_series(dt, &series.flux_inner);
    let flux_out = integrate_series(dt, &series.flux_outer);
    let bulk = integrate_series(dt, &series.bulk);
    let resid = (e1 - e2 + flux_out - flux_in - bulk).abs();
    Ok(resid / e1.abs().max(1e-300))
}

/// One run's data for the Gronwall check.
#[derive(Debug, Clone)]
pub struct GronwallRun {
    pub times: Vec<f64>,
    /// slice-pair Sobolev norm of the solution at each time.
    pub h1_norms: Vec<f64>,
    /// forcing L2 norm at each time (zeros for free runs).
    pub forcing_l2: Vec<f64>,
    /// norm of the initial data pair.
    pub data_norm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallReport {
    /// smallest admissible constant per run; `None` is the 0/0 sentinel
    /// for identically zero runs.
    pub constants: Vec<Option<f64>>,
    /// true when constants degrade by more than 2x between any two runs.
    pub degraded: bool,
}

/// Smallest `C` with `sup e^{-sigma t} ||h||_{H1} <= C (||data|| +
/// int e^{-sigma s} ||f|| ds)` over each run.
pub fn gronwall_bound_check(runs: &[GronwallRun], sigma: f64) -> GronwallReport {
    let mut constants = Vec::with_capacity(runs.len());
    for run in runs {
        let mut c_run: Option<f64> = None;
        let mut forcing_integral = 0.0;
        for i in 0..run.times.len() {
            if i > 0 {
                let dt = run.times[i] - run.times[i - 1];
                forcing_integral += 0.5
                    * dt
                    * ((-sigma * run.times[i - 1]).exp() * run.forcing_l2[i - 1]
                        + (-sigma * run.times[i]).exp() * run.forcing_l2[i]);
            }
            let lhs = (-sigma * run.times[i]).exp() * run.h1_norms[i];
            let rhs = run.data_norm + forcing_integral;
            if rhs > 0.0 {
                let c = lhs / rhs;
                c_run = Some(c_run.map_or(c, |prev: f64| prev.max(c)));
            } else if lhs > 0.0 {
                c_run = Some(f64::INFINITY);
            }
        }
        constants.push(c_run);
    }
    let finite: Vec<f64> = constants.iter().flatten().copied().collect();
    let degraded = finite
        .windows(2)
        .any(|w| w[1] > 2.0 * w[0] || w[0] > 2.0 * w[1]);
    GronwallReport {
        constants,
        degraded,
    }
}
