//! Scalar wave evolution: `box_g u = f` for a single azimuthal mode on any
//! slowly-rotating member of the family.
//!
//! The stationary background enters only through per-node coefficient
//! arrays, built once: the seven nonvanishing inverse-metric components and
//! the four contractions `W^s = g^{ab} Gamma^s_{ab}`. Each right-hand-side
//! evaluation is then derivative sweeps plus a pointwise combine, row
//! parallel.

use crate::chart::ChartProfile;
use crate::error::{KdsError, Result};
use crate::grid::{scalar_parities, Field2D, FieldSet, Grid2D, PolarStencil, RadialStencil};
use crate::metric::{kerr_star_raw, MetricJet, Chart};
use crate::curvature::christoffel;
use crate::par;

use super::{StateVector, WaveRhs};

/// Per-node wave-operator coefficients on the grid.
pub struct ScalarWaveCache {
    pub grid: Grid2D,
    pub inv_gtt: Vec<f64>,
    pub gtr: Vec<f64>,
    pub gtph: Vec<f64>,
    pub grr: Vec<f64>,
    pub gthth: Vec<f64>,
    pub gphph: Vec<f64>,
    pub grph: Vec<f64>,
    pub w_t: Vec<f64>,
    pub w_r: Vec<f64>,
    pub w_th: Vec<f64>,
    pub w_ph: Vec<f64>,
    /// `sqrt(-det g)` per node, for integrals and flux densities.
    pub sqrt_g: Vec<f64>,
}

impl ScalarWaveCache {
    pub fn build(profile: &ChartProfile, grid: &Grid2D) -> Self {
        let n = grid.len();
        let mut cache = Self {
            grid: *grid,
            inv_gtt: vec![0.0; n],
            gtr: vec![0.0; n],
            gtph: vec![0.0; n],
            grr: vec![0.0; n],
            gthth: vec![0.0; n],
            gphph: vec![0.0; n],
            grph: vec![0.0; n],
            w_t: vec![0.0; n],
            w_r: vec![0.0; n],
            w_th: vec![0.0; n],
            w_ph: vec![0.0; n],
            sqrt_g: vec![0.0; n],
        };
        let rows: Vec<Vec<[f64; 12]>> = par::map_rows_collect(grid.n_theta, |j| {
            let theta = grid.theta(j);
            (0..grid.n_r)
                .map(|i| {
                    let r = grid.r(i);
                    let (g, dg, g_inv, _) = kerr_star_raw(profile, r, theta);
                    let jet = MetricJet {
                        chart: Chart::KerrStar,
                        g,
                        g_inv,
                        dg,
                        d2g: None,
                    };
                    let gamma = christoffel(&jet);
                    let mut w = [0.0f64; 4];
                    for (s, ws) in w.iter_mut().enumerate() {
                        for a in 0..4 {
                            for b in 0..4 {
                                *ws += g_inv[a][b] * gamma[s][a][b];
                            }
                        }
                    }
                    let det = crate::linalg::determinant(&g);
                    [
                        1.0 / g_inv[0][0],
                        g_inv[0][1],
                        g_inv[0][3],
                        g_inv[1][1],
                        g_inv[2][2],
                        g_inv[3][3],
                        g_inv[1][3],
                        w[0],
                        w[1],
                        w[2],
                        w[3],
                        (-det).max(0.0).sqrt(),
                    ]
                })
                .collect()
        });
        for (j, row) in rows.iter().enumerate() {
            for (i, c) in row.iter().enumerate() {
                let k = grid.idx(i, j);
                cache.inv_gtt[k] = c[0];
                cache.gtr[k] = c[1];
                cache.gtph[k] = c[2];
                cache.grr[k] = c[3];
                cache.gthth[k] = c[4];
                cache.gphph[k] = c[5];
                cache.grph[k] = c[6];
                cache.w_t[k] = c[7];
                cache.w_r[k] = c[8];
                cache.w_th[k] = c[9];
                cache.w_ph[k] = c[10];
                cache.sqrt_g[k] = c[11];
            }
        }
        cache
    }
}

/// Largest stable step for unit Courant factor: the minimum over nodes of
/// grid spacing divided by the local coordinate characteristic speed of the
/// metric's null cone, per direction, plus an azimuthal bound for `m != 0`.
pub fn courant_dt(grid: &Grid2D, cache: &ScalarWaveCache, cfl: f64) -> f64 {
    let mut dt = f64::INFINITY;
    for k in 0..grid.len() {
        let gtt = 1.0 / cache.inv_gtt[k];
        // radial characteristics: roots of gtt c^2 - 2 gtr c + grr = 0.
        let disc = (cache.gtr[k] * cache.gtr[k] - gtt * cache.grr[k]).max(0.0).sqrt();
        let c_r = ((cache.gtr[k].abs() + disc) / gtt.abs()).max(1e-14);
        dt = dt.min(grid.spacing_r / c_r);
        let c_th = (cache.gthth[k] / -gtt).max(0.0).sqrt().max(1e-14);
        dt = dt.min(grid.spacing_theta / c_th);
        if grid.mode_m != 0 {
            let disc_ph = (cache.gtph[k] * cache.gtph[k] - gtt * cache.gphph[k])
                .max(0.0)
                .sqrt();
            let c_ph = ((cache.gtph[k].abs() + disc_ph) / gtt.abs()).max(1e-14);
            dt = dt.min(1.0 / (grid.mode_m.unsigned_abs() as f64 * c_ph));
        }
    }
    cfl * dt
}

/// Time-dependent forcing: a stationary profile with an optional Gaussian
/// envelope in `t*`.
pub enum Forcing {
    None,
    Stationary(FieldSet),
    Pulsed {
        profile: FieldSet,
        t_center: f64,
        width: f64,
    },
}

impl Forcing {
    /// Amplitude multiplier at time `t`.
    pub fn envelope(&self, t: f64) -> f64 {
        match self {
            Forcing::None => 0.0,
            Forcing::Stationary(_) => 1.0,
            Forcing::Pulsed { t_center, width, .. } => {
                let x = (t - t_center) / width;
                (-0.5 * x * x).exp()
            }
        }
    }

    pub fn profile(&self) -> Option<&FieldSet> {
        match self {
            Forcing::None => None,
            Forcing::Stationary(p) | Forcing::Pulsed { profile: p, .. } => Some(p),
        }
    }

    /// Complex forcing value at a node and time, as `(re, im)`.
    pub fn value(&self, k: usize, t: f64) -> (f64, f64) {
        match self.profile() {
            None => (0.0, 0.0),
            Some(p) => {
                let env = self.envelope(t);
                (env * p.planes[0].data[k], env * p.planes[1].data[k])
            }
        }
    }
}

pub struct ScalarWaveRhs {
    pub cache: ScalarWaveCache,
    pub forcing: Forcing,
    st_r1: RadialStencil,
    st_r2: RadialStencil,
    st_t1: PolarStencil,
    st_t2: PolarStencil,
}

impl ScalarWaveRhs {
    pub fn new(profile: &ChartProfile, grid: &Grid2D) -> Self {
        let cache = ScalarWaveCache::build(profile, grid);
        Self {
            st_r1: RadialStencil::build(grid.n_r, grid.spacing_r, 1),
            st_r2: RadialStencil::build(grid.n_r, grid.spacing_r, 2),
            st_t1: PolarStencil::build(grid.spacing_theta, 1),
            st_t2: PolarStencil::build(grid.spacing_theta, 2),
            cache,
            forcing: Forcing::None,
        }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn zero_state(&self, grid: &Grid2D) -> StateVector {
        let parities = scalar_parities(grid.mode_m);
        StateVector {
            u: FieldSet::zeros(grid, &parities),
            v: FieldSet::zeros(grid, &parities),
            t_star: 0.0,
        }
    }

    /// Explicit sequential evaluation, for benchmarking against the
    /// default (feature-selected) path.
    pub fn eval_seq(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()> {
        self.eval_impl(state, du, dv, true)
    }

    fn eval_impl(
        &self,
        state: &StateVector,
        du: &mut FieldSet,
        dv: &mut FieldSet,
        force_seq: bool,
    ) -> Result<()> {
        let grid = &self.cache.grid;
        let n_r = grid.n_r;
        let m = grid.mode_m as f64;
        let parity = state.u.parities[0];

        let ur = &state.u.planes[0];
        let ui = &state.u.planes[1];
        let vr = &state.v.planes[0];
        let vi = &state.v.planes[1];

        // Derivative planes.
        let ur_r = ur.deriv_r(&self.st_r1);
        let ui_r = ui.deriv_r(&self.st_r1);
        let ur_rr = ur.deriv_r(&self.st_r2);
        let ui_rr = ui.deriv_r(&self.st_r2);
        let ur_th = ur.deriv_theta(&self.st_t1, parity);
        let ui_th = ui.deriv_theta(&self.st_t1, parity);
        let ur_thth = ur.deriv_theta(&self.st_t2, parity);
        let ui_thth = ui.deriv_theta(&self.st_t2, parity);
        let vr_r = vr.deriv_r(&self.st_r1);
        let vi_r = vi.deriv_r(&self.st_r1);

        // du = v.
        du.planes[0].data.copy_from_slice(&vr.data);
        du.planes[1].data.copy_from_slice(&vi.data);

        let c = &self.cache;
        let t = state.t_star;
        let combine = |j: usize, out_re: &mut [f64], out_im: &mut [f64]| {
            for i in 0..n_r {
                let k = j * n_r + i;
                // Spatial part of box u plus first-order terms, split into
                // real and imaginary components with d_phi -> i m.
                let mut rhs_re = c.grr[k] * ur_rr.data[k] + c.gthth[k] * ur_thth.data[k]
                    - m * m * c.gphph[k] * ur.data[k]
                    - c.w_r[k] * ur_r.data[k]
                    - c.w_th[k] * ur_th.data[k]
                    - c.w_t[k] * vr.data[k]
                    + 2.0 * c.gtr[k] * vr_r.data[k];
                let mut rhs_im = c.grr[k] * ui_rr.data[k] + c.gthth[k] * ui_thth.data[k]
                    - m * m * c.gphph[k] * ui.data[k]
                    - c.w_r[k] * ui_r.data[k]
                    - c.w_th[k] * ui_th.data[k]
                    - c.w_t[k] * vi.data[k]
                    + 2.0 * c.gtr[k] * vi_r.data[k];
                if m != 0.0 {
                    // i m cross terms: 2 gtph dt dph u = 2 gtph (i m v),
                    // 2 grph dr dph u = 2 grph (i m u_r), -w_ph dph u.
                    rhs_re += -2.0 * m * c.gtph[k] * vi.data[k]
                        - 2.0 * m * c.grph[k] * ui_r.data[k]
                        + m * c.w_ph[k] * ui.data[k];
                    rhs_im += 2.0 * m * c.gtph[k] * vr.data[k]
                        + 2.0 * m * c.grph[k] * ur_r.data[k]
                        - m * c.w_ph[k] * ur.data[k];
                }
                let (f_re, f_im) = self.forcing.value(k, t);
                out_re[i] = (f_re - rhs_re) * c.inv_gtt[k];
                out_im[i] = (f_im - rhs_im) * c.inv_gtt[k];
            }
        };

        // Split the two output planes and run the combine row-parallel.
        let (dvr, dvi) = {
            let (a, b) = dv.planes.split_at_mut(1);
            (&mut a[0], &mut b[0])
        };
        if force_seq {
            for j in 0..grid.n_theta {
                let re_row = &mut dvr.data[j * n_r..(j + 1) * n_r];
                let im_row = &mut dvi.data[j * n_r..(j + 1) * n_r];
                combine(j, re_row, im_row);
            }
        } else {
            // Zip the two planes row-wise; rows are independent.
            let rows: Vec<(Vec<f64>, Vec<f64>)> = par::map_rows_collect(grid.n_theta, |j| {
                let mut re_row = vec![0.0; n_r];
                let mut im_row = vec![0.0; n_r];
                combine(j, &mut re_row, &mut im_row);
                (re_row, im_row)
            });
            for (j, (re_row, im_row)) in rows.into_iter().enumerate() {
                dvr.data[j * n_r..(j + 1) * n_r].copy_from_slice(&re_row);
                dvi.data[j * n_r..(j + 1) * n_r].copy_from_slice(&im_row);
            }
        }
        Ok(())
    }
}

impl WaveRhs for ScalarWaveRhs {
    fn eval(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()> {
        if state.u.n_planes() != 2 || state.v.n_planes() != 2 {
            return Err(KdsError::Config(
                "scalar state must hold (re, im) planes".into(),
            ));
        }
        self.eval_impl(state, du, dv, false)
    }

    fn unit_courant_dt(&self) -> f64 {
        courant_dt(&self.cache.grid, &self.cache, 1.0)
    }
}

/// Gaussian pulse initial data centered in the middle interval, with zero
/// initial time derivative.
pub fn gaussian_pulse(
    grid: &Grid2D,
    r_center: f64,
    r_width: f64,
    theta_moment: i32,
    amplitude: f64,
) -> StateVector {
    let parities = scalar_parities(grid.mode_m);
    let mut u = FieldSet::zeros(grid, &parities);
    let m = grid.mode_m;
    u.planes[0] = Field2D::from_fn(grid, |r, th| {
        let x = (r - r_center) / r_width;
        // sin^|m| factor keeps the mode regular on the axis; an optional
        // extra cos(theta) moment seeds odd-parity content.
        let axis = th.sin().powi(m.abs());
        let moment = if theta_moment % 2 == 1 { th.cos() } else { 1.0 };
        amplitude * (-0.5 * x * x).exp() * axis * moment
    });
    StateVector {
        v: FieldSet::zeros(grid, &parities),
        u,
        t_star: 0.0,
    }
}
