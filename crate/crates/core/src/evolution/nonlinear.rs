//! Short-time nonlinear gauge-fixed evolution on the nonrotating
//! background, `m = 0`: the full operator `E(g_b + h)` is evaluated
//! pointwise each stage and the second time derivative solved from its
//! principal block, `g^{tt}` taken from the current metric.

use crate::error::{KdsError, Result};
use crate::gauge::{gauge_fixed_einstein_cached, perturbed_metric, SymTensorJet};
use crate::grid::{tensor_parities, FieldSet, Grid2D, PolarStencil, RadialStencil, SYM_PAIRS};
use crate::linalg;
use crate::par;

use super::background::BackgroundCache;
use super::scalar::{courant_dt, ScalarWaveCache};
use super::tensor::slice_derivatives;
use super::{StateVector, WaveRhs};

pub struct NonlinearRhs {
    pub bg: std::sync::Arc<BackgroundCache>,
    wave_cache: ScalarWaveCache,
    st_r1: RadialStencil,
    st_r2: RadialStencil,
    st_t1: PolarStencil,
    st_t2: PolarStencil,
}

impl NonlinearRhs {
    pub fn new(
        profile: &crate::chart::ChartProfile,
        grid: &Grid2D,
        bg: std::sync::Arc<BackgroundCache>,
    ) -> Result<Self> {
        if profile.params.spin() != 0.0 || grid.mode_m != 0 {
            return Err(KdsError::UnsupportedBackground(
                "nonlinear evolution requires a = 0 and m = 0".into(),
            ));
        }
        Ok(Self {
            wave_cache: ScalarWaveCache::build(profile, grid),
            st_r1: RadialStencil::build(grid.n_r, grid.spacing_r, 1),
            st_r2: RadialStencil::build(grid.n_r, grid.spacing_r, 2),
            st_t1: PolarStencil::build(grid.spacing_theta, 1),
            st_t2: PolarStencil::build(grid.spacing_theta, 2),
            bg,
        })
    }

    pub fn zero_state(&self) -> StateVector {
        let parities = tensor_parities();
        StateVector {
            u: FieldSet::zeros(&self.bg.grid, &parities),
            v: FieldSet::zeros(&self.bg.grid, &parities),
            t_star: 0.0,
        }
    }
}

impl WaveRhs for NonlinearRhs {
    fn eval(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()> {
        let grid = &self.bg.grid;
        let n_r = grid.n_r;
        let d = slice_derivatives(state, grid, &self.st_r1, &self.st_r2, &self.st_t1, &self.st_t2);

        for c in 0..10 {
            du.planes[c].data.copy_from_slice(&state.v.planes[c].data);
        }

        let lambda = self.bg.lambda;
        let rows: Vec<Result<Vec<f64>>> = par::map_rows_collect(grid.n_theta, |j| {
            let mut out_row = vec![0.0f64; 10 * n_r];
            for i in 0..n_r {
                let k = j * n_r + i;
                let mut jet = SymTensorJet::zero();
                for (c, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                    let assign = |m: &mut [[f64; 4]; 4], val: f64| {
                        m[a][b] = val;
                        m[b][a] = val;
                    };
                    assign(&mut jet.h, state.u.planes[c].data[k]);
                    assign(&mut jet.dh[0], state.v.planes[c].data[k]);
                    assign(&mut jet.dh[1], d.u_r[c][k]);
                    assign(&mut jet.dh[2], d.u_th[c][k]);
                    let d2 = jet.d2h.as_mut().unwrap();
                    assign(&mut d2[1][1], d.u_rr[c][k]);
                    assign(&mut d2[2][2], d.u_thth[c][k]);
                    assign(&mut d2[1][2], d.u_rth[c][k]);
                    assign(&mut d2[2][1], d.u_rth[c][k]);
                    assign(&mut d2[0][1], d.v_r[c][k]);
                    assign(&mut d2[1][0], d.v_r[c][k]);
                    assign(&mut d2[0][2], d.v_th[c][k]);
                    assign(&mut d2[2][0], d.v_th[c][k]);
                    // d2[0][0] stays zero: that block is solved for.
                }
                let g = perturbed_metric(self.bg.jet(k), &jet, 1.0)
                    .map_err(|_| KdsError::SignatureLost {
                        t_star: state.t_star,
                    })?;
                let gtt = g.g_inv[0][0];
                if gtt >= 0.0 {
                    return Err(KdsError::SignatureLost {
                        t_star: state.t_star,
                    });
                }
                let e0 = gauge_fixed_einstein_cached(&g, &self.bg.connections[k], lambda)?;
                for (c_out, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                    // E = E0 + 1/2 g^{tt} d_t^2 g; E = 0.
                    out_row[c_out * n_r + i] = -2.0 * e0[a][b] / gtt;
                }
            }
            Ok(out_row)
        });
        for (j, row) in rows.into_iter().enumerate() {
            let row = row?;
            for c in 0..10 {
                dv.planes[c].data[j * n_r..(j + 1) * n_r]
                    .copy_from_slice(&row[c * n_r..(c + 1) * n_r]);
            }
        }
        Ok(())
    }

    fn unit_courant_dt(&self) -> f64 {
        courant_dt(&self.bg.grid, &self.wave_cache, 1.0)
    }

    fn check_state(&self, state: &StateVector) -> Result<()> {
        // Lorentzian signature of g_b + h at every node: negative
        // determinant and positive-definite spatial block.
        let grid = &self.bg.grid;
        for k in 0..grid.len() {
            let mut g = self.bg.jet(k).g;
            for (c, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                let v = state.u.planes[c].data[k];
                g[a][b] += v;
                if a != b {
                    g[b][a] += v;
                }
            }
            let m1 = g[1][1];
            let m2 = g[1][1] * g[2][2] - g[1][2] * g[1][2];
            let m3 = g[1][1] * (g[2][2] * g[3][3] - g[2][3] * g[2][3])
                - g[1][2] * (g[1][2] * g[3][3] - g[2][3] * g[1][3])
                + g[1][3] * (g[1][2] * g[2][3] - g[2][2] * g[1][3]);
            if !(m1 > 0.0 && m2 > 0.0 && m3 > 0.0 && linalg::determinant(&g) < 0.0) {
                return Err(KdsError::SignatureLost {
                    t_star: state.t_star,
                });
            }
        }
        Ok(())
    }
}
