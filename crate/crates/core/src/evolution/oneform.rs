//! One-form wave evolution under the constraint propagation operator, used
//! as the side-by-side oracle for pure-gauge tensor data.

use crate::error::{KdsError, Result};
use crate::gauge::{constraint_propagation_wave, OneFormJet};
use crate::grid::{deriv_theta_rescaled, oneform_parities, AxisShape, FieldSet, Grid2D, PolarStencil, RadialStencil};
use crate::par;

use super::background::BackgroundCache;
use super::scalar::{courant_dt, ScalarWaveCache};
use super::{StateVector, WaveRhs};

pub struct OneFormWaveRhs {
    pub bg: std::sync::Arc<BackgroundCache>,
    wave_cache: ScalarWaveCache,
    st_r1: RadialStencil,
    st_r2: RadialStencil,
    st_t1: PolarStencil,
    st_t2: PolarStencil,
}

impl OneFormWaveRhs {
    pub fn new(
        profile: &crate::chart::ChartProfile,
        grid: &Grid2D,
        bg: std::sync::Arc<BackgroundCache>,
    ) -> Result<Self> {
        if grid.mode_m != 0 {
            return Err(KdsError::UnsupportedBackground(
                "one-form evolution implemented for m = 0 only".into(),
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
        let parities = oneform_parities();
        StateVector {
            u: FieldSet::zeros(&self.bg.grid, &parities),
            v: FieldSet::zeros(&self.bg.grid, &parities),
            t_star: 0.0,
        }
    }
}

impl WaveRhs for OneFormWaveRhs {
    fn eval(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()> {
        if state.u.n_planes() != 4 {
            return Err(KdsError::Config("one-form state must hold 4 planes".into()));
        }
        let grid = &self.bg.grid;
        let n_r = grid.n_r;

        let mut w_r = Vec::with_capacity(4);
        let mut w_th = Vec::with_capacity(4);
        let mut w_rr = Vec::with_capacity(4);
        let mut w_rth = Vec::with_capacity(4);
        let mut w_thth = Vec::with_capacity(4);
        let mut v_r = Vec::with_capacity(4);
        let mut v_th = Vec::with_capacity(4);
        for (c, plane) in state.u.planes.iter().enumerate() {
            let shape = AxisShape::oneform_component(c);
            let dr = plane.deriv_r(&self.st_r1);
            let (rth, _) = deriv_theta_rescaled(&dr, shape, &self.st_t1, &self.st_t2, grid);
            w_rth.push(rth.data);
            w_r.push(dr.data);
            let (th, thth) = deriv_theta_rescaled(plane, shape, &self.st_t1, &self.st_t2, grid);
            w_th.push(th.data);
            w_thth.push(thth.data);
            w_rr.push(plane.deriv_r(&self.st_r2).data);
        }
        for (c, plane) in state.v.planes.iter().enumerate() {
            let shape = AxisShape::oneform_component(c);
            v_r.push(plane.deriv_r(&self.st_r1).data);
            let (th, _) = deriv_theta_rescaled(plane, shape, &self.st_t1, &self.st_t2, grid);
            v_th.push(th.data);
        }

        for c in 0..4 {
            du.planes[c].data.copy_from_slice(&state.v.planes[c].data);
        }

        let rows: Vec<Result<Vec<f64>>> = par::map_rows_collect(grid.n_theta, |j| {
            let mut out_row = vec![0.0f64; 4 * n_r];
            for i in 0..n_r {
                let k = j * n_r + i;
                let mut psi = OneFormJet::zero();
                let d2 = psi.d2w.as_mut().unwrap();
                for c in 0..4 {
                    psi.w[c] = state.u.planes[c].data[k];
                    psi.dw[0][c] = state.v.planes[c].data[k];
                    psi.dw[1][c] = w_r[c][k];
                    psi.dw[2][c] = w_th[c][k];
                    d2[1][1][c] = w_rr[c][k];
                    d2[1][2][c] = w_rth[c][k];
                    d2[2][1][c] = w_rth[c][k];
                    d2[2][2][c] = w_thth[c][k];
                    d2[0][1][c] = v_r[c][k];
                    d2[1][0][c] = v_r[c][k];
                    d2[0][2][c] = v_th[c][k];
                    d2[2][0][c] = v_th[c][k];
                    // d2[0][0] solved for.
                }
                let jet = self.bg.jet(k);
                let cpo0 = constraint_propagation_wave(&psi, jet)?;
                let gtt = jet.g_inv[0][0];
                for c in 0..4 {
                    // CPO = CPO0 + g^{tt} d_t^2 psi; CPO = 0.
                    out_row[c * n_r + i] = -cpo0[c] / gtt;
                }
            }
            Ok(out_row)
        });
        for (j, row) in rows.into_iter().enumerate() {
            let row = row?;
            for c in 0..4 {
                dv.planes[c].data[j * n_r..(j + 1) * n_r]
                    .copy_from_slice(&row[c * n_r..(c + 1) * n_r]);
            }
        }
        Ok(())
    }

    fn unit_courant_dt(&self) -> f64 {
        courant_dt(&self.bg.grid, &self.wave_cache, 1.0)
    }
}
