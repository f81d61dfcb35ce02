//! Linearized tensor-wave evolution on the nonrotating background, `m = 0`.
//!
//! The gauged linearized operator is never transcribed: at every node its
//! action on the 90-dimensional jet basis (value, first, and second
//! derivatives that the slice state determines) is probed numerically from
//! the nonlinear operator, and each right-hand-side evaluation is then a
//! dense 10x90 matrix-vector product. The coefficient of the second time
//! derivative is checked against `1/2 g^{tt}` during the build.

use crate::chart::ChartProfile;
use crate::error::{KdsError, Result};
use crate::gauge::{gauge_fixed_einstein_cached, perturbed_metric, SymTensorJet};
use crate::grid::{deriv_theta_rescaled, tensor_parities, AxisShape, FieldSet, Grid2D, PolarStencil, RadialStencil, SYM_PAIRS};
use crate::par;

use super::background::BackgroundCache;
use super::scalar::{courant_dt, ScalarWaveCache};
use super::{StateVector, WaveRhs};

type Mat4Diff = [[f64; 4]; 4];

/// Jet slots a slice state determines, each holding 10 components:
/// value, d_t, d_r, d_th, d_rr, d_rth, d_thth, d_t d_r, d_t d_th.
pub const JET_SLOTS: usize = 9;
pub const JET_DIM: usize = JET_SLOTS * 10;

fn basis_jet(slot: usize, comp: usize) -> SymTensorJet {
    let (a, b) = SYM_PAIRS[comp];
    let mut jet = SymTensorJet::zero();
    let put = |m: &mut [[f64; 4]; 4]| {
        m[a][b] = 1.0;
        m[b][a] = 1.0;
    };
    match slot {
        0 => put(&mut jet.h),
        1 => put(&mut jet.dh[0]),
        2 => put(&mut jet.dh[1]),
        3 => put(&mut jet.dh[2]),
        _ => {
            let d2 = jet.d2h.as_mut().unwrap();
            match slot {
                4 => put(&mut d2[1][1]),
                5 => {
                    put(&mut d2[1][2]);
                    put(&mut d2[2][1]);
                }
                6 => put(&mut d2[2][2]),
                7 => {
                    put(&mut d2[0][1]);
                    put(&mut d2[1][0]);
                }
                8 => {
                    put(&mut d2[0][2]);
                    put(&mut d2[2][0]);
                }
                _ => unreachable!(),
            }
        }
    }
    jet
}

/// The induced linear operator per node: `L0[c][s*10+c']` maps jet entries
/// to the 10 components of `L h` with the second-time-derivative slot
/// excluded, plus the inverse `t*t*` metric component for the solve.
pub struct LinearTensorOpCache {
    pub grid: Grid2D,
    pub matrices: Vec<f64>,
    pub inv_gtt: Vec<f64>,
}

impl LinearTensorOpCache {
    pub fn build(profile: &ChartProfile, grid: &Grid2D, bg: &BackgroundCache) -> Result<Self> {
        if profile.params.spin() != 0.0 {
            return Err(KdsError::UnsupportedBackground(
                "tensor evolution requires a = 0".into(),
            ));
        }
        if grid.mode_m != 0 {
            return Err(KdsError::UnsupportedBackground(
                "tensor evolution requires mode m = 0".into(),
            ));
        }
        let lambda = bg.lambda;
        let eps = 64.0 * f64::EPSILON.cbrt();
        let n = grid.len();
        let rows: Vec<Vec<f64>> = par::map_rows_collect(grid.n_theta, |j| {
            let mut row_mats = vec![0.0f64; grid.n_r * 10 * JET_DIM];
            for i in 0..grid.n_r {
                let k = grid.idx(i, j);
                let jet_bg = bg.jet(k);
                let conn0 = &bg.connections[k];
                for slot in 0..JET_SLOTS {
                    for comp in 0..10 {
                        // Scale the probe to the component's natural size:
                        // near the poles g_{phi phi} ~ sin^2(theta), and an
                        // absolute step there would leave the perturbative
                        // regime entirely.
                        let (a_in, b_in) = SYM_PAIRS[comp];
                        let scale = (jet_bg.g[a_in][a_in].abs() * jet_bg.g[b_in][b_in].abs())
                            .sqrt()
                            .max(1e-8);
                        let basis = basis_jet(slot, comp);
                        let diff = |step: f64| -> Mat4Diff {
                            let gp = perturbed_metric(jet_bg, &basis, step).unwrap();
                            let gm = perturbed_metric(jet_bg, &basis, -step).unwrap();
                            let ep = gauge_fixed_einstein_cached(&gp, conn0, lambda).unwrap();
                            let em = gauge_fixed_einstein_cached(&gm, conn0, lambda).unwrap();
                            let mut out = [[0.0; 4]; 4];
                            for a in 0..4 {
                                for b in 0..4 {
                                    out[a][b] = (ep[a][b] - em[a][b]) / (2.0 * step);
                                }
                            }
                            out
                        };
                        let step = eps * scale;
                        let d1 = diff(step);
                        // The operator is affine in second derivatives, so
                        // those columns are exact at any step; the value and
                        // first-derivative columns carry O(step^2) noise,
                        // removed by one Richardson level.
                        let column = if slot <= 3 {
                            let d2 = diff(0.5 * step);
                            let mut out = [[0.0; 4]; 4];
                            for a in 0..4 {
                                for b in 0..4 {
                                    out[a][b] = (4.0 * d2[a][b] - d1[a][b]) / 3.0;
                                }
                            }
                            out
                        } else {
                            d1
                        };
                        for (c_out, &(a, b)) in SYM_PAIRS.iter().enumerate() {
                            row_mats[(i * 10 + c_out) * JET_DIM + slot * 10 + comp] =
                                column[a][b];
                        }
                    }
                }
            }
            row_mats
        });
        let mut matrices = vec![0.0f64; n * 10 * JET_DIM];
        for (j, row) in rows.into_iter().enumerate() {
            let dst = j * grid.n_r * 10 * JET_DIM;
            matrices[dst..dst + row.len()].copy_from_slice(&row);
        }
        let inv_gtt: Vec<f64> = (0..n).map(|k| 1.0 / bg.jet(k).g_inv[0][0]).collect();

        // Spot-check the solved block: the d_t^2 coefficient must be
        // (1/2) g^{tt} times the identity on components.
        for &k in &[0usize, n / 2, n - 1] {
            let jet_bg = bg.jet(k);
            let conn0 = &bg.connections[k];
            let mut probe = SymTensorJet::zero();
            let d2 = probe.d2h.as_mut().unwrap();
            d2[0][0][0][1] = 1.0;
            d2[0][0][1][0] = 1.0;
            let gp = perturbed_metric(jet_bg, &probe, eps)?;
            let gm = perturbed_metric(jet_bg, &probe, -eps)?;
            let ep = gauge_fixed_einstein_cached(&gp, conn0, lambda)?;
            let em = gauge_fixed_einstein_cached(&gm, conn0, lambda)?;
            let got = (ep[0][1] - em[0][1]) / (2.0 * eps);
            let expect = 0.5 * jet_bg.g_inv[0][0];
            if (got - expect).abs() > 1e-6 * expect.abs() {
                return Err(KdsError::UnsupportedBackground(format!(
                    "principal block probe failed at node {k}: {got} vs {expect}"
                )));
            }
        }
        Ok(Self {
            grid: *grid,
            matrices,
            inv_gtt,
        })
    }
}

pub struct TensorWaveRhs {
    pub cache: LinearTensorOpCache,
    wave_cache: ScalarWaveCache,
    st_r1: RadialStencil,
    st_r2: RadialStencil,
    st_t1: PolarStencil,
    st_t2: PolarStencil,
}

impl TensorWaveRhs {
    pub fn new(profile: &ChartProfile, grid: &Grid2D, bg: &BackgroundCache) -> Result<Self> {
        Ok(Self {
            cache: LinearTensorOpCache::build(profile, grid, bg)?,
            wave_cache: ScalarWaveCache::build(profile, grid),
            st_r1: RadialStencil::build(grid.n_r, grid.spacing_r, 1),
            st_r2: RadialStencil::build(grid.n_r, grid.spacing_r, 2),
            st_t1: PolarStencil::build(grid.spacing_theta, 1),
            st_t2: PolarStencil::build(grid.spacing_theta, 2),
        })
    }

    pub fn zero_state(&self) -> StateVector {
        let parities = tensor_parities();
        StateVector {
            u: FieldSet::zeros(&self.cache.grid, &parities),
            v: FieldSet::zeros(&self.cache.grid, &parities),
            t_star: 0.0,
        }
    }
}

/// Builds all derivative planes a tensor slice state determines.
pub(crate) struct SliceDerivatives {
    pub u_r: Vec<Vec<f64>>,
    pub u_th: Vec<Vec<f64>>,
    pub u_rr: Vec<Vec<f64>>,
    pub u_rth: Vec<Vec<f64>>,
    pub u_thth: Vec<Vec<f64>>,
    pub v_r: Vec<Vec<f64>>,
    pub v_th: Vec<Vec<f64>>,
}

/// Polar derivatives go through the axis-regular rescaling: the plain
/// stencil on a component vanishing like `sin^k` at the poles leaves
/// relative errors that the `1/sin^2` metric contractions amplify into a
/// violent pole-row instability (growth rate scaling with `n_theta`).
pub(crate) fn slice_derivatives(
    state: &StateVector,
    grid: &Grid2D,
    st_r1: &RadialStencil,
    st_r2: &RadialStencil,
    st_t1: &PolarStencil,
    st_t2: &PolarStencil,
) -> SliceDerivatives {
    let n = state.u.planes.len();
    let shapes: Vec<AxisShape> = if n == 10 {
        SYM_PAIRS
            .iter()
            .map(|&(a, b)| AxisShape::tensor_component(a, b))
            .collect()
    } else {
        (0..n).map(AxisShape::oneform_component).collect()
    };
    let mut out = SliceDerivatives {
        u_r: Vec::with_capacity(n),
        u_th: Vec::with_capacity(n),
        u_rr: Vec::with_capacity(n),
        u_rth: Vec::with_capacity(n),
        u_thth: Vec::with_capacity(n),
        v_r: Vec::with_capacity(n),
        v_th: Vec::with_capacity(n),
    };
    for (c, plane) in state.u.planes.iter().enumerate() {
        let dr = plane.deriv_r(st_r1);
        let (u_rth, _) = deriv_theta_rescaled(&dr, shapes[c], st_t1, st_t2, grid);
        out.u_rth.push(u_rth.data);
        out.u_r.push(dr.data);
        let (u_th, u_thth) = deriv_theta_rescaled(plane, shapes[c], st_t1, st_t2, grid);
        out.u_th.push(u_th.data);
        out.u_thth.push(u_thth.data);
        out.u_rr.push(plane.deriv_r(st_r2).data);
    }
    for (c, plane) in state.v.planes.iter().enumerate() {
        out.v_r.push(plane.deriv_r(st_r1).data);
        let (v_th, _) = deriv_theta_rescaled(plane, shapes[c], st_t1, st_t2, grid);
        out.v_th.push(v_th.data);
    }
    out
}

impl WaveRhs for TensorWaveRhs {
    fn eval(&self, state: &StateVector, du: &mut FieldSet, dv: &mut FieldSet) -> Result<()> {
        if state.u.n_planes() != 10 {
            return Err(KdsError::Config("tensor state must hold 10 planes".into()));
        }
        let grid = &self.cache.grid;
        let n_r = grid.n_r;
        let d = slice_derivatives(state, grid, &self.st_r1, &self.st_r2, &self.st_t1, &self.st_t2);

        for c in 0..10 {
            du.planes[c].data.copy_from_slice(&state.v.planes[c].data);
        }

        let mats = &self.cache.matrices;
        let inv_gtt = &self.cache.inv_gtt;
        let rows: Vec<Vec<f64>> = par::map_rows_collect(grid.n_theta, |j| {
            let mut out_row = vec![0.0f64; 10 * n_r];
            let mut jet = [0.0f64; JET_DIM];
            for i in 0..n_r {
                let k = j * n_r + i;
                for c in 0..10 {
                    jet[c] = state.u.planes[c].data[k];
                    jet[10 + c] = state.v.planes[c].data[k];
                    jet[20 + c] = d.u_r[c][k];
                    jet[30 + c] = d.u_th[c][k];
                    jet[40 + c] = d.u_rr[c][k];
                    jet[50 + c] = d.u_rth[c][k];
                    jet[60 + c] = d.u_thth[c][k];
                    jet[70 + c] = d.v_r[c][k];
                    jet[80 + c] = d.v_th[c][k];
                }
                let base = k * 10 * JET_DIM;
                for c_out in 0..10 {
                    let row = &mats[base + c_out * JET_DIM..base + (c_out + 1) * JET_DIM];
                    let mut acc = 0.0;
                    for (x, w) in jet.iter().zip(row.iter()) {
                        acc += x * w;
                    }
                    // L = L0 + 1/2 g^{tt} d_t^2 h; solving L h = 0.
                    out_row[c_out * n_r + i] = -2.0 * acc * inv_gtt[k];
                }
            }
            out_row
        });
        for (j, row) in rows.into_iter().enumerate() {
            for c in 0..10 {
                dv.planes[c].data[j * n_r..(j + 1) * n_r]
                    .copy_from_slice(&row[c * n_r..(c + 1) * n_r]);
            }
        }
        Ok(())
    }

    fn unit_courant_dt(&self) -> f64 {
        courant_dt(&self.cache.grid, &self.wave_cache, 1.0)
    }
}
