//! scratch diagnostics (removed before release)
use kds_core::chart::chart_profile_default;
use kds_core::evolution::background::BackgroundCache;
use kds_core::evolution::{apply_dissipation, rk4_step, TensorWaveRhs, WaveRhs};
use kds_core::grid::{build_grid, Field2D, FieldSet};
use kds_core::horizon::horizon_radii;
use kds_core::params::validate_params;
use kds_core::slice::{gauge_project_slice, pure_gauge_pair, OneFormSliceData};
use std::sync::Arc;

#[test]
#[ignore]
fn probe_linear_growth_rate() {
    let p = validate_params(3.0, 0.1, 0.0).unwrap();
    let h = horizon_radii(&p, 0.05).unwrap();
    let pr = chart_profile_default(&p, &h).unwrap();
    for (n_r, n_th) in [(48usize, 16usize)] {
        let grid = build_grid(&h, n_r, n_th, 0).unwrap();
        let bg = Arc::new(BackgroundCache::build(&pr, &grid).unwrap());
        let rhs = TensorWaveRhs::new(&pr, &grid, &bg).unwrap();
        let parities = kds_core::grid::oneform_parities();
        let mut omega0 = FieldSet::zeros(&grid, &parities);
        let mut omega1 = FieldSet::zeros(&grid, &parities);
        let r_mid = 0.5 * (grid.r_min + grid.r_max);
        let width = 0.14 * (grid.r_max - grid.r_min);
        for c in 0..4 {
            omega0.planes[c] = Field2D::from_fn(&grid, |r, th| {
                let x = (r - r_mid) / width;
                2.4e-4 * (0.6 + 0.1 * c as f64) * (-0.5 * x * x).exp()
                    * kds_core::grid::axis_factor_oneform(c, th)
            });
            omega1.planes[c] = Field2D::from_fn(&grid, |r, th| {
                let x = (r - r_mid) / width;
                1e-4 * (-0.5 * x * x).exp() * kds_core::grid::axis_factor_oneform(c, th)
            });
        }
        let pair = pure_gauge_pair(&OneFormSliceData { omega0, omega1, omega2: None }, &bg);
        let (mut s, _) = gauge_project_slice(&pair, &bg).unwrap();
        let dt = 0.25 * rhs.unit_courant_dt();
        let l2 = |st: &kds_core::evolution::StateVector| -> f64 {
            let mut acc = 0.0;
            for pl in &st.u.planes {
                for v in &pl.data {
                    acc += v * v;
                }
            }
            (acc / (grid.len() as f64)).sqrt()
        };
        eprintln!("n_r={n_r}: t=0.000 l2={:.4e}", l2(&s));
        let mut t = 0.0;
        let mut next_report = 0.5;
        while t < 3.75 {
            s = rk4_step(&s, &rhs, dt).unwrap();
            apply_dissipation(&mut s, 0.1);
            t += dt;
            if t >= next_report {
                eprintln!("n_r={n_r}: t={t:.3} l2={:.4e} max={:.3e}", l2(&s), s.u.max_abs());
                next_report += 0.25;
            }
            if !s.is_finite() {
                eprintln!("n_r={n_r}: NON-FINITE at t={t:.3}");
                break;
            }
        }
    }
}
