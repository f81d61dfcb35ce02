//! scratch diagnostics (removed before release)
use kds_core::chart::chart_profile_default;
use kds_core::evolution::background::BackgroundCache;
use kds_core::evolution::{rk4_step, apply_dissipation, NonlinearRhs, WaveRhs};
use kds_core::grid::{build_grid, Field2D, FieldSet};
use kds_core::horizon::horizon_radii;
use kds_core::params::validate_params;
use kds_core::slice::{gauge_project_slice, pure_gauge_pair, OneFormSliceData};
use std::sync::Arc;

#[test]
#[ignore]
fn probe_nonlinear_growth() {
    let p = validate_params(3.0, 0.1, 0.0).unwrap();
    let h = horizon_radii(&p, 0.05).unwrap();
    let pr = chart_profile_default(&p, &h).unwrap();
    let grid = build_grid(&h, 48, 16, 0).unwrap();
    let bg = Arc::new(BackgroundCache::build(&pr, &grid).unwrap());
    let rhs = NonlinearRhs::new(&pr, &grid, Arc::clone(&bg)).unwrap();
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
    let sigma: f64 = std::env::var("NL_SIGMA").ok().and_then(|v| v.parse().ok()).unwrap_or(0.1);
    let cfl: f64 = std::env::var("NL_CFL").ok().and_then(|v| v.parse().ok()).unwrap_or(0.25);
    let (mut s, _) = gauge_project_slice(&pair, &bg).unwrap();
    eprintln!("sigma={sigma} cfl={cfl} initial max|u| = {:.3e}", s.u.max_abs());
    let dt = cfl * rhs.unit_courant_dt();
    for step in 0..4000 {
        let next = rk4_step(&s, &rhs, dt);
        match next {
            Ok(n) => s = n,
            Err(e) => { eprintln!("step {step} t={:.3}: ERR {e}", s.t_star); break; }
        }
        apply_dissipation(&mut s, sigma);
        if step % 20 == 0 {
            // relative perturbation against the local metric scale
            let mut worst_rel = (0usize, 0usize, 0usize, 0.0f64);
            for c in 0..10 {
                let (a, b) = kds_core::grid::SYM_PAIRS[c];
                for j in 0..grid.n_theta {
                    for i in 0..grid.n_r {
                        let k = grid.idx(i, j);
                        let scale = (bg.jet(k).g[a][a].abs() * bg.jet(k).g[b][b].abs()).sqrt().max(1e-12);
                        let v = s.u.planes[c].at(i, j).abs() / scale;
                        if v > worst_rel.3 { worst_rel = (c, i, j, v); }
                    }
                }
            }
            eprintln!("step {step} t={:.3}: max rel={:.3e} at comp {} i {} j {}", s.t_star, worst_rel.3, worst_rel.0, worst_rel.1, worst_rel.2);
            if !s.is_finite() || worst_rel.3 > 2.0 { break; }
        }
    }
}
