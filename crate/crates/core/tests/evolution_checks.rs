//! Evolution validation against independent reductions: the 1+1 radial
//! oracle, outflow through the caps, self-convergence, and the linearity
//! and quadratic-smallness structure of the three right-hand sides.

use kds_core::chart::{chart_profile_default, ChartProfile};
use kds_core::evolution::background::BackgroundCache;
use kds_core::evolution::{
    evolve, rk4_step, EvolutionConfig, NonlinearRhs, OneFormWaveRhs, StateVector, TensorWaveRhs,
    WaveRhs,
};
use kds_core::evolution::scalar::{gaussian_pulse, ScalarWaveRhs};
use kds_core::grid::{build_grid, Field2D, Grid2D};
use kds_core::horizon::horizon_radii;
use kds_core::params::{validate_params, BlackHoleParams};
use kds_core::slice::{pure_gauge_pair, symmetric_gradient_field, OneFormSliceData};
use std::sync::Arc;

fn family() -> (BlackHoleParams, ChartProfile) {
    let p = validate_params(3.0, 0.1, 0.0).unwrap();
    let h = horizon_radii(&p, 0.05).unwrap();
    let pr = chart_profile_default(&p, &h).unwrap();
    (p, pr)
}

/// Independent 1+1 oracle for theta-independent m = 0 scalar waves on the
/// nonrotating background in the regular chart. The coefficients are
/// assembled from the hand-substituted metric functions
/// `G^{tt} = mu F'^2 - 1/mu`, `G^{tr} = -mu F'`, `G^{rr} = mu` and the
/// density identity `W^s = -(1/r^2) d_r (r^2 G^{rs})`, a different route
/// from the Christoffel contraction used by the production cache.
struct RadialOracle {
    n_r: usize,
    dr: f64,
    gtt: Vec<f64>,
    gtr: Vec<f64>,
    grr: Vec<f64>,
    wt: Vec<f64>,
    wr: Vec<f64>,
}

impl RadialOracle {
    fn build(params: &BlackHoleParams, profile: &ChartProfile, n_r: usize) -> Self {
        let h = &profile.horizons;
        let dr = (h.r_outer_cap - h.r_inner_cap) / (n_r - 1) as f64;
        let mut gtt = Vec::with_capacity(n_r);
        let mut gtr = Vec::with_capacity(n_r);
        let mut grr = Vec::with_capacity(n_r);
        // mu F' = s + mu c, regular everywhere.
        let mu_fp = |r: f64| {
            let (s, _) = profile.s(r);
            let (c, _) = profile.c(r);
            s + params.mu(r) * c
        };
        for i in 0..n_r {
            let r = h.r_inner_cap + dr * i as f64;
            let mu = params.mu(r);
            let mfp = mu_fp(r);
            // G^{tt} = mu F'^2 - 1/mu = ((s + mu c)^2 - 1)/mu
            //        = (s^2 - 1)/mu + 2 s c + mu c^2,
            // and (s^2 - 1)/mu = -(1 - s^2) r^2 / Delta = -q_reg r^2.
            let (s, _) = profile.s(r);
            let (c, _) = profile.c(r);
            let q = profile.q_reg(r).0;
            gtt.push(-q * r * r + 2.0 * s * c + mu * c * c);
            gtr.push(-mfp);
            grr.push(mu);
        }
        // W^s = -(1/r^2) d_r (r^2 G^{rs}) by centered differences of the
        // closed-form products (an independent density route).
        let mut wt = vec![0.0; n_r];
        let mut wr = vec![0.0; n_r];
        let step = 1e-6;
        for i in 0..n_r {
            let r = h.r_inner_cap + dr * i as f64;
            let val = |rr: f64, which: usize| -> f64 {
                let mu = params.mu(rr);
                let mfp = mu_fp(rr);
                let comp = if which == 0 { -mfp } else { mu };
                rr * rr * comp
            };
            wt[i] = -(val(r + step, 0) - val(r - step, 0)) / (2.0 * step) / (r * r);
            wr[i] = -(val(r + step, 1) - val(r - step, 1)) / (2.0 * step) / (r * r);
        }
        Self {
            n_r,
            dr,
            gtt,
            gtr,
            grr,
            wt,
            wr,
        }
    }

    /// 4th-order derivative with one-sided closures, self-contained.
    fn deriv(&self, f: &[f64], order: usize) -> Vec<f64> {
        let st = kds_core::grid::RadialStencil::build(self.n_r, self.dr, order);
        let mut out = vec![0.0; self.n_r];
        st.apply_row(f, &mut out);
        out
    }

    fn rhs(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let u_r = self.deriv(u, 1);
        let u_rr = self.deriv(u, 2);
        let v_r = self.deriv(v, 1);
        let mut dv = vec![0.0; self.n_r];
        for i in 0..self.n_r {
            let rest = self.grr[i] * u_rr[i] + 2.0 * self.gtr[i] * v_r[i]
                - self.wt[i] * v[i]
                - self.wr[i] * u_r[i];
            dv[i] = -rest / self.gtt[i];
        }
        (v.to_vec(), dv)
    }

    fn rk4(&self, u: &mut Vec<f64>, v: &mut Vec<f64>, dt: f64) {
        let (k1u, k1v) = self.rhs(u, v);
        let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + s * y).collect()
        };
        let (k2u, k2v) = self.rhs(&add(u, &k1u, 0.5 * dt), &add(v, &k1v, 0.5 * dt));
        let (k3u, k3v) = self.rhs(&add(u, &k2u, 0.5 * dt), &add(v, &k2v, 0.5 * dt));
        let (k4u, k4v) = self.rhs(&add(u, &k3u, dt), &add(v, &k3v, dt));
        for i in 0..self.n_r {
            u[i] += dt / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
}

#[test]
fn scalar_run_matches_independent_radial_oracle() {
    let (p, pr) = family();
    let grid = build_grid(&pr.horizons, 128, 16, 0).unwrap();
    let rhs = ScalarWaveRhs::new(&pr, &grid);
    // theta-independent pulse
    let r_mid = 0.5 * (grid.r_min + grid.r_max);
    let width = 0.06;
    let mut state = rhs.zero_state(&grid);
    state.u.planes[0] = Field2D::from_fn(&grid, |r, _| {
        let x = (r - r_mid) / width;
        (-0.5 * x * x).exp()
    });

    let config = EvolutionConfig {
        t_end: 0.5,
        dissipation_strength: 0.0,
        output_stride: 1_000_000,
        ..Default::default()
    };
    let result = evolve(&state, &config, &rhs, |_, _| {}).unwrap();
    assert!(result.error.is_none());
    let final_state = result.snapshots.last().unwrap();

    // Oracle run with the same dt.
    let oracle = RadialOracle::build(&p, &pr, grid.n_r);
    let mut u: Vec<f64> = (0..grid.n_r)
        .map(|i| {
            let x = (grid.r(i) - r_mid) / width;
            (-0.5f64 * x * x).exp()
        })
        .collect();
    let mut v = vec![0.0; grid.n_r];
    let steps = (config.t_end / result.dt).round() as usize;
    for _ in 0..steps {
        oracle.rk4(&mut u, &mut v, result.dt);
    }

    // Compare along one theta row.
    let mut worst: f64 = 0.0;
    for i in 0..grid.n_r {
        let got = final_state.u.planes[0].at(i, 7);
        worst = worst.max((got - u[i]).abs());
    }
    assert!(worst < 1e-8, "max deviation from 1+1 oracle: {worst:e}");
    // And the solution stayed theta-independent.
    let mut aniso: f64 = 0.0;
    for i in 0..grid.n_r {
        for j in 0..grid.n_theta {
            aniso = aniso.max((final_state.u.planes[0].at(i, j) - u[i]).abs());
        }
    }
    assert!(aniso < 1e-8, "anisotropy {aniso:e}");
}

/// The spacelike caps admit no incoming signal, so everything the
/// cap treatment does -- one-sided stencils, dissipation taper, the cap
/// position itself -- must be invisible in the interior. Run the same
/// pulse on the production domain and on a domain extended by eight extra
/// spacings on each side (same spacing, coincident nodes), and compare in
/// the middle interval after the pulse has crossed the caps: any cap
/// artifact re-entering would register as a difference. The physical
/// backscatter and zero-mode tail are identical in both runs and cancel.
#[test]
fn outflow_nothing_reenters_through_spacelike_caps() {
    let (_, pr) = family();
    let leakage = |n_r: usize| -> f64 { cap_leakage(&pr, n_r) };
    // Marginally resolved numerical modes have superluminal group
    // velocities, so a stencil-order trace of the cap treatment can leak
    // inward; it must be tiny and vanish at high order under refinement.
    let coarse = leakage(128);
    let fine = leakage(256);
    assert!(fine < 2e-6, "cap artifacts re-entered: {fine:e}");
    let order = (coarse / fine).log2();
    assert!(order > 3.0, "leakage order = {order} ({coarse:e} -> {fine:e})");
}

fn cap_leakage(pr: &ChartProfile, n_r: usize) -> f64 {
    let base = build_grid(&pr.horizons, n_r, 16, 0).unwrap();
    let extra = 8usize;
    let ext = Grid2D {
        r_min: base.r_min - extra as f64 * base.spacing_r,
        r_max: base.r_max + extra as f64 * base.spacing_r,
        n_r: base.n_r + 2 * extra,
        ..base
    };
    let rhs_base = ScalarWaveRhs::new(&pr, &base);
    let rhs_ext = ScalarWaveRhs::new(&pr, &ext);

    let (m1, m2) = pr.middle_interval();
    let r_mid = 0.5 * (m1 + m2);
    let amp = 1.0;
    let width = 0.1;
    let pulse = |grid: &Grid2D, rhs: &ScalarWaveRhs| -> StateVector {
        let mut s = rhs.zero_state(grid);
        s.u.planes[0] = Field2D::from_fn(grid, |r, _| {
            let x = (r - r_mid) / width;
            amp * (-0.5 * x * x).exp()
        });
        s
    };
    let mut s_base = pulse(&base, &rhs_base);
    let mut s_ext = pulse(&ext, &rhs_ext);

    let crossing = base.r_max - base.r_min;
    let t_end = 2.0 * crossing;
    let dt_unit = rhs_base.unit_courant_dt().min(rhs_ext.unit_courant_dt());
    let steps = (t_end / (0.25 * dt_unit)).ceil() as usize;
    let dt = t_end / steps as f64;
    let sigma = 0.1;
    for _ in 0..steps {
        s_base = rk4_step(&s_base, &rhs_base, dt).unwrap();
        kds_core::evolution::apply_dissipation(&mut s_base, sigma);
        s_ext = rk4_step(&s_ext, &rhs_ext, dt).unwrap();
        kds_core::evolution::apply_dissipation(&mut s_ext, sigma);
    }
    assert!(s_base.is_finite() && s_ext.is_finite());

    let mut middle_diff: f64 = 0.0;
    for j in 0..base.n_theta {
        for i in 0..base.n_r {
            let r = base.r(i);
            if r > m1 && r < m2 {
                let d = (s_base.u.planes[0].at(i, j) - s_ext.u.planes[0].at(i + extra, j)).abs();
                middle_diff = middle_diff.max(d);
            }
        }
    }
    middle_diff / amp
}

#[test]
fn scalar_self_convergence_order_at_least_three() {
    let (_, pr) = family();
    let run = |n_r: usize| -> (Grid2D, Vec<f64>) {
        let grid = build_grid(&pr.horizons, n_r, 16, 0).unwrap();
        let rhs = ScalarWaveRhs::new(&pr, &grid);
        let r_mid = 0.5 * (grid.r_min + grid.r_max);
        let mut state = rhs.zero_state(&grid);
        state.u.planes[0] = Field2D::from_fn(&grid, |r, _| {
            let x = (r - r_mid) / 0.07;
            (-0.5 * x * x).exp()
        });
        // The production path, dissipation included: the filter is a
        // higher-order perturbation and the one-sided closures need it.
        let config = EvolutionConfig {
            t_end: 0.35,
            cfl: 0.25,
            output_stride: 1_000_000,
            ..Default::default()
        };
        let result = evolve(&state, &config, &rhs, |_, _| {}).unwrap();
        assert!(result.error.is_none());
        let s = result.snapshots.last().unwrap();
        (grid, s.u.planes[0].data.clone())
    };
    let (g1, u1) = run(65);
    let (g2, u2) = run(129);
    let (g3, u3) = run(257);
    // Restrict to the common (nested) radial nodes along one row.
    let row = 7;
    let mut c = Vec::new();
    let mut m = Vec::new();
    let mut f = Vec::new();
    for i in 0..g1.n_r {
        c.push(u1[row * g1.n_r + i]);
        m.push(u2[row * g2.n_r + 2 * i]);
        f.push(u3[row * g3.n_r + 4 * i]);
    }
    let report = kds_core::analysis::convergence_order(&c, &m, &f);
    eprintln!("diffs: {:e} {:e}, order {}", report.coarse_diff, report.fine_diff, report.order);
    assert!(report.monotone);
    assert!(report.order >= 3.0, "order = {}", report.order);
}

#[test]
fn tensor_evolution_is_linear_and_gauge_covariant() {
    let (p, pr) = family();
    let grid = build_grid(&pr.horizons, 96, 32, 0).unwrap();
    let bg = Arc::new(BackgroundCache::build(&pr, &grid).unwrap());
    let tensor_rhs = TensorWaveRhs::new(&pr, &grid, &bg).unwrap();
    let oneform_rhs = OneFormWaveRhs::new(&pr, &grid, Arc::clone(&bg)).unwrap();
    let _ = p;

    // One-form data: smooth bump with axis-regular components.
    let r_mid = 0.5 * (grid.r_min + grid.r_max);
    let width = 0.15 * (grid.r_max - grid.r_min);
    let mut omega = oneform_rhs.zero_state();
    for c in 0..4 {
        omega.u.planes[c] = Field2D::from_fn(&grid, |r, th| {
            let x = (r - r_mid) / width;
            2e-4 * (0.6 + 0.1 * c as f64)
                * (-0.5 * x * x).exp()
                * kds_core::grid::axis_factor_oneform(c, th)
        });
        omega.v.planes[c] = Field2D::from_fn(&grid, |r, th| {
            let x = (r - r_mid) / width;
            8e-5 * (-0.5 * x * x).exp() * kds_core::grid::axis_factor_oneform(c, th)
        });
    }

    // omega2 from the one-form equation itself, so the tensor data is the
    // exact time derivative of grad*(omega(t)) at t = 0.
    let mut do_u = omega.u.clone();
    let mut do_v = omega.v.clone();
    oneform_rhs.eval(&omega, &mut do_u, &mut do_v).unwrap();
    let pair = pure_gauge_pair(
        &OneFormSliceData {
            omega0: omega.u.clone(),
            omega1: omega.v.clone(),
            omega2: Some(do_v),
        },
        &bg,
    );

    // Linearity: evolving 2x data gives 2x solution. Dissipation stays
    // off: the filter acts on tensor components and one-form components
    // inequivalently (it does not commute with the multiplication by
    // background factors inside grad*), which would contaminate the
    // side-by-side comparison.
    let config = EvolutionConfig {
        t_end: 0.05,
        dissipation_strength: 0.0,
        output_stride: 1_000_000,
        ..Default::default()
    };
    let one = evolve(&pair, &config, &tensor_rhs, |_, _| {}).unwrap();
    assert!(one.error.is_none(), "{:?}", one.error);
    let mut doubled = pair.clone();
    doubled.u.scale(2.0);
    doubled.v.scale(2.0);
    let two = evolve(&doubled, &config, &tensor_rhs, |_, _| {}).unwrap();
    let fu1 = &one.snapshots.last().unwrap().u;
    let fu2 = &two.snapshots.last().unwrap().u;
    let mut lin_dev: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for c in 0..10 {
        for (a, b) in fu1.planes[c].data.iter().zip(&fu2.planes[c].data) {
            lin_dev = lin_dev.max((b - 2.0 * a).abs());
            scale = scale.max(a.abs());
        }
    }
    assert!(lin_dev < 1e-8 * scale.max(1e-30), "lin_dev = {lin_dev:e}");

    // Gauge covariance smoke test: h(t) tracks grad*(omega(t)).
    let omega_run = evolve(&omega, &config, &oneform_rhs, |_, _| {}).unwrap();
    assert!(omega_run.error.is_none());
    let expected = symmetric_gradient_field(omega_run.snapshots.last().unwrap(), &bg);
    let mut dev: f64 = 0.0;
    let mut mag: f64 = 0.0;
    for c in 0..10 {
        for (a, b) in fu1.planes[c].data.iter().zip(&expected.planes[c].data) {
            dev = dev.max((a - b).abs());
            mag = mag.max(b.abs());
        }
    }
    // Measured stencil floor at this resolution: ~8e-3 relative, set by
    // the chart-transition bands (the defect shrinks >= 6x per refinement
    // doubling); a sign or factor error in the pure-gauge identity would
    // show up at order one.
    assert!(
        dev < 1.5e-2 * mag.max(1e-12),
        "gauge covariance broke: dev = {dev:e}, mag = {mag:e}"
    );
}

#[test]
fn nonlinear_zero_data_stays_zero_and_small_data_is_quadratically_close() {
    let (_, pr) = family();
    let grid = build_grid(&pr.horizons, 40, 16, 0).unwrap();
    let bg = Arc::new(BackgroundCache::build(&pr, &grid).unwrap());
    let nl = NonlinearRhs::new(&pr, &grid, Arc::clone(&bg)).unwrap();
    let tn = TensorWaveRhs::new(&pr, &grid, &bg).unwrap();

    let config = EvolutionConfig {
        t_end: 0.04,
        output_stride: 1_000_000,
        ..Default::default()
    };

    // Zero data stays at the roundoff/background floor.
    let zero = nl.zero_state();
    let zrun = evolve(&zero, &config, &nl, |_, _| {}).unwrap();
    assert!(zrun.error.is_none());
    let drift = zrun.snapshots.last().unwrap().u.max_abs();
    assert!(drift < 1e-10, "zero-data drift {drift:e}");

    // Amplitude scaling: (nonlinear - linear) solution shrinks 4x when the
    // amplitude halves.
    let r_mid = 0.5 * (grid.r_min + grid.r_max);
    let width = 0.12 * (grid.r_max - grid.r_min);
    let mut base = nl.zero_state();
    for (c, &(a, b)) in kds_core::grid::SYM_PAIRS.iter().enumerate() {
        base.u.planes[c] = Field2D::from_fn(&grid, |r, th| {
            let x = (r - r_mid) / width;
            (0.5 + 0.05 * (a + b) as f64)
                * (-0.5 * x * x).exp()
                * kds_core::grid::axis_factor(a, b, th)
        });
    }
    let mut defect = Vec::new();
    for eps in [2e-3, 1e-3] {
        let mut data = base.clone();
        data.u.scale(eps);
        let nl_run = evolve(&data, &config, &nl, |_, _| {}).unwrap();
        assert!(nl_run.error.is_none(), "{:?}", nl_run.error);
        let lin_run = evolve(&data, &config, &tn, |_, _| {}).unwrap();
        let nu = &nl_run.snapshots.last().unwrap().u;
        let lu = &lin_run.snapshots.last().unwrap().u;
        let mut d: f64 = 0.0;
        for c in 0..10 {
            for (x, y) in nu.planes[c].data.iter().zip(&lu.planes[c].data) {
                d = d.max((x - y).abs());
            }
        }
        defect.push(d);
    }
    let ratio = defect[0] / defect[1];
    assert!(
        (ratio - 4.0).abs() < 1.0,
        "quadratic closeness ratio = {ratio}, defects {defect:?}"
    );
}
