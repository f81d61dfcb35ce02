//! Run-level current diagnostics: the divergence-identity balance, slice
//! energy coercivity, and decay measurement on short runs.

use kds_core::analysis::{decay_rate_fit, default_fit_window};
use kds_core::chart::{chart_profile_default, ChartProfile};
use kds_core::currents::{
    bulk_rate, cap_fluxes, divergence_residual, redshift_multiplier_build, slice_energy,
    DivergenceSeries, Multiplier, MultiplierCache,
};
use kds_core::evolution::scalar::{gaussian_pulse, Forcing, ScalarWaveRhs};
use kds_core::evolution::{evolve, EvolutionConfig};
use kds_core::grid::{build_grid, Field2D, FieldSet, scalar_parities};
use kds_core::horizon::horizon_radii;
use kds_core::params::{validate_params, BlackHoleParams};

fn family(a: f64) -> (BlackHoleParams, ChartProfile) {
    let p = validate_params(3.0, 0.1, a).unwrap();
    let h = horizon_radii(&p, 0.05).unwrap();
    let pr = chart_profile_default(&p, &h).unwrap();
    (p, pr)
}

fn balance_residual(pr: &ChartProfile, n_r: usize, dt_scale: f64, forced: bool) -> f64 {
    let grid = build_grid(&pr.horizons, n_r, 16, 0).unwrap();
    let mut rhs = ScalarWaveRhs::new(pr, &grid);
    let forcing_profile = if forced {
        let mut f = FieldSet::zeros(&grid, &scalar_parities(0));
        let r_mid = 0.55;
        f.planes[0] = Field2D::from_fn(&grid, |r, _| {
            let x = (r - r_mid) / 0.05;
            0.5 * (-0.5 * x * x).exp()
        });
        Some(f)
    } else {
        None
    };
    if let Some(f) = &forcing_profile {
        rhs = rhs.with_forcing(Forcing::Pulsed {
            profile: f.clone(),
            t_center: 0.15,
            width: 0.05,
        });
    }
    let state = gaussian_pulse(&grid, 0.5, 0.06, 0, 1.0);
    let cache = MultiplierCache::build(pr, &grid, &Multiplier::killing_t());
    let mut series = DivergenceSeries::default();
    let config = EvolutionConfig {
        t_end: 0.4,
        cfl: 0.25 * dt_scale,
        output_stride: 1_000_000,
        ..Default::default()
    };
    let rhs_ref = &rhs;
    let cache_ref = &cache;
    let result = evolve(&state, &config, rhs_ref, |_, s| {
        let e = slice_energy(cache_ref, s);
        let f = cap_fluxes(cache_ref, s);
        let b = if forced {
            let t = s.t_star;
            bulk_rate(
                cache_ref,
                s,
                Some(&|k: usize| {
                    let (re, im) = rhs_ref.forcing.value(k, t);
                    num_complex::Complex64::new(re, im)
                }),
            )
        } else {
            bulk_rate(cache_ref, s, None)
        };
        series.record(s.t_star, e, f, b);
    })
    .unwrap();
    assert!(result.error.is_none());
    divergence_residual(&series).unwrap()
}

#[test]
fn divergence_identity_balances_and_converges() {
    let (_, pr) = family(0.0);
    let coarse = balance_residual(&pr, 96, 1.0, false);
    let fine = balance_residual(&pr, 192, 0.5, false);
    assert!(coarse < 1e-3, "coarse residual {coarse:e}");
    let ratio = coarse / fine;
    assert!(ratio > 6.0, "residual ratio {ratio} ({coarse:e} -> {fine:e})");
}

#[test]
fn forced_run_balances_with_bulk_term() {
    let (_, pr) = family(0.0);
    let resid = balance_residual(&pr, 96, 1.0, true);
    assert!(resid < 2e-3, "forced residual {resid:e}");
}

#[test]
fn redshift_energy_balance_and_coercivity() {
    let (p, pr) = family(0.0);
    let grid = build_grid(&pr.horizons, 64, 16, 0).unwrap();
    let (mult, delta) = redshift_multiplier_build(&p, &pr).unwrap();
    assert!(delta > 0.0);
    let cache = MultiplierCache::build(&pr, &grid, &mult);

    // Coercivity: c ||grad h||^2 <= E_N <= C ||grad h||^2 over random
    // smooth fields, with measured constants of moderate ratio.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_pcg::Pcg64::seed_from_u64(77);
    let rhs = ScalarWaveRhs::new(&pr, &grid);
    let mut ratios = Vec::new();
    for _ in 0..12 {
        let mut s = rhs.zero_state(&grid);
        let k1 = rng.gen_range(1.0..6.0);
        let k2 = rng.gen_range(0.5..3.0);
        let a0 = rng.gen_range(0.3..1.0);
        s.u.planes[0] = Field2D::from_fn(&grid, |r, th| {
            a0 * (k1 * r * 7.0).sin() * (1.0 + 0.3 * (k2 * th).cos())
        });
        s.v.planes[0] = Field2D::from_fn(&grid, |r, _| a0 * (k1 * r * 5.0).cos());
        let e = slice_energy(&cache, &s);
        assert!(e > 0.0, "redshift energy must be positive");
        // reference gradient square: coordinate-measure H^1 seminorm plus
        // the time derivative planes.
        let ctx = kds_core::analysis::NormContext::new(&pr, &grid);
        let h1 = kds_core::analysis::slice_pair_norm(
            &ctx,
            &s,
            1,
            kds_core::analysis::Measure::Coordinate,
        )
        .unwrap();
        ratios.push(e / (h1 * h1));
    }
    let cmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let cmax = ratios.iter().cloned().fold(0.0f64, f64::max);
    assert!(cmin > 0.0);
    assert!(cmax / cmin < 1e3, "coercivity spread {}", cmax / cmin);

    // Quadratic scaling of the energy.
    let mut s = rhs.zero_state(&grid);
    s.u.planes[0] = Field2D::from_fn(&grid, |r, th| (3.0 * r).sin() * th.sin());
    let e1 = slice_energy(&cache, &s);
    s.u.scale(2.0);
    let e2 = slice_energy(&cache, &s);
    assert!((e2 / e1 - 4.0).abs() < 1e-12);
}

#[test]
fn scalar_pulse_decays_exponentially() {
    let (_, pr) = family(0.0);
    let grid = build_grid(&pr.horizons, 96, 16, 0).unwrap();
    let rhs = ScalarWaveRhs::new(&pr, &grid);
    let state = gaussian_pulse(&grid, 0.45, 0.05, 1, 1.0);
    let cache = MultiplierCache::build(&pr, &grid, &Multiplier::killing_t());
    let mut times = Vec::new();
    let mut energies = Vec::new();
    let config = EvolutionConfig {
        t_end: 12.0,
        output_stride: 1_000_000,
        ..Default::default()
    };
    let result = evolve(&state, &config, &rhs, |step, s| {
        if step % 10 == 0 {
            times.push(s.t_star);
            energies.push(slice_energy(&cache, s));
        }
    })
    .unwrap();
    assert!(result.error.is_none());
    let fit = decay_rate_fit(&times, &energies, default_fit_window(&times), "n96").unwrap();
    assert!(
        fit.rate > 0.0,
        "expected decay, rate = {} (energy rate {})",
        fit.rate,
        fit.rate_energy
    );
    assert!(fit.rate_energy == 2.0 * fit.rate);
}
