//! Subcommand implementations. Each writes its artifacts plus a manifest
//! under the output directory and fails with a structured error otherwise.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use kds_core::analysis::{
    convergence_order, decay_rate_fit, hk_norm, interpolation_check, Measure, NormContext,
};
use kds_core::chart::{chart_profile_build, default_middle_interval, ChartProfile};
use kds_core::currents::{
    bulk_rate, cap_fluxes, integrate_series, redshift_multiplier_build, slice_energy,
    DivergenceSeries, Multiplier, MultiplierCache,
};
use kds_core::curvature::{compatibility_residual, einstein_residual};
use kds_core::error::{KdsError, Result};
use kds_core::evolution::background::BackgroundCache;
use kds_core::evolution::scalar::{gaussian_pulse, ScalarWaveRhs};
use kds_core::evolution::{
    evolve, EvolutionConfig, NonlinearRhs, StateVector, TensorWaveRhs, WaveRhs,
};
use kds_core::gauge::constraint_op;
use kds_core::grid::{build_grid, Field2D, FieldSet, Grid2D};
use kds_core::horizon::{horizon_radii, HorizonData};
use kds_core::io::{read_csv, write_csv, write_json, write_snapshot};
use kds_core::linalg::{mat_mul, max_abs_diff, negative_eigenvalue_count, IDENTITY};
use kds_core::metric::{ergosphere_indicator, metric_raw, Chart, SpacetimePoint};
use kds_core::params::BlackHoleParams;
use kds_core::slice::{
    gauge_project_slice, nonlinear_constraint_residual, nonlinear_project_slice,
    pure_gauge_pair, slice_constraint_residual, OneFormSliceData,
};
use kds_core::tolerances::{self, ThresholdTable};
use kds_core::vectorfield::Vectorfield;

use crate::config::{MultiplierKind, ScenarioConfig};

pub struct RunContext {
    pub command: String,
    pub config: ScenarioConfig,
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    /// the effective configuration with every default materialized
    config: &'a ScenarioConfig,
    thresholds: ThresholdTable,
    /// wall-clock stamp; excluded from determinism comparisons
    timestamp_unix_ms: u128,
}

fn write_manifest(ctx: &RunContext) -> Result<()> {
    let manifest = Manifest {
        command: &ctx.command,
        version: env!("CARGO_PKG_VERSION"),
        config: &ctx.config,
        thresholds: ThresholdTable::default(),
        timestamp_unix_ms: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0),
    };
    write_json(&ctx.out_dir.join("manifest.json"), &manifest)
}

struct Family {
    params: BlackHoleParams,
    horizons: HorizonData,
    profile: ChartProfile,
    grid: Grid2D,
}

fn family(ctx: &RunContext) -> Result<Family> {
    let p = &ctx.config.params;
    let params = BlackHoleParams::with_spin_cap(p.lambda, p.mass, p.spin, p.spin_cap)?;
    let probe = horizon_radii(&params, 1e-3)?;
    let horizons = horizon_radii(&params, ctx.config.grid.epsilon_ext_fraction * probe.span())?;
    let profile = chart_profile_build(
        &params,
        &horizons,
        default_middle_interval(&horizons, params.mass()),
    )?;
    let grid = build_grid(
        &horizons,
        ctx.config.grid.n_r,
        ctx.config.grid.n_theta,
        ctx.config.grid.mode_m,
    )?;
    Ok(Family {
        params,
        horizons,
        profile,
        grid,
    })
}

fn evolution_config(ctx: &RunContext) -> EvolutionConfig {
    let e = &ctx.config.evolution;
    EvolutionConfig {
        cfl: e.cfl,
        t_end: e.t_end,
        stencil_order: 4,
        dissipation_strength: e.dissipation,
        output_stride: e.output_stride,
    }
}

pub fn run(ctx: &RunContext) -> Result<()> {
    match ctx.command.as_str() {
        "horizons" => cmd_horizons(ctx),
        "verify-geometry" => cmd_verify_geometry(ctx),
        "chart-report" | "geometry-report" => cmd_chart_report(ctx),
        "evolve-scalar" => cmd_evolve_scalar(ctx),
        "evolve-tensor" => cmd_evolve_tensor(ctx),
        "evolve-nonlinear" => cmd_evolve_nonlinear(ctx),
        "project-initial-data" => cmd_project_initial_data(ctx),
        "divergence-check" => cmd_divergence_check(ctx),
        "decay-fit" => cmd_decay_fit(ctx),
        "interp-check" => cmd_interp_check(ctx),
        "convergence" => cmd_convergence(ctx),
        "gauge-check" => cmd_gauge_check(ctx),
        other => Err(KdsError::Config(format!(
            "unknown subcommand `{other}`; see kds-lab --help"
        ))),
    }?;
    write_manifest(ctx)
}

#[derive(Serialize)]
struct HorizonsReport {
    r_negative: f64,
    r_event: f64,
    r_cosmo: f64,
    r_inner_cap: f64,
    r_outer_cap: f64,
    epsilon_ext: f64,
    subextremal: bool,
    subextremality_margin: f64,
    delta_residual_event: f64,
    delta_residual_cosmo: f64,
}

fn cmd_horizons(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let h = &f.horizons;
    let report = HorizonsReport {
        r_negative: h.r_negative,
        r_event: h.r_event,
        r_cosmo: h.r_cosmo,
        r_inner_cap: h.r_inner_cap,
        r_outer_cap: h.r_outer_cap,
        epsilon_ext: h.epsilon_ext,
        subextremal: true,
        subextremality_margin: f.params.subextremality_margin(),
        delta_residual_event: f.params.delta(h.r_event).abs(),
        delta_residual_cosmo: f.params.delta(h.r_cosmo).abs(),
    };
    write_json(&ctx.out_dir.join("horizons.json"), &report)
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyGeometryReport {
    checks: Vec<Check>,
    all_pass: bool,
    spacelike_margin: f64,
    g_inv_dtdt_min: f64,
    g_inv_dtdt_max: f64,
}

fn cmd_verify_geometry(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let mut worst_inverse: f64 = 0.0;
    let mut signature_violations = 0usize;
    let mut worst_compat: f64 = 0.0;
    let mut worst_killing: f64 = 0.0;
    let mut worst_upsilon: f64 = 0.0;
    let mut gg_min = f64::INFINITY;
    let mut gg_max: f64 = 0.0;
    let t_field = Vectorfield::killing_t();
    let phi_field = Vectorfield::killing_phi();
    for j in 0..grid.n_theta {
        for i in 0..grid.n_r {
            let (r, theta) = (grid.r(i), grid.theta(j));
            let jet = metric_raw(&f.params, &f.profile, Chart::KerrStar, r, theta);
            worst_inverse = worst_inverse.max(max_abs_diff(&mat_mul(&jet.g, &jet.g_inv), &IDENTITY));
            if negative_eigenvalue_count(&jet.g) != 1 {
                signature_violations += 1;
            }
            worst_compat = worst_compat.max(compatibility_residual(&jet));
            let pt = SpacetimePoint::kerr_star(r, theta);
            for vf in [&t_field, &phi_field] {
                let pi = kds_core::currents::deformation_tensor(&vf.eval(&pt), &jet);
                worst_killing = worst_killing.max(kds_core::linalg::max_abs(&pi));
            }
            for v in constraint_op(&jet, &jet) {
                worst_upsilon = worst_upsilon.max(v.abs());
            }
            let gg = -1.0 / jet.g_inv[0][0];
            gg_min = gg_min.min(gg);
            gg_max = gg_max.max(gg);
        }
    }
    let scale = (1.0f64).max(f.params.lambda() * f.horizons.r_cosmo.powi(3));
    let delta_res = f
        .params
        .delta(f.horizons.r_event)
        .abs()
        .max(f.params.delta(f.horizons.r_cosmo).abs())
        / scale;
    // one interior Ricci sample at a moderate spacing
    let ric_res = einstein_residual(
        &f.params,
        &f.profile,
        &SpacetimePoint::kerr_star(
            0.5 * (f.horizons.r_event + f.horizons.r_cosmo),
            1.1,
        ),
        Chart::KerrStar,
        1e-3,
    )?;
    let checks = vec![
        Check {
            name: "inverse_contract".into(),
            value: worst_inverse,
            threshold: tolerances::INVERSE_CONTRACT,
            pass: worst_inverse < tolerances::INVERSE_CONTRACT,
        },
        Check {
            name: "signature_violations".into(),
            value: signature_violations as f64,
            threshold: 0.0,
            pass: signature_violations == 0,
        },
        Check {
            name: "horizon_residual".into(),
            value: delta_res,
            threshold: tolerances::HORIZON_RESIDUAL,
            pass: delta_res < tolerances::HORIZON_RESIDUAL,
        },
        Check {
            name: "metric_compatibility".into(),
            value: worst_compat,
            threshold: tolerances::COMPATIBILITY,
            pass: worst_compat < tolerances::COMPATIBILITY,
        },
        Check {
            name: "killing_deformation".into(),
            value: worst_killing,
            threshold: tolerances::KILLING_DEFORMATION,
            pass: worst_killing < tolerances::KILLING_DEFORMATION,
        },
        Check {
            name: "constraint_identity".into(),
            value: worst_upsilon,
            threshold: tolerances::CONSTRAINT_IDENTITY,
            pass: worst_upsilon < tolerances::CONSTRAINT_IDENTITY,
        },
        Check {
            name: "einstein_residual_sample".into(),
            value: ric_res,
            threshold: 1e-7,
            pass: ric_res < 1e-7,
        },
    ];
    let all_pass = checks.iter().all(|c| c.pass);
    let report = VerifyGeometryReport {
        all_pass,
        spacelike_margin: f.profile.spacelike_margin,
        g_inv_dtdt_min: gg_min,
        g_inv_dtdt_max: gg_max,
        checks,
    };
    write_json(&ctx.out_dir.join("verify_geometry.json"), &report)?;
    if !all_pass {
        return Err(KdsError::Config(
            "geometry verification failed; see verify_geometry.json".into(),
        ));
    }
    Ok(())
}

fn cmd_chart_report(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let mut rows = Vec::new();
    for j in 0..grid.n_theta {
        for i in 0..grid.n_r {
            let (r, theta) = (grid.r(i), grid.theta(j));
            let jet = metric_raw(&f.params, &f.profile, Chart::KerrStar, r, theta);
            let pt = SpacetimePoint::kerr_star(r, theta);
            let mu_or_delta = if f.params.spin() == 0.0 {
                f.params.mu(r)
            } else {
                f.params.delta(r)
            };
            let margin = 2.0 * grid.spacing_r.max(1e-3);
            let ricci_residual = if r - margin > f.horizons.r_inner_cap
                && r + margin < f.horizons.r_outer_cap
                && theta > margin
                && theta < std::f64::consts::PI - margin
            {
                einstein_residual(&f.params, &f.profile, &pt, Chart::KerrStar, 1e-3)?
            } else {
                f64::NAN
            };
            rows.push(vec![
                r,
                theta,
                mu_or_delta,
                jet.g[0][0],
                -1.0 / jet.g_inv[0][0],
                ergosphere_indicator(&f.params, &f.profile, &pt)?,
                ricci_residual,
            ]);
        }
    }
    write_csv(
        &ctx.out_dir.join("geometry_report.csv"),
        &[
            "r",
            "theta",
            "mu_or_delta",
            "g_tt",
            "g_inv_dtdt",
            "ergo_indicator",
            "ricci_residual",
        ],
        &rows,
    )?;
    #[derive(Serialize)]
    struct ProfileReport {
        breaks: kds_core::chart::ProfileBreakpoints,
        middle_interval: (f64, f64),
        spacelike_margin: f64,
    }
    write_json(
        &ctx.out_dir.join("chart_profile.json"),
        &ProfileReport {
            breaks: f.profile.breaks,
            middle_interval: f.profile.middle_interval(),
            spacelike_margin: f.profile.spacelike_margin,
        },
    )
}

fn scalar_initial_state(ctx: &RunContext, grid: &Grid2D) -> StateVector {
    let d = &ctx.config.initial_data;
    let span = grid.r_max - grid.r_min;
    gaussian_pulse(
        grid,
        grid.r_min + d.r_center_fraction * span,
        d.width_fraction * span,
        d.theta_moment,
        d.amplitude,
    )
}

#[derive(Serialize)]
struct RunReport {
    dt: f64,
    steps: usize,
    snapshots: usize,
    final_max_abs: f64,
    aborted: Option<String>,
}

fn emit_energy_series(
    ctx: &RunContext,
    path: &Path,
    times: &[f64],
    e_t: &[f64],
    e_n: &[f64],
    hks: &[Vec<f64>],
) -> Result<()> {
    let mut header: Vec<String> = vec!["t_star".into(), "e_t".into(), "e_n".into()];
    for k in &ctx.config.norms {
        header.push(format!("hk{k}"));
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut rows = Vec::with_capacity(times.len());
    for (idx, &t) in times.iter().enumerate() {
        let mut row = vec![t, e_t[idx], e_n[idx]];
        for series in hks {
            row.push(series[idx]);
        }
        rows.push(row);
    }
    write_csv(path, &header_refs, &rows)
}

fn cmd_evolve_scalar(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let rhs = ScalarWaveRhs::new(&f.profile, grid);
    let state = scalar_initial_state(ctx, grid);
    run_and_emit(ctx, &f, grid, &rhs, state)
}

fn run_and_emit(
    ctx: &RunContext,
    f: &Family,
    grid: &Grid2D,
    rhs: &dyn WaveRhs,
    state: StateVector,
) -> Result<()> {
    let config = evolution_config(ctx);
    let want_n = ctx.config.multipliers.contains(&MultiplierKind::N);
    let cache_t = MultiplierCache::build(&f.profile, grid, &Multiplier::killing_t());
    let cache_n = if want_n {
        let (mult, _) = redshift_multiplier_build(&f.params, &f.profile)?;
        Some(MultiplierCache::build(&f.profile, grid, &mult))
    } else {
        None
    };
    let norm_ctx = NormContext::new(&f.profile, grid);

    let mut times = Vec::new();
    let mut e_t = Vec::new();
    let mut e_n = Vec::new();
    let mut hks: Vec<Vec<f64>> = ctx.config.norms.iter().map(|_| Vec::new()).collect();
    let mut snap_index = 0usize;
    let stride = config.output_stride;
    let out_dir = ctx.out_dir.clone();

    let mut observer_error: Option<KdsError> = None;
    let result = evolve(&state, &config, rhs, |step, s| {
        if observer_error.is_some() || step % stride != 0 {
            return;
        }
        times.push(s.t_star);
        e_t.push(slice_energy(&cache_t, s));
        e_n.push(cache_n.as_ref().map_or(0.0, |c| slice_energy(c, s)));
        for (slot, &k) in ctx.config.norms.iter().enumerate() {
            match hk_norm(&norm_ctx, &s.u, k, Measure::Coordinate) {
                Ok(v) => hks[slot].push(v),
                Err(e) => {
                    observer_error = Some(e);
                    return;
                }
            }
        }
        if let Err(e) = write_snapshot(&out_dir, &format!("snap_{snap_index:04}"), grid, s) {
            observer_error = Some(e);
        }
        snap_index += 1;
    })?;
    if let Some(e) = observer_error {
        return Err(e);
    }
    emit_energy_series(ctx, &ctx.out_dir.join("energy.csv"), &times, &e_t, &e_n, &hks)?;
    let report = RunReport {
        dt: result.dt,
        steps: result.steps_taken,
        snapshots: snap_index,
        final_max_abs: result.snapshots.last().map_or(0.0, |s| s.max_abs()),
        aborted: result.error.as_ref().map(|e| e.to_string()),
    };
    write_json(&ctx.out_dir.join("run.json"), &report)?;
    if let Some(e) = result.error {
        return Err(e);
    }
    Ok(())
}

fn tensor_initial_state(
    ctx: &RunContext,
    grid: &Grid2D,
    bg: &BackgroundCache,
) -> Result<StateVector> {
    let d = &ctx.config.initial_data;
    let span = grid.r_max - grid.r_min;
    let r_center = grid.r_min + d.r_center_fraction * span;
    let width = d.width_fraction * span;
    let state = match d.kind.as_str() {
        "pure_gauge" => {
            let parities = kds_core::grid::oneform_parities();
            let mut omega0 = FieldSet::zeros(grid, &parities);
            let mut omega1 = FieldSet::zeros(grid, &parities);
            for c in 0..4 {
                omega0.planes[c] = Field2D::from_fn(grid, |r, th| {
                    let x = (r - r_center) / width;
                    d.amplitude
                        * (0.6 + 0.1 * c as f64)
                        * (-0.5 * x * x).exp()
                        * kds_core::grid::axis_factor_oneform(c, th)
                });
                omega1.planes[c] = Field2D::from_fn(grid, |r, th| {
                    let x = (r - r_center) / width;
                    0.4 * d.amplitude
                        * (-0.5 * x * x).exp()
                        * kds_core::grid::axis_factor_oneform(c, th)
                });
            }
            pure_gauge_pair(
                &OneFormSliceData {
                    omega0,
                    omega1,
                    omega2: None,
                },
                bg,
            )
        }
        "tensor_bump" => {
            let parities = kds_core::grid::tensor_parities();
            let mut u = FieldSet::zeros(grid, &parities);
            let v = FieldSet::zeros(grid, &parities);
            for (c, &(a, b)) in kds_core::grid::SYM_PAIRS.iter().enumerate() {
                u.planes[c] = Field2D::from_fn(grid, |r, th| {
                    let x = (r - r_center) / width;
                    d.amplitude
                        * (0.5 + 0.05 * (a + b) as f64)
                        * (-0.5 * x * x).exp()
                        * kds_core::grid::axis_factor(a, b, th)
                });
            }
            StateVector { u, v, t_star: 0.0 }
        }
        other => {
            return Err(KdsError::Config(format!(
                "initial_data.kind `{other}` not valid for tensor runs \
                 (expected pure_gauge or tensor_bump)"
            )))
        }
    };
    if d.project {
        let (projected, _) = gauge_project_slice(&state, bg)?;
        Ok(projected)
    } else {
        Ok(state)
    }
}

fn cmd_evolve_tensor(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let bg = std::sync::Arc::new(BackgroundCache::build(&f.profile, grid)?);
    let rhs = TensorWaveRhs::new(&f.profile, grid, &bg)?;
    let state = tensor_initial_state(ctx, grid, &bg)?;
    run_and_emit(ctx, &f, grid, &rhs, state)
}

fn cmd_evolve_nonlinear(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let bg = std::sync::Arc::new(BackgroundCache::build(&f.profile, grid)?);
    let rhs = NonlinearRhs::new(&f.profile, grid, std::sync::Arc::clone(&bg))?;
    let state = tensor_initial_state(ctx, grid, &bg)?;

    let config = evolution_config(ctx);
    let stride = config.output_stride;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let out_dir = ctx.out_dir.clone();
    let mut snap_index = 0usize;
    let mut observer_error: Option<KdsError> = None;
    let result = evolve(&state, &config, &rhs, |step, s| {
        if observer_error.is_some() || step % stride != 0 {
            return;
        }
        rows.push(vec![s.t_star, nonlinear_constraint_residual(s, &bg)]);
        if let Err(e) = write_snapshot(&out_dir, &format!("snap_{snap_index:04}"), grid, s) {
            observer_error = Some(e);
        }
        snap_index += 1;
    })?;
    if let Some(e) = observer_error {
        return Err(e);
    }
    write_csv(
        &ctx.out_dir.join("constraint.csv"),
        &["t_star", "upsilon_max"],
        &rows,
    )?;
    let report = RunReport {
        dt: result.dt,
        steps: result.steps_taken,
        snapshots: snap_index,
        final_max_abs: result.snapshots.last().map_or(0.0, |s| s.max_abs()),
        aborted: result.error.as_ref().map(|e| e.to_string()),
    };
    write_json(&ctx.out_dir.join("run.json"), &report)?;
    if let Some(e) = result.error {
        return Err(e);
    }
    Ok(())
}

#[derive(Serialize)]
struct ProjectionReport {
    linear_residual_before: f64,
    linear_residual_after: f64,
    nonlinear_residual_before: f64,
    nonlinear_residual_after: f64,
}

fn cmd_project_initial_data(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let bg = BackgroundCache::build(&f.profile, grid)?;
    let mut raw_ctx = RunContext {
        command: ctx.command.clone(),
        config: ctx.config.clone(),
        out_dir: ctx.out_dir.clone(),
    };
    raw_ctx.config.initial_data.project = false;
    let raw = tensor_initial_state(&raw_ctx, grid, &bg)?;
    let before = slice_constraint_residual(&raw, &bg);
    let nl_before = nonlinear_constraint_residual(&raw, &bg);
    let (projected, after) = gauge_project_slice(&raw, &bg)?;
    let nl_after = nonlinear_constraint_residual(&projected, &bg);
    write_snapshot(&ctx.out_dir, "projected_pair", grid, &projected)?;
    write_json(
        &ctx.out_dir.join("projection.json"),
        &ProjectionReport {
            linear_residual_before: before,
            linear_residual_after: after,
            nonlinear_residual_before: nl_before,
            nonlinear_residual_after: nl_after,
        },
    )
}

#[derive(Serialize)]
struct DivergenceReport {
    residual: f64,
    multiplier: String,
}

fn cmd_divergence_check(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = &f.grid;
    let rhs = ScalarWaveRhs::new(&f.profile, grid);
    let state = scalar_initial_state(ctx, grid);
    let config = evolution_config(ctx);

    let use_n = ctx.config.multipliers.first() == Some(&MultiplierKind::N);
    let cache = if use_n {
        let (mult, _) = redshift_multiplier_build(&f.params, &f.profile)?;
        MultiplierCache::build(&f.profile, grid, &mult)
    } else {
        MultiplierCache::build(&f.profile, grid, &Multiplier::killing_t())
    };
    let cache_t = MultiplierCache::build(&f.profile, grid, &Multiplier::killing_t());

    let mut series = DivergenceSeries::default();
    let mut e_t_series = Vec::new();
    let result = evolve(&state, &config, &rhs, |_, s| {
        let e = slice_energy(&cache, s);
        let fl = cap_fluxes(&cache, s);
        let b = bulk_rate(&cache, s, None::<&dyn Fn(usize) -> Complex64>);
        series.record(s.t_star, e, fl, b);
        e_t_series.push(slice_energy(&cache_t, s));
    })?;
    if let Some(e) = result.error {
        return Err(e);
    }
    let residual = kds_core::currents::divergence_residual(&series)?;

    // per-row running residual over [t0, t_i]
    let dt = series.times.get(1).copied().unwrap_or(0.0) - series.times.first().copied().unwrap_or(0.0);
    let mut rows = Vec::with_capacity(series.times.len());
    for i in 0..series.times.len() {
        let running = if i >= 2 {
            let flux_in = integrate_series(dt, &series.flux_inner[..=i]);
            let flux_out = integrate_series(dt, &series.flux_outer[..=i]);
            let bulk = integrate_series(dt, &series.bulk[..=i]);
            (series.energy[0] - series.energy[i] + flux_out - flux_in - bulk).abs()
                / series.energy[0].abs().max(1e-300)
        } else {
            0.0
        };
        rows.push(vec![
            series.times[i],
            e_t_series[i],
            series.energy[i],
            series.flux_inner[i],
            series.flux_outer[i],
            series.bulk[i],
            running,
        ]);
    }
    write_csv(
        &ctx.out_dir.join("divergence.csv"),
        &[
            "t_star",
            "e_t",
            "e_n",
            "flux_inner",
            "flux_outer",
            "bulk_k",
            "identity_residual",
        ],
        &rows,
    )?;
    write_json(
        &ctx.out_dir.join("divergence.json"),
        &DivergenceReport {
            residual,
            multiplier: if use_n { "n".into() } else { "t".into() },
        },
    )
}

fn cmd_decay_fit(ctx: &RunContext) -> Result<()> {
    let path = PathBuf::from(&ctx.config.fit.input_csv);
    let (header, rows) = read_csv(&path)?;
    let col = header
        .iter()
        .position(|h| h == &ctx.config.fit.column)
        .ok_or_else(|| {
            KdsError::Config(format!(
                "fit.column `{}` not in csv header {header:?}",
                ctx.config.fit.column
            ))
        })?;
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let energies: Vec<f64> = rows.iter().map(|r| r[col]).collect();
    let t_end = *times.last().unwrap_or(&0.0);
    let (w0, w1) = ctx.config.fit.window_fractions;
    let fit = decay_rate_fit(
        &times,
        &energies,
        (w0 * t_end, w1 * t_end),
        &format!("n_r={}", ctx.config.grid.n_r),
    )?;
    write_json(&ctx.out_dir.join("decay_fit.json"), &fit)
}

fn cmd_interp_check(ctx: &RunContext) -> Result<()> {
    let report = interpolation_check(
        ctx.config.interp.l,
        ctx.config.interp.n,
        ctx.config.interp.samples,
        ctx.config.seed,
    );
    write_json(&ctx.out_dir.join("interpolation.json"), &report)
}

#[derive(Serialize)]
struct ConvergenceReportOut {
    resolutions: [usize; 3],
    order: f64,
    monotone: bool,
    coarse_diff: f64,
    fine_diff: f64,
}

fn cmd_convergence(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let [n1, n2, n3] = ctx.config.resolutions;
    let run = |n_r: usize| -> Result<(Grid2D, Vec<f64>)> {
        let grid = build_grid(&f.horizons, n_r, ctx.config.grid.n_theta, 0)?;
        let rhs = ScalarWaveRhs::new(&f.profile, &grid);
        let state = scalar_initial_state(ctx, &grid);
        let config = evolution_config(ctx);
        let result = evolve(&state, &config, &rhs, |_, _| {})?;
        if let Some(e) = result.error {
            return Err(e);
        }
        let last = result.snapshots.last().unwrap();
        Ok((grid, last.u.planes[0].data.clone()))
    };
    let (g1, u1) = run(n1)?;
    let (g2, u2) = run(n2)?;
    let (g3, u3) = run(n3)?;
    let row = ctx.config.grid.n_theta / 2;
    let stride2 = (g2.n_r - 1) / (g1.n_r - 1);
    let stride3 = (g3.n_r - 1) / (g1.n_r - 1);
    let mut c = Vec::new();
    let mut m = Vec::new();
    let mut ff = Vec::new();
    for i in 0..g1.n_r {
        c.push(u1[row * g1.n_r + i]);
        m.push(u2[row * g2.n_r + stride2 * i]);
        ff.push(u3[row * g3.n_r + stride3 * i]);
    }
    let report = convergence_order(&c, &m, &ff);
    write_json(
        &ctx.out_dir.join("convergence.json"),
        &ConvergenceReportOut {
            resolutions: ctx.config.resolutions,
            order: report.order,
            monotone: report.monotone,
            coarse_diff: report.coarse_diff,
            fine_diff: report.fine_diff,
        },
    )
}

#[derive(Serialize)]
struct GaugeCheckReport {
    constraint_residual_max: f64,
    projection_residual_max: f64,
    quadratic_ratio: f64,
}

fn cmd_gauge_check(ctx: &RunContext) -> Result<()> {
    let f = family(ctx)?;
    let grid = build_grid(
        &f.horizons,
        ctx.config.grid.n_r.min(32),
        ctx.config.grid.n_theta.min(16),
        0,
    )?;
    let bg = BackgroundCache::build(&f.profile, &grid)?;

    // Upsilon(g_b, g_b) over the grid.
    let mut constraint_residual_max: f64 = 0.0;
    for j in 0..grid.n_theta {
        for i in 0..grid.n_r {
            let jet = metric_raw(&f.params, &f.profile, Chart::KerrStar, grid.r(i), grid.theta(j));
            for v in constraint_op(&jet, &jet) {
                constraint_residual_max = constraint_residual_max.max(v.abs());
            }
        }
    }

    // Projection residual on a reference bump.
    let mut bump_ctx = RunContext {
        command: ctx.command.clone(),
        config: ctx.config.clone(),
        out_dir: ctx.out_dir.clone(),
    };
    bump_ctx.config.initial_data.kind = "tensor_bump".into();
    bump_ctx.config.initial_data.project = false;
    bump_ctx.config.initial_data.amplitude = 1e-2;
    let raw = tensor_initial_state(&bump_ctx, &grid, &bg)?;
    let (_, projection_residual_max) = gauge_project_slice(&raw, &bg)?;

    // Two-amplitude quadraticity of the projection against nonlinearly
    // constrained data.
    let mut diffs = Vec::new();
    for amp in [5e-2, 5e-3] {
        bump_ctx.config.initial_data.amplitude = amp;
        let raw = tensor_initial_state(&bump_ctx, &grid, &bg)?;
        let constrained = nonlinear_project_slice(&raw, &bg, 1e-13)?;
        let (lin, _) = gauge_project_slice(&constrained, &bg)?;
        let mut diff: f64 = 0.0;
        for c in 0..4 {
            for (a, b) in constrained.v.planes[c].data.iter().zip(&lin.v.planes[c].data) {
                diff = diff.max((a - b).abs());
            }
        }
        diffs.push(diff);
    }
    write_json(
        &ctx.out_dir.join("gauge_check.json"),
        &GaugeCheckReport {
            constraint_residual_max,
            projection_residual_max,
            quadratic_ratio: diffs[0] / diffs[1],
        },
    )
}
