use std::path::Path;

use anyhow::{bail, Context, Result};
use jamming_core::export::{coupled_trace_csv, csv_bytes, fmt_opt, fmt_sig, json_bytes, write_atomic};
use jamming_core::{
    clt_study, er_error_bound, er_fluid_closed_form, er_jamming_stats, estimate_jamming, fluid_envelope_check,
    integrate_bounds, integrate_fluid, integrate_variance, run_replications, Model, Replicate, SummaryStats,
};
use serde::Serialize;
use serde_json::json;

use crate::config::ExperimentConfig;

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    write_atomic(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Fluid curve, bound curves and diffusion variance on a uniform grid.
pub fn fluid(cfg: &ExperimentConfig) -> Result<()> {
    let c = cfg.positive_c()?;
    let settings = cfg.ode()?;
    let dt = cfg.output_step.unwrap_or(1e-3);
    if !(dt > 0.0) {
        bail!("output_step must be positive");
    }
    let stats = er_jamming_stats(c)?;
    let bounds = integrate_bounds(c, &settings)?;
    let variance = integrate_variance(c, &settings)?;
    let z = integrate_fluid(|x| c * (1.0 - x), &settings)?;
    let end = bounds.t_upper.max(stats.t_star);
    let steps = (end / dt).ceil() as usize;
    let rows = (0..=steps).map(|i| {
        let t = (i as f64 * dt).min(end);
        let m = (t <= stats.t_star).then(|| variance.m_at(t));
        vec![
            fmt_sig(t),
            fmt_sig(z.value_at(t)),
            fmt_sig(bounds.lower.value_at(t)),
            fmt_sig(bounds.upper.value_at(t)),
            fmt_opt(m),
        ]
    });
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    write(&dir, "fluid.csv", &csv_bytes(&["t", "z_er", "l", "u", "m"], rows)?)?;
    let summary = json!({
        "c": c,
        "T_star": stats.t_star,
        "sigma2": stats.sigma2,
        "T_lower": bounds.t_lower,
        "T_upper": bounds.t_upper,
        "lower_clamp_time": bounds.lower_clamp_time,
        "z_closed_form_at_T_star": er_fluid_closed_form(c, stats.t_star),
    });
    write(&dir, "fluid_summary.json", &json_bytes(&summary)?)?;
    println!(
        "c={c} T*={:.6} T_lower={:.6} T_upper={:.6} sigma2={:.6}",
        stats.t_star, bounds.t_lower, bounds.t_upper, stats.sigma2
    );
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary {
    model: Model,
    n: usize,
    c: Option<f64>,
    seed: u64,
    replications: usize,
    /// `T_Z / N` per replicate.
    t_z: Vec<f64>,
    t_u: Option<Vec<f64>>,
    t_l: Option<Vec<f64>>,
    sandwich_holds: Option<bool>,
    saturated_steps: Option<usize>,
    stats: Option<SummaryStats>,
}

/// Trace of replicate 0 plus a summary over all replicates.
pub fn simulate(cfg: &ExperimentConfig) -> Result<()> {
    let c = cfg.c()?;
    let spec = cfg.run_spec(c)?;
    let runs = run_replications(&spec)?;
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let trace = match &runs[0] {
        Replicate::Coupled(run) => coupled_trace_csv(run)?,
        Replicate::Trajectory(t) => csv_bytes(
            &["step", "Z"],
            t.z_values().iter().enumerate().map(|(i, z)| vec![i.to_string(), z.to_string()]),
        )?,
    };
    write(&dir, "trace.csv", &trace)?;

    let t_z: Vec<f64> = runs.iter().map(|r| r.trajectory().jamming_fraction()).collect();
    let coupled: Vec<_> = runs
        .iter()
        .filter_map(|r| match r {
            Replicate::Coupled(c) => Some(c),
            _ => None,
        })
        .collect();
    let is_coupled = !coupled.is_empty();
    let summary = SimulateSummary {
        model: spec.model,
        n: runs[0].trajectory().n_total(),
        c: Some(c),
        seed: spec.base_seed,
        replications: runs.len(),
        t_u: is_coupled.then(|| coupled.iter().map(|r| r.u.jamming_fraction()).collect()),
        t_l: is_coupled.then(|| coupled.iter().map(|r| r.l.jamming_fraction()).collect()),
        sandwich_holds: is_coupled.then(|| coupled.iter().all(|r| r.sandwich_holds())),
        saturated_steps: is_coupled.then(|| coupled.iter().map(|r| r.saturated_steps.len()).sum()),
        stats: if t_z.len() >= 2 {
            Some(SummaryStats::from_samples(&t_z, spec.level)?)
        } else {
            None
        },
        t_z,
    };
    write(&dir, "summary.json", &json_bytes(&summary)?)?;
    println!("T_Z/N = {:?}", summary.t_z.first());
    if summary.sandwich_holds == Some(false) {
        bail!("coupling sandwich violated; see summary.json");
    }
    Ok(())
}

pub fn figure1_defaults() -> ExperimentConfig {
    ExperimentConfig {
        model: Some(Model::Coupled),
        c: Some(1.4),
        n: Some(2000),
        ..Default::default()
    }
}

pub fn default_figure2_grid() -> Vec<f64> {
    (1..=12).map(|i| 0.25 * i as f64).collect()
}

/// Jamming-constant means with confidence intervals against the bounds and
/// the Erdős–Rényi curve, one row per `c`.
pub fn figure2(cfg: &ExperimentConfig) -> Result<()> {
    let grid = cfg.grid.clone().unwrap_or_else(default_figure2_grid);
    if grid.is_empty() || grid.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
        bail!("every grid value of c must be > 0");
    }
    let settings = cfg.ode()?;
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &c) in grid.iter().enumerate() {
        let mut spec = cfg.run_spec(c)?;
        spec.base_seed = cfg.seed().wrapping_add(i as u64);
        let bounds = integrate_bounds(c, &settings)?;
        let s = estimate_jamming(&spec)?;
        let t_er = er_jamming_stats(c)?.t_star;
        eprintln!(
            "c={c}: T_lower={:.4} mean={:.4} T_upper={:.4} T_er={:.4}",
            bounds.t_lower, s.mean, bounds.t_upper, t_er
        );
        rows.push(vec![
            fmt_sig(c),
            fmt_sig(bounds.t_lower),
            fmt_sig(bounds.t_upper),
            fmt_sig(t_er),
            fmt_sig(s.mean),
            fmt_opt(s.ci_low),
            fmt_opt(s.ci_high),
        ]);
    }
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let header = ["c", "T_lower", "T_upper", "T_er", "rsa_mean", "ci_low", "ci_high"];
    write(&dir, "figure2.csv", &csv_bytes(&header, rows)?)
}

/// Standardised hitting times against the Gaussian limit.
pub fn clt(cfg: &ExperimentConfig) -> Result<()> {
    let c = cfg.positive_c()?;
    let spec = cfg.run_spec(c)?;
    if spec.model != Model::ErChain && spec.model != Model::ErGraph {
        bail!("clt needs an Erdős–Rényi model (er-chain or er-graph)");
    }
    let stats = er_jamming_stats(c)?;
    let report = clt_study(&spec, stats.t_star, stats.sigma2)?;
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let rows = report
        .samples
        .iter()
        .enumerate()
        .map(|(i, w)| vec![i.to_string(), fmt_sig(*w)]);
    write(&dir, "clt_samples.csv", &csv_bytes(&["replicate", "w"], rows)?)?;
    let summary = json!({
        "c": c,
        "n": cfg.n()?,
        "replications": report.samples.len(),
        "T_star": stats.t_star,
        "target_sigma2": report.target_sigma2,
        "mean": report.mean,
        "variance": report.variance,
        "ks": report.ks,
    });
    write(&dir, "clt.json", &json_bytes(&summary)?)
}

/// Sup-deviations from the fluid limit against the explicit error bound.
pub fn envelope(cfg: &ExperimentConfig) -> Result<()> {
    let c = cfg.positive_c()?;
    let spec = cfg.run_spec(c)?;
    if spec.model != Model::ErChain && spec.model != Model::ErGraph {
        bail!("envelope needs an Erdős–Rényi model (er-chain or er-graph)");
    }
    let horizon = cfg.horizon.unwrap_or(1.0);
    let deltas = cfg.deltas.clone().unwrap_or_else(|| vec![0.05, 0.1]);
    let curve = integrate_fluid(|x| c * (1.0 - x), &cfg.ode()?)?;
    let bound = er_error_bound(cfg.n()?, c, horizon)?;
    let report = fluid_envelope_check(&spec, &curve, &bound, &deltas)?;
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    let rows = report
        .sup_deviations
        .iter()
        .enumerate()
        .map(|(i, d)| vec![i.to_string(), fmt_sig(*d)]);
    write(&dir, "envelope.csv", &csv_bytes(&["replicate", "sup_deviation"], rows)?)?;
    let summary = json!({
        "c": c,
        "n": bound.n,
        "horizon": horizon,
        "omega_n": report.omega_n,
        "l2_mean": report.l2_mean,
        "l2_within_bound": report.l2_within_bound,
        "tails": report.tails,
    });
    write(&dir, "envelope.json", &json_bytes(&summary)?)
}
