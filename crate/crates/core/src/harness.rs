//! Replicated runs and the statistical checks built on them.
//!
//! Replicate `i` always draws from `replicate_rng(base_seed, i)`, and results
//! are collected in index order, so the output does not depend on how rayon
//! schedules the work.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exploration::{explore_graph, simulate_er_chain, Trajectory};
use crate::fluid::{ErrorBoundReport, FluidCurve, VarianceCurve};
use crate::graph::{sample_er_graph, sample_point_cloud, BoxGeometry, CountMode, ErParams};
use crate::rng::{replicate_rng, SimRng};
use crate::rsa::{run_coupled, run_rsa, CoupledRun, RsaConfig, RsaRun};
use crate::stats::{ks_normal, KsResult, SummaryStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    ErChain,
    ErGraph,
    Rsa,
    Coupled,
}

impl Model {
    pub fn is_spatial(self) -> bool {
        matches!(self, Model::Rsa | Model::Coupled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ModelParams {
    Er(ErParams),
    Spatial {
        geometry: BoxGeometry,
        count: CountMode,
        rsa: RsaConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub model: Model,
    pub params: ModelParams,
    pub replications: usize,
    pub base_seed: u64,
    pub level: f64,
}

impl RunSpec {
    pub fn er(model: Model, params: ErParams, replications: usize, base_seed: u64) -> Self {
        Self {
            model,
            params: ModelParams::Er(params),
            replications,
            base_seed,
            level: 0.99,
        }
    }

    pub fn spatial(model: Model, geometry: BoxGeometry, replications: usize, base_seed: u64) -> Self {
        Self {
            model,
            params: ModelParams::Spatial {
                geometry,
                count: CountMode::Fixed,
                rsa: RsaConfig::default(),
            },
            replications,
            base_seed,
            level: 0.99,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InsufficientReplications { required: 1, got: 0 });
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(invalid(format!("confidence level must lie in (0, 1), got {}", self.level)));
        }
        match (&self.params, self.model.is_spatial()) {
            (ModelParams::Er(_), false) | (ModelParams::Spatial { .. }, true) => Ok(()),
            _ => Err(invalid(format!("parameters do not match model {:?}", self.model))),
        }
    }

    fn er_params(&self) -> Result<&ErParams> {
        match &self.params {
            ModelParams::Er(p) => Ok(p),
            _ => Err(invalid("model needs Erdős–Rényi parameters")),
        }
    }

    fn spatial_params(&self) -> Result<(&BoxGeometry, CountMode, &RsaConfig)> {
        match &self.params {
            ModelParams::Spatial { geometry, count, rsa } => Ok((geometry, *count, rsa)),
            _ => Err(invalid("model needs box geometry")),
        }
    }
}

/// Runs `f` once per replicate on its own stream, in parallel, returning
/// results in replicate order.
pub fn replicate<T: Send>(
    replications: usize,
    base_seed: u64,
    f: impl Fn(&mut SimRng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..replications)
        .into_par_iter()
        .map(|i| f(&mut replicate_rng(base_seed, i as u64)))
        .collect()
}

/// One replicate of any model.
#[derive(Debug, Clone)]
pub enum Replicate {
    Trajectory(Trajectory),
    Coupled(Box<CoupledRun>),
}

impl Replicate {
    /// The original process `Z`.
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            Replicate::Trajectory(t) => t,
            Replicate::Coupled(c) => &c.z,
        }
    }
}

pub fn run_replications(spec: &RunSpec) -> Result<Vec<Replicate>> {
    spec.validate()?;
    match spec.model {
        Model::Coupled => Ok(run_coupled_replications(spec)?
            .into_iter()
            .map(|c| Replicate::Coupled(Box::new(c)))
            .collect()),
        _ => Ok(run_trajectories(spec)?.into_iter().map(Replicate::Trajectory).collect()),
    }
}

/// `Z` trajectories for any model.
pub fn run_trajectories(spec: &RunSpec) -> Result<Vec<Trajectory>> {
    spec.validate()?;
    match spec.model {
        Model::ErChain => {
            let p = *spec.er_params()?;
            replicate(spec.replications, spec.base_seed, |rng| Ok(simulate_er_chain(&p, rng)))
        }
        Model::ErGraph => {
            let p = *spec.er_params()?;
            replicate(spec.replications, spec.base_seed, |rng| {
                let g = sample_er_graph(&p, rng);
                explore_graph(&g, rng)
            })
        }
        Model::Rsa => Ok(run_rsa_replications(spec)?.into_iter().map(|r| r.trajectory).collect()),
        Model::Coupled => Ok(run_coupled_replications(spec)?.into_iter().map(|r| r.z).collect()),
    }
}

/// Full RSA runs (cloud sampled then explored on the replicate stream).
pub fn run_rsa_replications(spec: &RunSpec) -> Result<Vec<RsaRun>> {
    spec.validate()?;
    let (geom, count, config) = spec.spatial_params()?;
    replicate(spec.replications, spec.base_seed, |rng| {
        let cloud = sample_point_cloud(geom, count, rng)?;
        run_rsa(&cloud, geom, config, rng)
    })
}

/// Coupled runs; their `Z` component equals the matching `run_rsa_replications` run.
pub fn run_coupled_replications(spec: &RunSpec) -> Result<Vec<CoupledRun>> {
    spec.validate()?;
    let (geom, count, config) = spec.spatial_params()?;
    replicate(spec.replications, spec.base_seed, |rng| {
        let cloud = sample_point_cloud(geom, count, rng)?;
        run_coupled(&cloud, geom, config, rng)
    })
}

/// Summary of `T*_N / N` over the replicates.
pub fn estimate_jamming(spec: &RunSpec) -> Result<SummaryStats> {
    let fractions: Vec<f64> = run_trajectories(spec)?.iter().map(Trajectory::jamming_fraction).collect();
    SummaryStats::from_samples(&fractions, spec.level)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    /// `sqrt(N) (T*_N/N - T*)` per replicate.
    pub samples: Vec<f64>,
    pub mean: f64,
    pub variance: Option<f64>,
    pub target_sigma2: f64,
    /// `None` when the target variance is 0.
    pub ks: Option<KsResult>,
}

pub fn clt_study(spec: &RunSpec, t_star: f64, sigma2: f64) -> Result<CltReport> {
    let trajs = run_trajectories(spec)?;
    let samples: Vec<f64> = trajs
        .iter()
        .map(|t| (t.n_total() as f64).sqrt() * (t.jamming_fraction() - t_star))
        .collect();
    let summary = SummaryStats::from_samples(&samples, spec.level)?;
    let ks = if sigma2 > 0.0 { Some(ks_normal(&samples, sigma2)?) } else { None };
    Ok(CltReport {
        samples,
        mean: summary.mean,
        variance: summary.variance,
        target_sigma2: sigma2,
        ks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub delta: f64,
    pub empirical: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    pub sup_deviations: Vec<f64>,
    /// `sqrt(mean(sup^2))`.
    pub l2_mean: f64,
    pub omega_n: f64,
    pub l2_within_bound: bool,
    pub tails: Vec<TailCheck>,
}

/// Compares sup-deviations from `curve` on `[0, bound.horizon]` with
/// `omega_N`, and the hitting-time tail with `2 omega_N / delta`.
pub fn fluid_envelope_check(
    spec: &RunSpec,
    curve: &FluidCurve,
    bound: &ErrorBoundReport,
    deltas: &[f64],
) -> Result<EnvelopeReport> {
    let t_star = curve.hitting_time.ok_or(Error::NoHit(*curve.grid.last().unwrap_or(&0.0)))?;
    let trajs = run_trajectories(spec)?;
    if let Some(t) = trajs.iter().find(|t| t.n_total() != bound.n) {
        return Err(Error::SizeMismatch {
            expected: bound.n,
            got: t.n_total(),
        });
    }
    let sup_deviations: Vec<f64> = trajs
        .iter()
        .map(|t| t.scaled().sup_deviation(|s| curve.value_at(s), bound.horizon))
        .collect();
    let r = sup_deviations.len() as f64;
    let l2_mean = (sup_deviations.iter().map(|d| d * d).sum::<f64>() / r).sqrt();
    let tails = deltas
        .iter()
        .map(|&delta| {
            let hits = trajs
                .iter()
                .filter(|t| (t.jamming_fraction() - t_star).abs() >= delta)
                .count();
            let empirical = hits as f64 / r;
            let b = bound.deviation_bound(delta);
            TailCheck {
                delta,
                empirical,
                bound: b,
                holds: empirical <= b,
            }
        })
        .collect();
    Ok(EnvelopeReport {
        sup_deviations,
        l2_mean,
        omega_n: bound.omega_n,
        l2_within_bound: l2_mean <= bound.omega_n,
        tails,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub t: f64,
    pub empirical: f64,
    pub target: f64,
    /// `|empirical - target| / target`; infinite when the target is 0 and the
    /// empirical value is not.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionReport {
    pub rows: Vec<VarianceRow>,
}

/// Sample variance of `W^N_t = sqrt(N)(Z^N_t - z(t))` at each `t`, against `m(t)`.
pub fn diffusion_variance_check(spec: &RunSpec, times: &[f64], curve: &VarianceCurve) -> Result<DiffusionReport> {
    let limit = curve.hitting_time.ok_or(Error::NoHit(*curve.grid.last().unwrap_or(&0.0)))?;
    if let Some(&t) = times.iter().find(|&&t| !(t >= 0.0 && t < limit)) {
        return Err(Error::BeyondAbsorption { t, limit });
    }
    let trajs = run_trajectories(spec)?;
    if trajs.len() < 2 {
        return Err(Error::InsufficientReplications {
            required: 2,
            got: trajs.len(),
        });
    }
    let rows = times
        .iter()
        .map(|&t| {
            let z = curve.z_at(t);
            let w: Vec<f64> = trajs
                .iter()
                .map(|tr| (tr.n_total() as f64).sqrt() * (tr.scaled().value_at(t) - z))
                .collect();
            let mean = w.iter().sum::<f64>() / w.len() as f64;
            let empirical = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64;
            let target = curve.m_at(t);
            let relative_gap = if target > 0.0 {
                (empirical - target).abs() / target
            } else if empirical == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            VarianceRow {
                t,
                empirical,
                target,
                relative_gap,
            }
        })
        .collect();
    Ok(DiffusionReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{integrate_variance, er_jamming_stats};
    use crate::ode::OdeSettings;

    fn chain_spec(n: usize, c: f64, reps: usize) -> RunSpec {
        RunSpec::er(Model::ErChain, ErParams::new(n, c).unwrap(), reps, 11)
    }

    #[test]
    fn single_replicate_matches_direct_call() {
        let spec = chain_spec(500, 1.0, 1);
        let runs = run_trajectories(&spec).unwrap();
        let direct = simulate_er_chain(&ErParams::new(500, 1.0).unwrap(), &mut replicate_rng(11, 0));
        assert_eq!(runs, vec![direct]);
    }

    #[test]
    fn replications_are_deterministic() {
        let spec = chain_spec(300, 1.5, 16);
        assert_eq!(run_trajectories(&spec).unwrap(), run_trajectories(&spec).unwrap());
    }

    #[test]
    fn mismatched_params_rejected() {
        let mut spec = chain_spec(10, 1.0, 2);
        spec.model = Model::Rsa;
        assert!(run_replications(&spec).is_err());
        spec.model = Model::ErChain;
        spec.replications = 0;
        assert!(run_replications(&spec).is_err());
    }

    #[test]
    fn estimate_flags_missing_variance() {
        let s = estimate_jamming(&chain_spec(100, 1.0, 1)).unwrap();
        assert!(s.variance.is_none());
    }

    #[test]
    fn tiny_c_gives_fraction_near_one() {
        let s = estimate_jamming(&chain_spec(1000, 1e-6, 10)).unwrap();
        assert!(s.mean > 0.999);
    }

    #[test]
    fn degenerate_clt_concentrates() {
        let spec = chain_spec(200, 0.0, 5);
        let r = clt_study(&spec, 1.0, 0.0).unwrap();
        assert!(r.samples.iter().all(|&x| x == 0.0));
        assert!(r.ks.is_none());
    }

    #[test]
    fn variance_at_zero_is_zero() {
        let curve = integrate_variance(1.0, &OdeSettings::default()).unwrap();
        let r = diffusion_variance_check(&chain_spec(1000, 1.0, 20), &[0.0], &curve).unwrap();
        assert_eq!(r.rows[0].empirical, 0.0);
        assert_eq!(r.rows[0].relative_gap, 0.0);
    }

    #[test]
    fn variance_beyond_absorption_rejected() {
        let curve = integrate_variance(1.0, &OdeSettings::default()).unwrap();
        let t = er_jamming_stats(1.0).unwrap().t_star;
        assert!(matches!(
            diffusion_variance_check(&chain_spec(100, 1.0, 4), &[t + 0.01], &curve),
            Err(Error::BeyondAbsorption { .. })
        ));
    }

    #[test]
    fn envelope_runs_for_small_n() {
        let curve = crate::fluid::integrate_fluid(|z| 1.0 - z, &OdeSettings::default()).unwrap();
        let bound = crate::fluid::er_error_bound(10, 1.0, 1.0).unwrap();
        let r = fluid_envelope_check(&chain_spec(10, 1.0, 30), &curve, &bound, &[0.05, 0.1]).unwrap();
        assert!(bound.omega_n > 1.0);
        assert!(r.l2_within_bound);
        assert!(r.tails.iter().all(|t| t.holds));
    }
}
