use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use jamming_core::{AlphaVolume, BoxGeometry, ErParams, Model, OdeSettings, RsaConfig, RunSpec};
use serde::{Deserialize, Serialize};

/// Experiment record. Every field is optional so a JSON file can pin any
/// subset; command-line flags override the file, and each command supplies
/// its own defaults for whatever is still missing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Option<Model>,
    pub c: Option<f64>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub level: Option<f64>,
    pub ode_step: Option<f64>,
    /// Spacing of the output grid of `fluid`.
    pub output_step: Option<f64>,
    pub dimension: Option<usize>,
    pub intensity: Option<f64>,
    /// Explicit radius and box; when both are set they replace `c` and `n`.
    pub radius: Option<f64>,
    pub side_lengths: Option<Vec<f64>>,
    pub raster_cell_fraction: Option<f64>,
    pub alpha_volume: Option<AlphaVolume>,
    /// `c` values for `figure2`.
    pub grid: Option<Vec<f64>>,
    /// Horizon `T` of the envelope check.
    pub horizon: Option<f64>,
    pub deltas: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `other` win.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            model, c, n, reps, seed, level, ode_step, output_step, dimension, intensity, radius, side_lengths,
            raster_cell_fraction, alpha_volume, grid, horizon, deltas, out
        );
        self
    }

    /// Fills unset fields from `defaults`.
    pub fn with_defaults(self, defaults: ExperimentConfig) -> Self {
        defaults.overlay(self)
    }

    pub fn c(&self) -> Result<f64> {
        let c = self.c.context("c is required")?;
        if !(c.is_finite() && c >= 0.0) {
            bail!("c must be a non-negative number, got {c}");
        }
        Ok(c)
    }

    pub fn positive_c(&self) -> Result<f64> {
        let c = self.c()?;
        if c <= 0.0 {
            bail!("c must be > 0 for this command, got {c}");
        }
        Ok(c)
    }

    pub fn n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => bail!("n must be >= 1, got {n}"),
            None => bail!("n is required"),
        }
    }

    pub fn reps(&self) -> Result<usize> {
        match self.reps.unwrap_or(1) {
            0 => bail!("reps must be >= 1"),
            r => Ok(r),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn level(&self) -> Result<f64> {
        let level = self.level.unwrap_or(0.99);
        if !(level > 0.0 && level < 1.0) {
            bail!("level must lie in (0, 1), got {level}");
        }
        Ok(level)
    }

    pub fn ode(&self) -> Result<OdeSettings> {
        let s = OdeSettings::with_step(self.ode_step.unwrap_or(1e-4));
        s.validate()?;
        Ok(s)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn model(&self) -> Model {
        self.model.unwrap_or(Model::Coupled)
    }

    pub fn rsa_config(&self) -> RsaConfig {
        let mut cfg = RsaConfig::default();
        if let Some(f) = self.raster_cell_fraction {
            cfg.raster_cell_fraction = f;
        }
        if let Some(a) = self.alpha_volume {
            cfg.alpha_volume = a;
        }
        cfg
    }

    pub fn geometry(&self) -> Result<BoxGeometry> {
        let intensity = self.intensity.unwrap_or(1.0);
        let geom = match (self.radius, &self.side_lengths) {
            (Some(r), Some(sides)) => BoxGeometry::new(sides.clone(), intensity, r)?,
            (None, None) => BoxGeometry::with_mean_degree(self.dimension.unwrap_or(2), self.n()?, intensity, self.positive_c()?)?,
            _ => bail!("radius and side_lengths must be given together"),
        };
        Ok(geom)
    }

    /// Replication spec for the configured model with `c` replaced by `c`.
    pub fn run_spec(&self, c: f64) -> Result<RunSpec> {
        let model = self.model();
        let mut spec = if model.is_spatial() {
            let geom = ExperimentConfig { c: Some(c), ..self.clone() }.geometry()?;
            let mut spec = RunSpec::spatial(model, geom, self.reps()?, self.seed());
            if let jamming_core::ModelParams::Spatial { rsa, .. } = &mut spec.params {
                *rsa = self.rsa_config();
            }
            spec
        } else {
            RunSpec::er(model, ErParams::new(self.n()?, c)?, self.reps()?, self.seed())
        };
        spec.level = self.level()?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults_fill_gaps() {
        let file = ExperimentConfig { c: Some(2.0), n: Some(50), ..Default::default() };
        let flags = ExperimentConfig { c: Some(3.0), ..Default::default() };
        let cfg = file.overlay(flags).with_defaults(ExperimentConfig {
            c: Some(1.0),
            reps: Some(7),
            ..Default::default()
        });
        assert_eq!(cfg.c, Some(3.0));
        assert_eq!(cfg.n, Some(50));
        assert_eq!(cfg.reps, Some(7));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"cc": 1}"#).is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"model": "er-chain", "c": 1.5}"#).unwrap();
        assert_eq!(cfg.model, Some(Model::ErChain));
    }
}
