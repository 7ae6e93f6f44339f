//! Experiment configuration: built-in defaults, then the JSON config file,
//! then command-line overrides.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use vnoise_core::metrics::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Table1,
    EdgeCorrelation,
    S3iPanelA,
    S3iPanelB,
    S3iPanelC,
    S3iPanelD,
    AngularSweep,
    RepairDemo,
    Calibrate,
    ExportGraphs,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Self::Table1,
        Self::EdgeCorrelation,
        Self::S3iPanelA,
        Self::S3iPanelB,
        Self::S3iPanelC,
        Self::S3iPanelD,
        Self::AngularSweep,
        Self::RepairDemo,
        Self::Calibrate,
        Self::ExportGraphs,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::EdgeCorrelation => "edge_correlation",
            Self::S3iPanelA => "s3i_panel_a",
            Self::S3iPanelB => "s3i_panel_b",
            Self::S3iPanelC => "s3i_panel_c",
            Self::S3iPanelD => "s3i_panel_d",
            Self::AngularSweep => "angular_sweep",
            Self::RepairDemo => "repair_demo",
            Self::Calibrate => "calibrate",
            Self::ExportGraphs => "export_graphs",
        }
    }
}

/// Fully resolved settings. Fields irrelevant to an experiment keep their
/// defaults and are still hashed, so the hash identifies the whole run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Noise scales compared or swept.
    pub c_values: Vec<f64>,
    /// Clip radii compared or swept.
    pub r_max_values: Vec<f64>,
    /// Clearance values swept by the correlation study.
    pub epsilon_values: Vec<f64>,
    pub runs: usize,
    pub samples: usize,
    pub alpha: f64,
    pub delta: f64,
    /// Clearance used by repair.
    pub epsilon: f64,
    /// Hub–spoke length.
    pub k: f64,
    /// Hub spacing of the reference scaffolds.
    pub spacing: f64,
    /// Displacement radius for deterministic motif experiments.
    pub radius: f64,
    pub n_mc: usize,
    pub calibration_tol: f64,
    pub grid_points: usize,
    pub jitters: usize,
    pub permutations: usize,
    pub oracle: Oracle,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment, seed: u64) -> Self {
        let mut cfg = Self {
            experiment,
            seed,
            output_dir: PathBuf::from("out"),
            c_values: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            r_max_values: vec![40.0],
            epsilon_values: vec![0.0, 10.0, 25.0, 50.0],
            runs: 100,
            samples: 200,
            alpha: 0.05,
            delta: 0.05,
            epsilon: 10.0,
            k: 100.0,
            spacing: 300.0,
            radius: 50.0,
            n_mc: 400_000,
            calibration_tol: 5e-4,
            grid_points: 121,
            jitters: 50,
            permutations: 200,
            oracle: Oracle::Strong,
        };
        match experiment {
            Experiment::Table1 => {
                cfg.k = 2.0;
                cfg.radius = 1.0;
            }
            Experiment::EdgeCorrelation => {
                cfg.r_max_values = vec![50.0];
                cfg.samples = 500;
            }
            Experiment::S3iPanelB => {
                cfg.c_values = vec![1.0];
                cfg.r_max_values = vec![10.0, 20.0, 30.0, 40.0, 50.0];
            }
            Experiment::Calibrate => {
                cfg.r_max_values = vec![10.0, 20.0, 30.0, 40.0, 50.0];
            }
            _ => {}
        }
        cfg
    }

    /// Resolves defaults ← file ← command line. The seed must come from one
    /// of the two sources.
    pub fn resolve(
        experiment: Experiment,
        file: &ConfigOverrides,
        cli: &ConfigOverrides,
    ) -> Result<Self> {
        if let Some(e) = file.experiment {
            if e != experiment {
                return Err(CliError::Config(format!(
                    "config file is for {} but {} was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let seed = cli.seed.or(file.seed).ok_or_else(|| {
            CliError::Config("a seed is required (--seed or \"seed\" in the config)".into())
        })?;
        let mut cfg = Self::defaults(experiment, seed);
        file.apply(&mut cfg);
        cli.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |xs: &[f64]| xs.iter().all(|&x| x > 0.0 && x.is_finite());
        let bad = |m: &str| Err(CliError::Config(m.into()));
        if self.c_values.is_empty() || !positive(&self.c_values) {
            return bad("c_values must be a nonempty list of positive numbers");
        }
        if self.r_max_values.is_empty() || !positive(&self.r_max_values) {
            return bad("r_max_values must be a nonempty list of positive numbers");
        }
        if self.epsilon_values.is_empty()
            || self
                .epsilon_values
                .iter()
                .any(|&e| !(e >= 0.0 && e.is_finite()))
        {
            return bad("epsilon_values must be a nonempty list of nonnegative numbers");
        }
        if self.runs < 2 || self.samples < 2 {
            return bad("runs and samples must be at least 2");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) || !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("alpha and delta must lie in (0, 1)");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be nonnegative");
        }
        if !positive(&[self.k, self.spacing, self.radius, self.calibration_tol]) {
            return bad("k, spacing, radius and calibration_tol must be positive");
        }
        if self.n_mc == 0 || self.grid_points < 2 || self.permutations < 2 {
            return bad("n_mc must be positive, grid_points and permutations at least 2");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of everything but the output directory.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Optional settings; the schema of `--config` files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub c_values: Option<Vec<f64>>,
    pub r_max_values: Option<Vec<f64>>,
    pub epsilon_values: Option<Vec<f64>>,
    pub runs: Option<usize>,
    pub samples: Option<usize>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    pub k: Option<f64>,
    pub spacing: Option<f64>,
    pub radius: Option<f64>,
    pub n_mc: Option<usize>,
    pub calibration_tol: Option<f64>,
    pub grid_points: Option<usize>,
    pub jitters: Option<usize>,
    pub permutations: Option<usize>,
    pub oracle: Option<Oracle>,
}

impl ConfigOverrides {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f {
                    cfg.$f = v.clone();
                }
            )*};
        }
        set!(
            output_dir,
            c_values,
            r_max_values,
            epsilon_values,
            runs,
            samples,
            alpha,
            delta,
            epsilon,
            k,
            spacing,
            radius,
            n_mc,
            calibration_tol,
            grid_points,
            jitters,
            permutations,
            oracle
        );
    }
}
