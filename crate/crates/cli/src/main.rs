use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vnoise_cli::{
    experiments, write_outputs, CliError, ConfigOverrides, Experiment, ExperimentConfig,
};
use vnoise_core::metrics::Oracle;

#[derive(Parser)]
#[command(
    name = "vnoise",
    version,
    about = "Reproduce vertex-noise spectral experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Extremal motif shifts against the Weyl limit.
    Table1,
    /// Edge-length correlations of the three-spoke motif.
    EdgeCorrelation,
    /// S3I: scale parameter c.
    S3iPanelA,
    /// S3I: clip radius r_max.
    S3iPanelB,
    /// S3I: heterogeneous vs uniform motifs.
    S3iPanelC,
    /// S3I: unconstrained vs repaired embedding.
    S3iPanelD,
    /// Weighted-degree change against hub direction.
    AngularSweep,
    /// Repair the unconstrained reference graph.
    RepairDemo,
    /// Tune the tempering rate for each (c, r_max).
    Calibrate,
    /// Write the reference graphs.
    ExportGraphs,
}

impl Command {
    fn experiment(&self) -> Experiment {
        match self {
            Self::Table1 => Experiment::Table1,
            Self::EdgeCorrelation => Experiment::EdgeCorrelation,
            Self::S3iPanelA => Experiment::S3iPanelA,
            Self::S3iPanelB => Experiment::S3iPanelB,
            Self::S3iPanelC => Experiment::S3iPanelC,
            Self::S3iPanelD => Experiment::S3iPanelD,
            Self::AngularSweep => Experiment::AngularSweep,
            Self::RepairDemo => Experiment::RepairDemo,
            Self::Calibrate => Experiment::Calibrate,
            Self::ExportGraphs => Experiment::ExportGraphs,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long = "c", value_delimiter = ',', global = true)]
    c_values: Option<Vec<f64>>,
    #[arg(long = "r-max", value_delimiter = ',', global = true)]
    r_max_values: Option<Vec<f64>>,
    #[arg(long = "epsilons", value_delimiter = ',', global = true)]
    epsilon_values: Option<Vec<f64>>,
    #[arg(long, global = true)]
    runs: Option<usize>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    k: Option<f64>,
    #[arg(long, global = true)]
    spacing: Option<f64>,
    #[arg(long, global = true)]
    radius: Option<f64>,
    #[arg(long = "n-mc", global = true)]
    n_mc: Option<usize>,
    #[arg(long = "calibration-tol", global = true)]
    calibration_tol: Option<f64>,
    #[arg(long = "grid-points", global = true)]
    grid_points: Option<usize>,
    #[arg(long, global = true)]
    jitters: Option<usize>,
    #[arg(long, global = true)]
    permutations: Option<usize>,
    /// Use weak-oracle (noisy-vs-noisy) distances.
    #[arg(long, global = true)]
    weak_oracle: bool,
}

impl Common {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            experiment: None,
            seed: self.seed,
            output_dir: self.out.clone(),
            c_values: self.c_values.clone(),
            r_max_values: self.r_max_values.clone(),
            epsilon_values: self.epsilon_values.clone(),
            runs: self.runs,
            samples: self.samples,
            alpha: self.alpha,
            delta: self.delta,
            epsilon: self.epsilon,
            k: self.k,
            spacing: self.spacing,
            radius: self.radius,
            n_mc: self.n_mc,
            calibration_tol: self.calibration_tol,
            grid_points: self.grid_points,
            jitters: self.jitters,
            permutations: self.permutations,
            oracle: self.weak_oracle.then_some(Oracle::Weak),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("reproduction failed: {failures} mismatch(es)");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<usize, CliError> {
    let file = match &cli.common.config {
        Some(path) => ConfigOverrides::from_json(&std::fs::read_to_string(path)?)?,
        None => ConfigOverrides::default(),
    };
    let cfg = ExperimentConfig::resolve(cli.command.experiment(), &file, &cli.common.overrides())?;
    let output = experiments::run(&cfg)?;
    write_outputs(&cfg.output_dir, &cfg, &output)?;
    for f in &output.failures {
        eprintln!("{f}");
    }
    println!(
        "{}: wrote {} artifact(s) to {}",
        cfg.experiment.name(),
        output.artifacts.len(),
        cfg.output_dir.display()
    );
    Ok(output.failures.len())
}
