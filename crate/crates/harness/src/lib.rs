//! Command-line harness for the balancelab solvers: configuration, dispatch and
//! artifact writing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use clap::{Parser, Subcommand};
use config::{
    ApSection, CompareSection, ConvergenceSection, EffectiveSection, ExperimentConfig, HllSection, ModelSection,
    ModelsCheckSection, ParabolicSection, SpacetimeSection,
};
use error::HarnessError;
use output::{write_sidecar, Sidecar, Table};
use std::path::PathBuf;
use std::time::Instant;

pub use error::HarnessError as Error;

#[derive(Debug, Parser)]
#[command(name = "balancelab", version, about = "Relaxation and spacetime finite-volume experiments")]
pub struct Cli {
    /// TOML file with one table per subcommand; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for sampled states, random initial data and jittered meshes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory receiving the CSV tables and the JSON sidecar.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the structural conditions of one or all models on seeded samples.
    ModelsCheck {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: ModelsCheckSection,
    },
    /// Tabulate the assembled effective diffusion matrix on a grid of equilibria.
    Effective {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: EffectiveSection,
    },
    /// Homogeneous HLL run without relaxation.
    RunHll {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: HllSection,
    },
    /// Late-time asymptotic-preserving run.
    RunAp {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: ApSection,
    },
    /// Explicit solve of the closed-form effective equation.
    RunParabolic {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: ParabolicSection,
    },
    /// L¹ distance between late-time runs and the effective equation for several ε.
    CompareAsymptotic {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: CompareSection,
    },
    /// Spacetime finite-volume run on a slab mesh of S¹ × [0, T].
    RunSpacetime {
        #[command(flatten)]
        section: SpacetimeSection,
    },
    /// Grid convergence study.
    Convergence {
        #[command(flatten)]
        model: ModelSection,
        #[command(flatten)]
        section: ConvergenceSection,
    },
}

/// Tables produced by a subcommand plus the resolved configuration.
#[derive(Debug)]
pub struct Outcome {
    pub subcommand: &'static str,
    pub config: serde_json::Value,
    pub tables: Vec<(String, Table)>,
    /// Reported after the tables are written.
    pub failure: Option<HarnessError>,
}

impl Outcome {
    pub fn new(subcommand: &'static str, config: serde_json::Value) -> Self {
        Self { subcommand, config, tables: Vec::new(), failure: None }
    }

    pub fn add(&mut self, file: impl Into<String>, table: Table) {
        self.tables.push((file.into(), table));
    }
}

fn merge_model(cli: ModelSection, file: &ExperimentConfig) -> ModelSection {
    cli.merged(file.model.as_ref())
}

/// Runs a parsed command line; returns the names of the files written.
pub fn run(cli: Cli) -> Result<Vec<String>, HarnessError> {
    let file = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let start = Instant::now();
    let outcome = match cli.command {
        Command::ModelsCheck { model, section } => {
            let model = merge_model(model, &file);
            experiments::models_check(&model, &section.merged(file.models_check.as_ref()), seed)?
        }
        Command::Effective { model, section } => {
            experiments::effective(&merge_model(model, &file), &section.merged(file.effective.as_ref()))?
        }
        Command::RunHll { model, section } => {
            experiments::run_hll(&merge_model(model, &file), &section.merged(file.run_hll.as_ref()), seed)?
        }
        Command::RunAp { model, section } => {
            experiments::run_ap(&merge_model(model, &file), &section.merged(file.run_ap.as_ref()), seed)?
        }
        Command::RunParabolic { model, section } => experiments::run_parabolic(
            &merge_model(model, &file),
            &section.merged(file.run_parabolic.as_ref()),
            seed,
        )?,
        Command::CompareAsymptotic { model, section } => experiments::compare_asymptotic(
            &merge_model(model, &file),
            &section.merged(file.compare_asymptotic.as_ref()),
            seed,
        )?,
        Command::RunSpacetime { section } => {
            experiments::run_spacetime(&section.merged(file.run_spacetime.as_ref()), seed)?
        }
        Command::Convergence { model, section } => {
            experiments::convergence(&merge_model(model, &file), &section.merged(file.convergence.as_ref()), seed)?
        }
    };
    std::fs::create_dir_all(&cli.out).map_err(|e| HarnessError::io(&cli.out, e))?;
    let mut outputs = Vec::new();
    for (name, table) in &outcome.tables {
        table.write(&cli.out.join(name))?;
        outputs.push(name.clone());
    }
    let stem = outputs
        .first()
        .map(|n| n.trim_end_matches(".csv").to_string())
        .unwrap_or_else(|| outcome.subcommand.to_string());
    let sidecar_name = format!("{stem}.json");
    let sidecar = Sidecar {
        schema_version: output::SCHEMA_VERSION,
        subcommand: outcome.subcommand,
        seed,
        config: &outcome.config,
        versions: output::versions(),
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        outputs: outputs.clone(),
    };
    write_sidecar(&cli.out.join(&sidecar_name), &sidecar)?;
    outputs.push(sidecar_name);
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(outputs),
    }
}
