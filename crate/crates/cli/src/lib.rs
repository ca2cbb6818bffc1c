//! `netloc`: generate networks, build constraints, localize and verify.
//!
//! Artifacts are written to `--out` (default: `$NETLOC_OUT_DIR`, else the
//! current directory):
//!
//! | command       | files                                              |
//! |---------------|----------------------------------------------------|
//! | `generate`    | `network.json`                                     |
//! | `constraints` | `constraints.json`                                 |
//! | `localize`    | `positions.csv`, `report.json`                     |
//! | `verify`      | `verify.json`                                      |
//! | `pipeline`    | all of the above                                   |
//!
//! Exit codes: 0 ok, 2 validation, 3 unlocalizable, 4 tolerance breach.
//! Failures print one JSON object on stderr.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;
pub mod schema;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use netloc_core::geom::MeasurementKind;
use netloc_core::localization::DistributedParams;

use commands::{
    cmd_constraints, cmd_generate, cmd_localize, cmd_pipeline, cmd_verify, ConstraintOptions, SolverChoice,
};
use error::CliError;
use scenario::{GraphModel, MeasurementKindName, ScenarioConfig};
use schema::{ConstraintsFile, NetworkFile};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "NETLOC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "netloc", version, about = "Displacement-constraint network localization")]
pub struct Cli {
    /// Output directory (default: $NETLOC_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random network with truth and synthetic measurements.
    Generate(ScenarioArgs),
    /// Build displacement constraints from a network file.
    Constraints(ConstraintArgs),
    /// Solve for free-node positions.
    Localize(LocalizeArgs),
    /// Check constraint residuals, invariances and angle recovery on truth.
    Verify(VerifyArgs),
    /// generate, constraints, localize and verify in one run.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    RelativePosition,
    Distance,
    Ratio,
    Bearing,
    Angle,
}

impl From<Kind> for MeasurementKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::RelativePosition => MeasurementKind::RelativePosition,
            Kind::Distance => MeasurementKind::Distance,
            Kind::Ratio => MeasurementKind::RatioOfDistance,
            Kind::Bearing => MeasurementKind::LocalBearing,
            Kind::Angle => MeasurementKind::Angle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Complete,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Global,
    Distributed,
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario configuration as JSON; flags below are then ignored.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 34)]
    pub nodes: usize,
    #[arg(long, default_value_t = 4)]
    pub anchors: usize,
    #[arg(long, value_enum, default_value_t = GraphKind::Geometric)]
    pub graph: GraphKind,
    #[arg(long, default_value_t = 0.7)]
    pub radius: f64,
    #[arg(long, value_enum, default_value_t = Kind::Distance)]
    pub kind: Kind,
    #[arg(long)]
    pub coplanar: bool,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum tuples per center node (0 = unlimited).
    #[arg(long, default_value_t = 12)]
    pub max_tuples: usize,
    #[arg(long, default_value_t = 64)]
    pub max_attempts: usize,
}

impl ScenarioArgs {
    pub fn config(&self) -> Result<ScenarioConfig, CliError> {
        if let Some(path) = &self.config {
            let text = read(path)?;
            return serde_json::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())));
        }
        let graph = match self.graph {
            GraphKind::Complete => GraphModel::Complete,
            GraphKind::Geometric => GraphModel::RandomGeometric { radius: self.radius },
        };
        Ok(ScenarioConfig {
            nodes: self.nodes,
            anchors: self.anchors,
            graph,
            kind: MeasurementKindName(self.kind.into()),
            coplanar: self.coplanar,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
            max_tuples_per_node: (self.max_tuples > 0).then_some(self.max_tuples),
            max_attempts: self.max_attempts,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConstraintArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Defaults to the kind stored in the network file.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    #[arg(long)]
    pub coplanar: bool,
    /// Noise for measurements synthesized from truth.
    #[arg(long, default_value_t = 0.0)]
    pub noise_sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 12)]
    pub max_tuples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Solver::Global)]
    pub solver: Solver,
    #[arg(long, default_value_t = DistributedParams::default().max_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DistributedParams::default().step)]
    pub step: f64,
    #[arg(long, default_value_t = DistributedParams::default().tol)]
    pub tol: f64,
    /// Include wall-clock timings in the report (breaks byte-determinism).
    #[arg(long)]
    pub timings: bool,
}

impl SolverArgs {
    pub fn choice(&self) -> SolverChoice {
        match self.solver {
            Solver::Global => SolverChoice::Global,
            Solver::Distributed => SolverChoice::Distributed(DistributedParams {
                max_iters: self.max_iters,
                step: self.step,
                tol: self.tol,
            }),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LocalizeArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub constraints: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub constraints: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Run one parsed invocation; the returned string goes to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let out = out_dir(cli);
    let finish = |summary: String, failure: Option<CliError>| match failure {
        Some(f) => Err(f),
        None => Ok(summary),
    };
    match &cli.command {
        Command::Generate(a) => {
            let net = cmd_generate(&a.config()?)?;
            write(&out, "network.json", &net.to_json())?;
            Ok(format!("wrote {} nodes, {} edges\n", net.nodes.len(), net.edges.len()))
        }
        Command::Constraints(a) => {
            let net = NetworkFile::parse(&read(&a.network)?)?;
            let opts = ConstraintOptions {
                kind: a.kind.map(Into::into),
                coplanar: a.coplanar,
                noise_sigma: a.noise_sigma,
                seed: a.seed,
                max_tuples_per_node: (a.max_tuples > 0).then_some(a.max_tuples),
            };
            let (file, diag, failure) = cmd_constraints(&net, &opts)?;
            write(&out, "constraints.json", &file.to_json())?;
            let summary = serde_json::to_string(&diag).expect("diagnostics serialize") + "\n";
            finish(summary, failure)
        }
        Command::Localize(a) => {
            let net = NetworkFile::parse(&read(&a.network)?)?;
            let cons = ConstraintsFile::parse(&read(&a.constraints)?)?;
            let (res, failure) = cmd_localize(&net, &cons, &a.solver.choice(), a.solver.timings)?;
            write(&out, "positions.csv", &res.csv)?;
            write(&out, "report.json", &res.report.to_json())?;
            finish(res.report.to_json(), failure)
        }
        Command::Verify(a) => {
            let net = NetworkFile::parse(&read(&a.network)?)?;
            let cons = ConstraintsFile::parse(&read(&a.constraints)?)?;
            let (rep, failure) = cmd_verify(&net, &cons)?;
            write(&out, "verify.json", &rep.to_json())?;
            finish(rep.to_json(), failure)
        }
        Command::Pipeline(a) => {
            let (res, failure) = cmd_pipeline(&a.scenario.config()?, &a.solver.choice(), a.solver.timings)?;
            write(&out, "network.json", &res.network.to_json())?;
            write(&out, "constraints.json", &res.constraints.to_json())?;
            let mut summary = String::new();
            if let Some(loc) = &res.localize {
                write(&out, "positions.csv", &loc.csv)?;
                write(&out, "report.json", &loc.report.to_json())?;
                summary = loc.report.to_json();
            }
            if let Some(v) = &res.verify {
                write(&out, "verify.json", &v.to_json())?;
            }
            finish(summary, failure)
        }
    }
}
