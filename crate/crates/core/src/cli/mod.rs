//! Command-line front end: reads project files, runs the library
//! operations and writes deterministic outputs.
//!
//! Exit codes: 0 success, 1 parse or input error, 2 infeasible design,
//! 3 missing data.

mod commands;
mod config;
mod format;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub use config::{read_text, AngleUnits, ChainSpec, GapSpec, LinkSpec, ProjectConfig};
pub use format::{num, round_sig, to_json};

use crate::fabrication::{FabricationError, Method};
use crate::geometry::GeometryError;
use crate::growth::GrowthError;
use crate::measurement::{MeasurementError, Phase};
use crate::stats::StatsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("infeasible design: {0}")]
    Infeasible(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Io(_) => 1,
            CliError::Infeasible(_) => 2,
            CliError::MissingData(_) => 3,
        }
    }
}

impl From<FabricationError> for CliError {
    fn from(e: FabricationError) -> Self {
        match e {
            FabricationError::Singularity { .. }
            | FabricationError::NearSingular { .. }
            | FabricationError::InfeasibleLength { .. }
            | FabricationError::InfeasibleLink { .. }
            | FabricationError::Inversion { .. }
            | FabricationError::JointInversion { .. } => CliError::Infeasible(e.to_string()),
            FabricationError::Geometry(_) | FabricationError::InvalidInput(_) => {
                CliError::Parse(e.to_string())
            }
        }
    }
}

impl From<MeasurementError> for CliError {
    fn from(e: MeasurementError) -> Self {
        match e {
            MeasurementError::EmptyRecord(_)
            | MeasurementError::NoJoints
            | MeasurementError::MissingMarker { .. }
            | MeasurementError::Degenerate { .. }
            | MeasurementError::TopologyMismatch { .. } => CliError::MissingData(e.to_string()),
            MeasurementError::Geometry(_)
            | MeasurementError::BadLabel(_)
            | MeasurementError::Parse(_) => CliError::Parse(e.to_string()),
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<GrowthError> for CliError {
    fn from(e: GrowthError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vinefab",
    version,
    about = "Fabrication planning and verification for preformed vine robots"
)]
pub struct Cli {
    /// Project file (JSON) naming the chain, gap model and data files.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory (default: the project's output_dir, else `.`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Seed for commands that draw random numbers.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Report angles in degrees (default).
    #[arg(long, global = true, conflicts_with = "rad")]
    pub deg: bool,
    /// Report angles in radians.
    #[arg(long, global = true)]
    pub rad: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ChainArgs {
    /// Chain file (JSON); overrides the project's chain.
    #[arg(long, value_name = "PATH")]
    pub chain: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Fabrication method; overrides the project's gap model.
    #[arg(long)]
    pub method: Option<Method>,
    /// Gap between joined points in mm (default: 0 for tape and weld,
    /// 9.3 for loop).
    #[arg(long = "d-g-mm", value_name = "MM")]
    pub d_g_mm: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Marker log of one robot built from the chain.
    Markers,
    /// Long-format DH measurements for every method and material.
    Samples,
    /// Growth staircase trials for every method and material.
    Trials,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a desired path (polyline CSV) into a chain file.
    Design {
        #[arg(long, value_name = "PATH")]
        polyline: Option<PathBuf>,
        /// Body radius in mm.
        #[arg(long = "radius-mm", default_value_t = 16.5)]
        radius_mm: f64,
    },
    /// Compile a chain into fold distances, cylinder lengths and offsets.
    Plan {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        gap: GapArgs,
    },
    /// Draw the flat fabrication pattern as SVG.
    Pattern {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        gap: GapArgs,
    },
    /// Forward kinematics: frame poses and joint polyline.
    Fk {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Tip trace during eversion, with clearance when a scene is given.
    Grow {
        #[command(flatten)]
        chain: ChainArgs,
        /// Obstacle scene (JSON).
        #[arg(long, value_name = "PATH")]
        scene: Option<PathBuf>,
        /// Number of equal eversion increments.
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Centerline sampling step for clearance, in mm.
        #[arg(long = "sample-step-mm", default_value_t = crate::growth::DEFAULT_STEP_MM)]
        sample_step_mm: f64,
    },
    /// Recover realized DH parameters from markers and compare to the target.
    Measure {
        #[command(flatten)]
        chain: ChainArgs,
        /// Marker log (CSV).
        #[arg(long, value_name = "PATH")]
        markers: Option<PathBuf>,
        #[arg(long)]
        phase: Option<Phase>,
    },
    /// Statistics report over long-format measurements and growth trials.
    Analyze {
        /// Long-format measurements (CSV).
        #[arg(long, value_name = "PATH")]
        samples: Option<PathBuf>,
        /// Growth staircase trials (CSV).
        #[arg(long, value_name = "PATH")]
        trials: Option<PathBuf>,
    },
    /// Generate synthetic datasets from the chain.
    Synth {
        kind: SynthKind,
        #[command(flatten)]
        chain: ChainArgs,
        /// Marker position noise (per axis) in mm.
        #[arg(long = "position-sigma-mm", default_value_t = 0.1)]
        position_sigma_mm: f64,
        /// Samples per marker.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Perturb the realized robot away from the target (markers only).
        #[arg(long)]
        perturb: bool,
    },
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    commands::dispatch(cli)
}

/// Parses `args` (including the program name), runs, and returns the process
/// exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
