//! `trimhelix` command-line front end.

mod commands;
mod error;
mod input;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};

use crate::commands::oracle::{ModeArg, TopologyArg};
use crate::error::{CliError, Exit};
use crate::output::Format;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_VERSION: u32 = 1;
const LONG_VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (schema 1)");

#[derive(Debug, Parser)]
#[command(name = "trimhelix", version = LONG_VERSION, about = "Design analysis for trimmed-helicoid robot segments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Material preset, overriding the spec file.
    #[arg(long)]
    pub material: Option<String>,
    /// Output format for reports.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stiffness, strain and workspace limits for one design.
    Analyze {
        spec: PathBuf,
        /// Exit 2 if any manufacturing limit is violated.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form stiffness over a range of one parameter, as CSV.
    Sweep {
        spec: PathBuf,
        /// H, D, w, t or N_h.
        #[arg(long)]
        param: String,
        /// Comma-separated values in the spec file's units.
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// start:stop:step, inclusive of stop.
        #[arg(long)]
        range: Option<String>,
        /// Add frame-element oracle columns.
        #[arg(long)]
        oracle: bool,
        /// Elements per strut for the oracle columns.
        #[arg(long, default_value_t = 16)]
        elems: usize,
        #[arg(long)]
        material: Option<String>,
        /// CSV destination; a manifest sidecar is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search the design space for target stiffnesses.
    Optimize {
        #[arg(long)]
        targets: PathBuf,
        /// Local-refinement evaluations after the seed grid.
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        /// CSV of running-best improvements.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Frame-element stiffness of a full segment compared with the closed form.
    Oracle {
        spec: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Axial)]
        mode: ModeArg,
        /// Elements per strut.
        #[arg(long, default_value_t = 32)]
        elems: usize,
        #[arg(long, value_enum, default_value_t = TopologyArg::Independent)]
        topology: TopologyArg,
        /// Write the assembled model as JSON.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Export a watertight STL with a metadata sidecar.
    Mesh {
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Segments per helix turn.
        #[arg(long, default_value_t = trimhelix::mesh::DEFAULT_SEGMENTS_PER_TURN,
              value_parser = clap::value_parser!(u32).range(trimhelix::mesh::MIN_SEGMENTS_PER_TURN as i64..).map(|v| v as usize))]
        resolution: usize,
        /// Write ASCII STL instead of binary.
        #[arg(long)]
        ascii: bool,
    },
    /// Kinematics of a tendon-driven arm built from the design.
    Robot {
        robot: PathBuf,
        #[command(subcommand)]
        action: commands::robot::RobotAction,
    },
}

fn run(cli: Cli) -> Result<Exit, CliError> {
    match cli.command {
        Command::Analyze { spec, strict, common } => commands::analyze::run(&spec, strict, &common),
        Command::Sweep {
            spec,
            param,
            values,
            range,
            oracle,
            elems,
            material,
            out,
        } => commands::sweep::run(commands::sweep::SweepArgs {
            spec: &spec,
            param: &param,
            values: values.as_deref(),
            range: range.as_deref(),
            oracle,
            elems,
            material: material.as_deref(),
            out: out.as_deref(),
        }),
        Command::Optimize {
            targets,
            budget,
            trace,
            common,
        } => commands::optimize::run(&targets, budget, trace.as_deref(), &common),
        Command::Oracle {
            spec,
            mode,
            elems,
            topology,
            dump,
            common,
        } => commands::oracle::run(&spec, mode, elems, topology, dump.as_deref(), &common),
        Command::Mesh {
            spec,
            out,
            resolution,
            ascii,
        } => commands::mesh::run(&spec, &out, resolution, ascii),
        Command::Robot { robot, action } => commands::robot::run(&robot, action),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
