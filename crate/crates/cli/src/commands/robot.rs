use std::io::Read;
use std::path::{Path, PathBuf};

use clap::Subcommand;
use nalgebra::Isometry3;
use serde::Serialize;
use trimhelix::kinematics::{
    cable_lengths, estimate_config_from_cables, forward_kinematics, payload_deflection, validate_config,
    workspace_csv, workspace_sample, CableEstimate, PccConfig, RobotSpec,
};

use crate::error::{CliError, Exit};
use crate::input::{parse_json, read_text};
use crate::manifest::ManifestBuilder;
use crate::output::{emit, envelope, render, write_sidecar, Format};

#[derive(Debug, clap::Args)]
pub struct ConfigSource {
    /// Configuration JSON file; read from stdin when absent.
    #[arg(long, conflicts_with = "straight")]
    config: Option<PathBuf>,
    /// Use the straight, unloaded configuration.
    #[arg(long)]
    straight: bool,
}

#[derive(Debug, Subcommand)]
pub enum RobotAction {
    /// Frames of every segment end for a configuration.
    Fk {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Tendon lengths for a configuration.
    Cables {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Configuration from tendon lengths (JSON array of triples).
    Estimate {
        /// Lengths JSON file; read from stdin when absent.
        #[arg(long)]
        lengths: Option<PathBuf>,
    },
    /// Halton samples of reachable tip positions as CSV `x,y,z`.
    Workspace {
        #[arg(long, default_value_t = 10_000)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Linearized tip deflection under a tip force.
    Payload {
        /// Force in newtons as fx,fy,fz.
        #[arg(long, allow_hyphen_values = true)]
        force: String,
        #[command(flatten)]
        source: ConfigSource,
    },
}

#[derive(Serialize)]
struct Frame {
    position: [f64; 3],
    /// Row-major rotation matrix.
    rotation: [[f64; 3]; 3],
}

impl From<&Isometry3<f64>> for Frame {
    fn from(iso: &Isometry3<f64>) -> Self {
        let r = iso.rotation.to_rotation_matrix();
        let m = r.matrix();
        let t = iso.translation.vector;
        Frame {
            position: [t.x, t.y, t.z],
            rotation: [0, 1, 2].map(|i| [m[(i, 0)], m[(i, 1)], m[(i, 2)]]),
        }
    }
}

#[derive(Serialize)]
struct FkReport {
    config: PccConfig,
    frames: Vec<Frame>,
    tip: Frame,
}

fn read_input(path: Option<&Path>) -> Result<(String, String), CliError> {
    match path {
        Some(p) => Ok((read_text(p)?, p.display().to_string())),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::io("stdin", e))?;
            Ok((s, "stdin".into()))
        }
    }
}

/// One state per module is expanded to both of its segments.
fn load_config(src: &ConfigSource, robot: &RobotSpec, manifest: &mut ManifestBuilder) -> Result<PccConfig, CliError> {
    if src.straight {
        manifest.resolved("config", "straight");
        return Ok(PccConfig::straight(robot));
    }
    let (text, origin) = read_input(src.config.as_deref())?;
    let mut cfg: PccConfig = parse_json(&text, &origin)?;
    if cfg.segments.len() == robot.modules.len() && robot.modules.len() != robot.segment_count() {
        cfg = PccConfig::per_module(&cfg.segments, cfg.base_angle);
    }
    if let Some(p) = &src.config {
        manifest.input(p, text.as_bytes());
    } else {
        manifest.input(Path::new("stdin"), text.as_bytes());
    }
    validate_config(robot, &cfg)?;
    Ok(cfg)
}

fn parse_force(s: &str) -> Result<[f64; 3], CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Usage(format!("--force must be fx,fy,fz, got \"{s}\"")))?;
    v.try_into()
        .map_err(|_| CliError::Usage(format!("--force must have three components, got \"{s}\"")))
}

pub fn run(path: &Path, action: RobotAction) -> Result<Exit, CliError> {
    let command = match &action {
        RobotAction::Fk { .. } => "robot fk",
        RobotAction::Cables { .. } => "robot cables",
        RobotAction::Estimate { .. } => "robot estimate",
        RobotAction::Workspace { .. } => "robot workspace",
        RobotAction::Payload { .. } => "robot payload",
    };
    let (design, mat, mut manifest) = super::load_design(path, command, None)?;
    let (robot, defaults) = design.robot();
    robot.check()?;
    manifest.resolved("robot", &robot).resolved("robot_defaults_used", defaults);

    match action {
        RobotAction::Fk { source } => {
            let cfg = load_config(&source, &robot, &mut manifest)?;
            let fk = forward_kinematics(&robot, &cfg)?;
            let report = FkReport {
                frames: fk.frames.iter().map(Frame::from).collect(),
                tip: Frame::from(&fk.tip),
                config: cfg,
            };
            emit(&render(&envelope(&manifest.build(), &report), Format::Json), None)?;
        }
        RobotAction::Cables { source } => {
            let cfg = load_config(&source, &robot, &mut manifest)?;
            let lengths = cable_lengths(&cfg, &robot)?;
            let report = serde_json::json!({ "config": cfg, "lengths": lengths });
            emit(&render(&envelope(&manifest.build(), &report), Format::Json), None)?;
        }
        RobotAction::Estimate { lengths } => {
            let (text, origin) = read_input(lengths.as_deref())?;
            manifest.input(Path::new(&origin), text.as_bytes());
            let l: Vec<[f64; 3]> = parse_json(&text, &origin)?;
            let est: CableEstimate = estimate_config_from_cables(&l, &robot)?;
            if let Some(w) = &est.warning {
                eprintln!("warning: {w}");
            }
            emit(&render(&envelope(&manifest.build(), &est), Format::Json), None)?;
        }
        RobotAction::Workspace { n, out } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be at least 1".into()));
            }
            let pts = workspace_sample(&robot, n)?;
            emit(&workspace_csv(&pts), out.as_deref())?;
            if let Some(out) = out {
                manifest
                    .resolved("sampler", "halton bases 2,3,5,... from index 0")
                    .resolved("seed", 0)
                    .resolved("samples", n);
                write_sidecar(&out, &manifest.build(), &serde_json::json!({ "rows": pts.len() }))?;
            }
        }
        RobotAction::Payload { force, source } => {
            let f = parse_force(&force)?;
            let cfg = load_config(&source, &robot, &mut manifest)?;
            manifest.resolved("material", &mat);
            let r = payload_deflection(&robot, &cfg, f.into(), &mat)?;
            emit(&render(&envelope(&manifest.build(), &r), Format::Json), None)?;
        }
    }
    Ok(Exit::Ok)
}
