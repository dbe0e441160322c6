use std::fmt;

use thiserror::Error;
use trimhelix::beam_oracle::OracleError;
use trimhelix::design_opt::DesignError;
use trimhelix::geometry::{GeometryError, Violation};
use trimhelix::kinematics::KinematicsError;
use trimhelix::material::MaterialError;
use trimhelix::mesh::MeshError;
use trimhelix::stiffness::StiffnessError;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Unexpected = 1,
    Validation = 2,
    Geometry = 3,
    Kinematics = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("invalid spec:\n{}", ViolationList(.0))]
    Violations(Vec<Violation>),
    #[error("{0}")]
    Geometry(String),
    #[error("{0}")]
    Kinematics(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Unexpected(String),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Usage(_) | CliError::Validation(_) | CliError::Violations(_) => Exit::Validation,
            CliError::Geometry(_) => Exit::Geometry,
            CliError::Kinematics(_) => Exit::Kinematics,
            CliError::Io { .. } | CliError::Unexpected(_) => Exit::Unexpected,
        }
    }

    pub fn io(path: impl fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::InvalidSpec(v) => CliError::Violations(vec![v]),
            GeometryError::Degenerate(_) => CliError::Geometry(e.to_string()),
        }
    }
}

impl From<MaterialError> for CliError {
    fn from(e: MaterialError) -> Self {
        CliError::Validation(format!("material: {e}"))
    }
}

impl From<StiffnessError> for CliError {
    fn from(e: StiffnessError) -> Self {
        match e {
            StiffnessError::Geometry(g) => g.into(),
            StiffnessError::Material(m) => m.into(),
            StiffnessError::InfiniteStiffness => CliError::Geometry(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Geometry(g) => g.into(),
            OracleError::InvalidDiscretization(_) | OracleError::BadSection(_) => {
                CliError::Validation(e.to_string())
            }
            OracleError::DegenerateElement(_) => CliError::Geometry(e.to_string()),
            _ => CliError::Unexpected(format!("oracle: {e}")),
        }
    }
}

impl From<MeshError> for CliError {
    fn from(e: MeshError) -> Self {
        match e {
            MeshError::Resolution(_) => CliError::Usage(e.to_string()),
            MeshError::Geometry(g) => g.into(),
            MeshError::HelixOverlap { .. } | MeshError::NoFreeSpan { .. } => {
                CliError::Geometry(e.to_string())
            }
            _ => CliError::Unexpected(format!("mesh: {e}")),
        }
    }
}

impl From<KinematicsError> for CliError {
    fn from(e: KinematicsError) -> Self {
        match e {
            KinematicsError::Geometry(g) => g.into(),
            KinematicsError::Stiffness(s) => s.into(),
            KinematicsError::InfeasiblePlate { .. }
            | KinematicsError::InfeasibleConfig(_)
            | KinematicsError::NonPositiveArc(_) => CliError::Kinematics(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DesignError> for CliError {
    fn from(e: DesignError) -> Self {
        match e {
            DesignError::InvalidTargets(_) => CliError::Validation(e.to_string()),
            DesignError::Material(m) => m.into(),
            DesignError::NoFeasibleDesign { .. } => CliError::Geometry(e.to_string()),
        }
    }
}
