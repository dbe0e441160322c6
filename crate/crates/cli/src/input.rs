//! Spec, robot and targets files.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use trimhelix::design_opt::DesignTargets;
use trimhelix::kinematics::{ModuleSpec, PlateSpec, RobotSpec, DEFAULT_TENDON_PHASES};
use trimhelix::material::DEFAULT_POISSON;
use trimhelix::{HelicoidSpec, Material};

use crate::error::CliError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    M,
    Cm,
    Mm,
}

impl Units {
    pub fn to_meters(self) -> f64 {
        match self {
            Units::M => 1.0,
            Units::Cm => 0.01,
            Units::Mm => 0.001,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialBlock {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub shore_a: Option<f64>,
    #[serde(rename = "E_pa")]
    pub e_pa: Option<f64>,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlateBlock {
    h_p: f64,
    #[serde(rename = "D_p")]
    d_p: f64,
    #[serde(rename = "N_p", default)]
    n_p: u32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema_version: Option<u32>,
    #[serde(rename = "H")]
    height: f64,
    #[serde(rename = "D")]
    diameter: f64,
    w: f64,
    t: f64,
    #[serde(rename = "N_h")]
    helices: u32,
    #[serde(default)]
    units: Units,
    material: Option<MaterialBlock>,
    plate: Option<PlateBlock>,
    modules: Option<usize>,
    tendon_radius: Option<f64>,
    tendon_phases: Option<[f64; 3]>,
    base_rotation: Option<bool>,
}

/// A design file after unit conversion. Lengths are in meters.
#[derive(Debug, Clone)]
pub struct DesignFile {
    pub spec: HelicoidSpec,
    pub units: Units,
    pub material: Option<MaterialBlock>,
    pub plate: Option<PlateSpec>,
    raw: RawSpec,
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

/// Deserializes with the offending key path and line/column in errors.
pub fn parse_json<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            CliError::Validation(format!("{origin}: {inner}"))
        } else {
            CliError::Validation(format!("{origin}: key \"{path}\": {inner}"))
        }
    })
}

fn check_schema_version(v: Option<u32>, origin: &str) -> Result<(), CliError> {
    match v {
        Some(v) if v != SCHEMA_VERSION => Err(CliError::Validation(format!(
            "{origin}: schema_version {v} is not supported (expected {SCHEMA_VERSION})"
        ))),
        _ => Ok(()),
    }
}

pub fn read_design(path: &Path) -> Result<DesignFile, CliError> {
    let origin = path.display().to_string();
    let raw: RawSpec = parse_json(&read_text(path)?, &origin)?;
    check_schema_version(raw.schema_version, &origin)?;
    let k = raw.units.to_meters();
    let spec = HelicoidSpec::new(raw.height * k, raw.diameter * k, raw.w * k, raw.t * k, raw.helices);
    let plate = raw.plate.map(|p| PlateSpec::new(p.h_p * k, p.d_p * k, p.n_p));
    Ok(DesignFile {
        spec,
        units: raw.units,
        material: raw.material.clone(),
        plate,
        raw,
    })
}

/// Plate used when a robot file gives none. Sized so that three modules of
/// two 0.06 m segments reach 0.45 m.
pub const DEFAULT_PLATE: PlateSpec = PlateSpec {
    height: 0.0075,
    diameter: 0.06,
    intermediate: 0,
};
pub const DEFAULT_TENDON_RADIUS: f64 = 0.025;
pub const DEFAULT_MODULES: usize = 3;

/// Robot assumptions filled in from defaults, recorded in the manifest.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RobotDefaults {
    pub plate: bool,
    pub tendon_radius: bool,
    pub tendon_phases: bool,
    pub modules: bool,
}

impl DesignFile {
    /// Every module uses two copies of the file's segment.
    pub fn robot(&self) -> (RobotSpec, RobotDefaults) {
        let raw = &self.raw;
        let k = raw.units.to_meters();
        let defaults = RobotDefaults {
            plate: self.plate.is_none(),
            tendon_radius: raw.tendon_radius.is_none(),
            tendon_phases: raw.tendon_phases.is_none(),
            modules: raw.modules.is_none(),
        };
        let module = ModuleSpec {
            segments: [self.spec, self.spec],
            plate: self.plate.unwrap_or(DEFAULT_PLATE),
            tendon_radius: raw.tendon_radius.map_or(DEFAULT_TENDON_RADIUS, |r| r * k),
            tendon_phases: raw.tendon_phases.unwrap_or(DEFAULT_TENDON_PHASES),
        };
        let robot = RobotSpec {
            modules: vec![module; raw.modules.unwrap_or(DEFAULT_MODULES)],
            base_rotation: raw.base_rotation.unwrap_or(false),
        };
        (robot, defaults)
    }
}

/// Resolves a material: a CLI preset wins over the file block, and with
/// neither the Shore A 45 default is used.
pub fn resolve_material(cli_preset: Option<&str>, block: Option<&MaterialBlock>) -> Result<Material, CliError> {
    if let Some(name) = cli_preset {
        return preset(name);
    }
    let Some(b) = block else {
        return Ok(Material::default_silicone());
    };
    let name = b.name.clone();
    let mut m = match (&b.preset, b.shore_a, b.e_pa) {
        (Some(p), None, _) => preset(p)?,
        (Some(_), Some(_), _) => {
            return Err(CliError::Validation(
                "material: give either \"preset\" or \"shore_a\", not both".into(),
            ))
        }
        (None, Some(s), _) => Material::from_shore_a(name.clone().unwrap_or_else(|| format!("shore-a-{s}")), s)?,
        (None, None, Some(e)) => Material::from_modulus(name.clone().unwrap_or_else(|| "custom".into()), e, DEFAULT_POISSON)?,
        (None, None, None) => {
            return Err(CliError::Validation(
                "material: one of \"preset\", \"shore_a\" or \"E_pa\" is required".into(),
            ))
        }
    };
    if let (Some(e), true) = (b.e_pa, b.preset.is_some() || b.shore_a.is_some()) {
        m = m.with_modulus_override(e)?;
    }
    if let Some(nu) = b.nu {
        m = m.with_poisson(nu)?;
    }
    if let Some(n) = name {
        m.name = n;
    }
    Ok(m)
}

fn preset(name: &str) -> Result<Material, CliError> {
    Material::preset(name).ok_or_else(|| {
        CliError::Validation(format!(
            "unknown material preset \"{name}\" (known: {})",
            Material::PRESETS.join(", ")
        ))
    })
}

/// Targets file: the optimizer schema plus optional `schema_version` and
/// `material`. All lengths are in meters.
pub struct TargetsFile {
    pub targets: DesignTargets,
    pub material: Option<MaterialBlock>,
}

pub fn read_targets(path: &Path) -> Result<TargetsFile, CliError> {
    let origin = path.display().to_string();
    let text = read_text(path)?;
    let mut value: Value = parse_json(&text, &origin)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| CliError::Validation(format!("{origin}: expected a JSON object")))?;
    let version = obj
        .remove("schema_version")
        .map(|v| {
            v.as_u64()
                .map(|v| v as u32)
                .ok_or_else(|| CliError::Validation(format!("{origin}: key \"schema_version\" must be an integer")))
        })
        .transpose()?;
    check_schema_version(version, &origin)?;
    let material = obj
        .remove("material")
        .map(|m| parse_json::<MaterialBlock>(&m.to_string(), &format!("{origin} (material)")))
        .transpose()?;
    let targets = parse_json(&value.to_string(), &origin)?;
    Ok(TargetsFile { targets, material })
}
