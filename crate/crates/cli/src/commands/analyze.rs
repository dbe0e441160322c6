use std::path::Path;

use serde::Serialize;
use trimhelix::geometry::{max_strain, ManufacturingLimits, StrainEstimate};
use trimhelix::kinematics::{max_bending, max_compression, PlateSpec};
use trimhelix::stiffness::stiffness_report_with_limits;
use trimhelix::{axial_stiffness, bending_stiffness, derive_geometry, DerivedGeometry, Material, StiffnessReport};

use crate::error::{CliError, Exit};
use crate::output::{emit, envelope, render};
use crate::Common;

#[derive(Debug, Serialize)]
struct PresetRow {
    material: String,
    youngs_modulus_pa: f64,
    k_ax: f64,
    k_bend: f64,
}

#[derive(Debug, Serialize)]
struct WorkspaceLimits {
    plate: PlateSpec,
    delta_l_max: f64,
    theta_max: f64,
}

#[derive(Debug, Serialize)]
struct AnalyzeReport {
    material: Material,
    stiffness: StiffnessReport,
    strain: StrainEstimate,
    derived: DerivedGeometry,
    /// The same geometry under every material preset.
    presets: Vec<PresetRow>,
    workspace: Option<WorkspaceLimits>,
    feasible: bool,
}

pub fn run(path: &Path, strict: bool, common: &Common) -> Result<Exit, CliError> {
    let (design, mat, mut manifest) = super::load_design(path, "analyze", common.material.as_deref())?;
    let spec = design.spec;
    let limits = ManufacturingLimits::default();
    manifest.resolved("limits", limits);

    let stiffness = stiffness_report_with_limits(&spec, &mat, &limits)?;
    let presets = Material::PRESETS
        .iter()
        .map(|name| {
            let m = Material::preset(name).expect("listed presets exist");
            Ok(PresetRow {
                material: m.name.clone(),
                youngs_modulus_pa: m.youngs_modulus,
                k_ax: axial_stiffness(&spec, m.youngs_modulus)?,
                k_bend: bending_stiffness(&spec, m.youngs_modulus)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let workspace = design
        .plate
        .map(|plate| -> Result<_, CliError> {
            let dl = max_compression(&spec, &plate)?;
            Ok(WorkspaceLimits {
                plate,
                delta_l_max: dl,
                theta_max: max_bending(&plate, dl),
            })
        })
        .transpose()?;

    let report = AnalyzeReport {
        feasible: stiffness.feasible(),
        strain: max_strain(&spec)?,
        derived: derive_geometry(&spec)?,
        material: mat,
        presets,
        workspace,
        stiffness,
    };
    let doc = envelope(&manifest.build(), &report);
    emit(&render(&doc, common.format), common.out.as_deref())?;

    for v in &report.stiffness.violations {
        eprintln!("warning: {v}");
    }
    if strict && !report.feasible {
        eprintln!("error: {} manufacturing limit(s) violated", report.stiffness.violations.len());
        return Ok(Exit::Validation);
    }
    Ok(Exit::Ok)
}
