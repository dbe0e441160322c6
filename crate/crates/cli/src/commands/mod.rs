pub mod analyze;
pub mod mesh;
pub mod optimize;
pub mod oracle;
pub mod robot;
pub mod sweep;

use std::path::Path;

use trimhelix::{HelicoidSpec, Material};

use crate::error::CliError;
use crate::input::{read_design, resolve_material, DesignFile};
use crate::manifest::ManifestBuilder;

/// Reads a design file, rejects broken invariants and resolves the
/// material, recording all of it in a fresh manifest.
pub fn load_design(
    path: &Path,
    command: &str,
    material: Option<&str>,
) -> Result<(DesignFile, Material, ManifestBuilder), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
    let design = read_design(path)?;
    check_invariants(&design.spec)?;
    let mat = resolve_material(material, design.material.as_ref())?;
    let mut m = ManifestBuilder::new(command);
    m.input(path, &bytes)
        .resolved("units", design.units)
        .resolved("material", &mat)
        .resolved("material_source", material_source(material, &design));
    Ok((design, mat, m))
}

fn material_source(cli: Option<&str>, design: &DesignFile) -> &'static str {
    match (cli, &design.material) {
        (Some(_), _) => "command line preset",
        (None, Some(_)) => "spec file",
        (None, None) => "default (Shore A 45)",
    }
}

pub fn check_invariants(spec: &HelicoidSpec) -> Result<(), CliError> {
    let v = spec.invariant_violations();
    if v.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violations(v))
    }
}
