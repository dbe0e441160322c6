use std::path::Path;

use serde::Serialize;
use trimhelix::design_opt::{optimize, DesignError, DesignResult};
use trimhelix::Material;

use crate::error::{CliError, Exit};
use crate::input::{read_targets, resolve_material};
use crate::manifest::ManifestBuilder;
use crate::output::{emit, envelope, render, write_file, write_sidecar};
use crate::Common;

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    TargetsMet,
    NoFeasibleDesign,
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    status: Status,
    material: &'a Material,
    budget: usize,
    design: &'a DesignResult,
}

pub fn run(path: &Path, budget: usize, trace: Option<&Path>, common: &Common) -> Result<Exit, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path.display(), e))?;
    let file = read_targets(path)?;
    let mat = resolve_material(common.material.as_deref(), file.material.as_ref())?;
    let mut manifest = ManifestBuilder::new("optimize");
    manifest
        .input(path, &bytes)
        .resolved("material", &mat)
        .resolved("budget", budget)
        .resolved("targets", &file.targets);

    let (status, design, exit) = match optimize(&file.targets, &mat, budget) {
        Ok(r) => (Status::TargetsMet, r, Exit::Ok),
        Err(DesignError::NoFeasibleDesign { nearest }) => (Status::NoFeasibleDesign, *nearest, Exit::Geometry),
        Err(e) => return Err(e.into()),
    };
    let manifest = manifest.build();
    let report = OptimizeReport {
        status,
        material: &mat,
        budget,
        design: &design,
    };
    emit(&render(&envelope(&manifest, &report), common.format), common.out.as_deref())?;
    if let Some(t) = trace {
        write_file(t, design.trace_csv().as_bytes())?;
        write_sidecar(t, &manifest, &serde_json::json!({ "trace_rows": design.trace.len() }))?;
    }
    if exit != Exit::Ok {
        eprintln!(
            "error: no design in bounds meets every target; nearest candidate reported (objective {:.6e})",
            design.objective_value
        );
    }
    Ok(exit)
}
