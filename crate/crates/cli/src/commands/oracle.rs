use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use trimhelix::beam_oracle::{build_segment_lattice, build_strut, oracle_stiffness, solve_static, LatticeTopology, StiffnessMode};
use trimhelix::stiffness::strut_deflection;
use trimhelix::{axial_stiffness, bending_stiffness};

use crate::error::{CliError, Exit};
use crate::output::{emit, envelope, render, write_file};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Axial,
    Bending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyArg {
    Independent,
    Crossed,
}

/// Single guided strut against its closed-form deflection.
#[derive(Debug, Serialize)]
struct StrutCheck {
    elements: usize,
    deflection_oracle: f64,
    deflection_closed_form: f64,
    relative_error: f64,
    within_half_percent: bool,
}

#[derive(Debug, Serialize)]
struct OracleReport {
    mode: ModeArg,
    topology: TopologyArg,
    elems_per_strut: usize,
    dof: usize,
    k_oracle: f64,
    k_analytical: f64,
    ratio: f64,
    strut_check: StrutCheck,
}

pub fn run(
    path: &Path,
    mode: ModeArg,
    elems: usize,
    topology: TopologyArg,
    dump: Option<&Path>,
    common: &Common,
) -> Result<Exit, CliError> {
    if elems == 0 {
        return Err(CliError::Usage("--elems must be at least 1".into()));
    }
    let (design, mat, mut manifest) = super::load_design(path, "oracle", common.material.as_deref())?;
    let spec = design.spec;
    let topo = match topology {
        TopologyArg::Independent => LatticeTopology::Independent,
        TopologyArg::Crossed => LatticeTopology::Crossed,
    };
    let model = build_segment_lattice(&spec, &mat, elems, topo)?;
    let (smode, k_analytical) = match mode {
        ModeArg::Axial => (StiffnessMode::Axial, axial_stiffness(&spec, mat.youngs_modulus)?),
        ModeArg::Bending => (StiffnessMode::Bending, bending_stiffness(&spec, mat.youngs_modulus)?),
    };
    let k_oracle = oracle_stiffness(&model, smode)?;

    let strut = build_strut(&spec, &mat, elems)?;
    let u = solve_static(&strut)?;
    let got = -u.nodes[strut.probe].translation.z;
    let expect = strut_deflection(1.0, &spec, mat.youngs_modulus)?;
    let rel = (got / expect - 1.0).abs();

    if let Some(d) = dump {
        write_file(d, model.to_json().as_bytes())?;
        manifest.resolved("model_dump", d.display().to_string());
    }
    let report = OracleReport {
        mode,
        topology,
        elems_per_strut: elems,
        dof: 6 * model.nodes.len(),
        k_oracle,
        k_analytical,
        ratio: k_oracle / k_analytical,
        strut_check: StrutCheck {
            elements: elems,
            deflection_oracle: got,
            deflection_closed_form: expect,
            relative_error: rel,
            within_half_percent: rel <= 0.005,
        },
    };
    emit(&render(&envelope(&manifest.build(), &report), common.format), common.out.as_deref())?;
    Ok(Exit::Ok)
}
