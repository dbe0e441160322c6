use std::path::Path;

use serde::Serialize;
use trimhelix::beam_oracle::{build_segment_lattice, oracle_stiffness, LatticeTopology, StiffnessMode};
use trimhelix::stiffness::{sweep, sweep_csv, SweepParam};
use trimhelix::{HelicoidSpec, Material};

use crate::error::{CliError, Exit};
use crate::output::{emit, write_sidecar};

pub struct SweepArgs<'a> {
    pub spec: &'a Path,
    pub param: &'a str,
    pub values: Option<&'a str>,
    pub range: Option<&'a str>,
    pub oracle: bool,
    pub elems: usize,
    pub material: Option<&'a str>,
    pub out: Option<&'a Path>,
}

const ORACLE_COLUMNS: &str = ",oracle_k_ax_N_per_m,oracle_k_bend_Nm_per_rad";
const MAX_ROWS: usize = 100_000;

pub fn parse_values(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--values: \"{}\" is not a number", v.trim())))
        })
        .collect()
}

/// `start:stop:step`, stop included when it lies on the grid.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, h] = parts.as_slice() else {
        return Err(CliError::Usage(format!("--range must be start:stop:step, got \"{s}\"")));
    };
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("--range: \"{x}\" is not a finite number")))
    };
    let (start, stop, step) = (num(a)?, num(b)?, num(h)?);
    if step == 0.0 {
        return Err(CliError::Usage("--range step must be non-zero".into()));
    }
    let n = ((stop - start) / step + 1e-9).floor();
    if n < 0.0 {
        return Err(CliError::Usage("--range step points away from stop".into()));
    }
    if n >= MAX_ROWS as f64 {
        return Err(CliError::Usage(format!("--range gives more than {MAX_ROWS} values")));
    }
    Ok((0..=n as usize).map(|i| start + step * i as f64).collect())
}

fn oracle_pair(spec: &HelicoidSpec, mat: &Material, elems: usize) -> Result<(f64, f64), CliError> {
    let model = build_segment_lattice(spec, mat, elems, LatticeTopology::Independent)?;
    Ok((
        oracle_stiffness(&model, StiffnessMode::Axial)?,
        oracle_stiffness(&model, StiffnessMode::Bending)?,
    ))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    param: &'a str,
    values: &'a [f64],
    oracle: bool,
    elems: Option<usize>,
    failed_rows: usize,
}

pub fn run(a: SweepArgs<'_>) -> Result<Exit, CliError> {
    let param = SweepParam::parse(a.param)
        .ok_or_else(|| CliError::Usage(format!("--param must be one of H, D, w, t, N_h; got \"{}\"", a.param)))?;
    let raw = match (a.values, a.range) {
        (Some(v), _) => parse_values(v)?,
        (None, Some(r)) => parse_range(r)?,
        (None, None) => return Err(CliError::Usage("one of --values or --range is required".into())),
    };
    if a.oracle && a.elems == 0 {
        return Err(CliError::Usage("--elems must be at least 1".into()));
    }
    let (design, mat, mut manifest) = super::load_design(a.spec, "sweep", a.material)?;
    let k = match param {
        SweepParam::Helices => 1.0,
        _ => design.units.to_meters(),
    };
    let values: Vec<f64> = raw.iter().map(|v| v * k).collect();

    let rows = sweep(&design.spec, param, &values, &mat);
    let mut csv = sweep_csv(&rows);
    if a.oracle {
        let mut lines: Vec<String> = csv.lines().map(str::to_owned).collect();
        lines[0].push_str(ORACLE_COLUMNS);
        for (line, row) in lines[1..].iter_mut().zip(&rows) {
            let pair = match &row.result {
                Ok(_) => {
                    let spec = param.apply(&design.spec, row.value).expect("row evaluated");
                    oracle_pair(&spec, &mat, a.elems).map_err(|e| {
                        eprintln!("warning: {}={}: oracle failed: {e}", param.name(), row.value);
                    })
                }
                Err(_) => Err(()),
            };
            match pair {
                Ok((ka, kb)) => line.push_str(&format!(",{ka},{kb}")),
                Err(()) => line.push_str(",,"),
            }
        }
        csv = lines.join("\n") + "\n";
    }
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    for r in rows.iter().filter_map(|r| r.result.as_ref().err().map(|e| (r.value, e))) {
        eprintln!("warning: {}={}: {}", param.name(), r.0, r.1);
    }

    emit(&csv, a.out)?;
    if let Some(out) = a.out {
        manifest.resolved("param", param.name());
        let summary = SweepSummary {
            param: param.name(),
            values: &values,
            oracle: a.oracle,
            elems: a.oracle.then_some(a.elems),
            failed_rows: failed,
        };
        write_sidecar(out, &manifest.build(), &summary)?;
    }
    Ok(Exit::Ok)
}
