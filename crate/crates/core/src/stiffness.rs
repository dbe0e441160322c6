//! Closed-form structural model of a trimmed-helicoid segment.
//!
//! Each strut is idealised as a straight fixed-guided beam. The segment is
//! `N_h` parallel chains of `N_h` struts in series, so its axial stiffness
//! equals that of one strut. Bending stiffness is obtained from the axial
//! value through an equivalent solid bar and a wave-spring style
//! `9 R_m / H` correction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    derive_geometry, max_strain, validate_spec, GeometryError, HelicoidSpec, ManufacturingLimits,
    Violation,
};
use crate::material::{Material, MaterialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StiffnessError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Material(#[from] MaterialError),
    #[error("averaged helical angle is pi/2; axial stiffness is unbounded")]
    InfiniteStiffness,
}

/// Strut section second moment `w t^3 / 12` (bending that closes the gap).
pub fn strut_inertia(spec: &HelicoidSpec) -> f64 {
    spec.width * spec.thickness.powi(3) / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrutReactions {
    /// Vertical support reaction, N.
    pub force: f64,
    /// End moment at both supports, N m.
    pub moment: f64,
}

/// Support reactions of the fixed-guided strut under end load `force`,
/// using the nominal (outer edge) length and angle.
pub fn strut_reactions(force: f64, spec: &HelicoidSpec) -> Result<StrutReactions, StiffnessError> {
    let g = derive_geometry(spec)?;
    Ok(StrutReactions {
        force: force / 2.0,
        moment: 0.5 * force * g.strut_length * g.alpha.cos(),
    })
}

fn guided_deflection(force: f64, length: f64, angle: f64, e: f64, inertia: f64) -> f64 {
    force * length.powi(3) * angle.cos().powi(2) / (12.0 * e * inertia)
}

/// Load-direction deflection of one strut, evaluated at the strut centroid
/// (`L_avg`, `alpha_avg`). This is the form the stiffness formulas use.
pub fn strut_deflection(force: f64, spec: &HelicoidSpec, e: f64) -> Result<f64, StiffnessError> {
    let g = derive_geometry(spec)?;
    Ok(guided_deflection(
        force,
        g.strut_length_avg,
        g.alpha_avg,
        e,
        strut_inertia(spec),
    ))
}

/// Same as [`strut_deflection`] but with the outer-edge `L` and `alpha`.
pub fn strut_deflection_nominal(
    force: f64,
    spec: &HelicoidSpec,
    e: f64,
) -> Result<f64, StiffnessError> {
    let g = derive_geometry(spec)?;
    Ok(guided_deflection(
        force,
        g.strut_length,
        g.alpha,
        e,
        strut_inertia(spec),
    ))
}

/// Axial stiffness `12 E I / (L_avg^3 cos^2 alpha_avg)`, N/m.
pub fn axial_stiffness(spec: &HelicoidSpec, e: f64) -> Result<f64, StiffnessError> {
    let g = derive_geometry(spec)?;
    let c2 = g.alpha_avg.cos().powi(2);
    if c2 <= f64::EPSILON {
        return Err(StiffnessError::InfiniteStiffness);
    }
    Ok(12.0 * e * strut_inertia(spec) / (g.strut_length_avg.powi(3) * c2))
}

/// Bending stiffness `9 k_ax (I_bar / A_bar) (R_m / H)`, N m/rad.
pub fn bending_stiffness(spec: &HelicoidSpec, e: f64) -> Result<f64, StiffnessError> {
    let k_ax = axial_stiffness(spec, e)?;
    let g = derive_geometry(spec)?;
    Ok(bending_from_axial(k_ax, g.bar_inertia, g.bar_area, g.mean_radius, spec.height))
}

/// The uncorrected solid-bar relation `k_ax * I_bar / A_bar`.
pub fn bending_stiffness_solid_bar(spec: &HelicoidSpec, e: f64) -> Result<f64, StiffnessError> {
    let k_ax = axial_stiffness(spec, e)?;
    let g = derive_geometry(spec)?;
    Ok(k_ax * g.bar_inertia / g.bar_area)
}

fn bending_from_axial(k_ax: f64, bar_inertia: f64, bar_area: f64, mean_radius: f64, h: f64) -> f64 {
    9.0 * k_ax * bar_inertia / bar_area * mean_radius / h
}

/// `n` identical springs in series.
pub fn series_stack(k: f64, n: usize) -> f64 {
    k / n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StiffnessReport {
    pub spec: HelicoidSpec,
    pub youngs_modulus: f64,
    pub k_ax: f64,
    pub k_bend: f64,
    pub eps_max: f64,
    pub small_strain_ok: bool,
    pub strut_inertia: f64,
    /// Reactions for a unit end load.
    pub reactions: StrutReactions,
    pub violations: Vec<Violation>,
}

impl StiffnessReport {
    pub fn feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn stiffness_report(
    spec: &HelicoidSpec,
    material: &Material,
) -> Result<StiffnessReport, StiffnessError> {
    stiffness_report_with_limits(spec, material, &ManufacturingLimits::default())
}

pub fn stiffness_report_with_limits(
    spec: &HelicoidSpec,
    material: &Material,
    limits: &ManufacturingLimits,
) -> Result<StiffnessReport, StiffnessError> {
    material.check()?;
    let e = material.youngs_modulus;
    let strain = max_strain(spec)?;
    Ok(StiffnessReport {
        spec: *spec,
        youngs_modulus: e,
        k_ax: axial_stiffness(spec, e)?,
        k_bend: bending_stiffness(spec, e)?,
        eps_max: strain.eps_max,
        small_strain_ok: strain.small_strain_ok,
        strut_inertia: strut_inertia(spec),
        reactions: strut_reactions(1.0, spec)?,
        violations: validate_spec(spec, limits),
    })
}

/// Geometry parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "H")]
    Height,
    #[serde(rename = "D")]
    Diameter,
    #[serde(rename = "w")]
    Width,
    #[serde(rename = "t")]
    Thickness,
    #[serde(rename = "N_h")]
    Helices,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Height => "H",
            SweepParam::Diameter => "D",
            SweepParam::Width => "w",
            SweepParam::Thickness => "t",
            SweepParam::Helices => "N_h",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "H" => Some(SweepParam::Height),
            "D" => Some(SweepParam::Diameter),
            "w" => Some(SweepParam::Width),
            "t" => Some(SweepParam::Thickness),
            "N_h" => Some(SweepParam::Helices),
            _ => None,
        }
    }

    /// Returns `base` with this parameter replaced. `N_h` values must be
    /// positive integers; anything else yields `None`.
    pub fn apply(self, base: &HelicoidSpec, value: f64) -> Option<HelicoidSpec> {
        let mut s = *base;
        match self {
            SweepParam::Height => s.height = value,
            SweepParam::Diameter => s.diameter = value,
            SweepParam::Width => s.width = value,
            SweepParam::Thickness => s.thickness = value,
            SweepParam::Helices => {
                if value.fract() != 0.0 || value < 1.0 || value > u32::MAX as f64 {
                    return None;
                }
                s.helices = value as u32;
            }
        }
        Some(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub result: Result<SweepValues, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepValues {
    pub k_ax: f64,
    pub k_bend: f64,
    pub eps_max: f64,
}

pub const SWEEP_CSV_HEADER: &str = "param,value,k_ax_N_per_m,k_bend_Nm_per_rad,eps_max";

/// Evaluates the closed forms for each value; rows keep input order and
/// invalid rows carry their error instead of aborting the sweep.
pub fn sweep(
    base: &HelicoidSpec,
    param: SweepParam,
    values: &[f64],
    material: &Material,
) -> Vec<SweepRow> {
    values
        .par_iter()
        .map(|&value| SweepRow {
            param,
            value,
            result: sweep_one(base, param, value, material),
        })
        .collect()
}

fn sweep_one(
    base: &HelicoidSpec,
    param: SweepParam,
    value: f64,
    material: &Material,
) -> Result<SweepValues, String> {
    let spec = param
        .apply(base, value)
        .ok_or_else(|| format!("{} must be a positive integer, got {value}", param.name()))?;
    let e = material.youngs_modulus;
    let k_ax = axial_stiffness(&spec, e).map_err(|e| e.to_string())?;
    let k_bend = bending_stiffness(&spec, e).map_err(|e| e.to_string())?;
    let eps_max = max_strain(&spec).map_err(|e| e.to_string())?.eps_max;
    Ok(SweepValues {
        k_ax,
        k_bend,
        eps_max,
    })
}

/// Writes rows as CSV with shortest round-trip float formatting. Failed
/// rows keep their `param,value` prefix and leave the numeric cells empty.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        match &row.result {
            Ok(v) => out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.param.name(),
                row.value,
                v.k_ax,
                v.k_bend,
                v.eps_max
            )),
            Err(_) => out.push_str(&format!("{},{},,,\n", row.param.name(), row.value)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HelicoidSpec;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn reactions() {
        let s = HelicoidSpec::small_module();
        let r = strut_reactions(0.0, &s).unwrap();
        assert_eq!((r.force, r.moment), (0.0, 0.0));
        let r = strut_reactions(1.0, &s).unwrap();
        assert_eq!(r.force, 0.5);
        assert!(rel(r.moment, 0.011502) < 1e-4, "{}", r.moment);
    }

    #[test]
    fn moment_vanishes_for_vertical_struts() {
        // D tiny relative to H drives alpha toward pi/2
        let s = HelicoidSpec::new(100.0, 1e-6, 1e-7, 1e-8, 1);
        let r = strut_reactions(1.0, &s).unwrap();
        let g = derive_geometry(&s).unwrap();
        assert!(r.moment / (0.5 * g.strut_length) < 1e-7);
    }

    #[test]
    fn deflection_small_module() {
        let s = HelicoidSpec::small_module();
        assert_eq!(strut_deflection(0.0, &s, 2.0e6).unwrap(), 0.0);
        let y = strut_deflection(1.0, &s, 2.0e6).unwrap();
        assert!(rel(y, 1.011e-2) < 1e-3, "{y}");
        let y2 = strut_deflection(2.0, &s, 2.0e6).unwrap();
        assert!(rel(y2, 2.0 * y) < 1e-15);
        let k = axial_stiffness(&s, 2.0e6).unwrap();
        assert!((k * y - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nominal_deflection_differs_from_averaged() {
        let s = HelicoidSpec::small_module();
        let a = strut_deflection(1.0, &s, 2.0e6).unwrap();
        let b = strut_deflection_nominal(1.0, &s, 2.0e6).unwrap();
        assert!(b > a);
    }

    #[test]
    fn axial_values() {
        let small = axial_stiffness(&HelicoidSpec::small_module(), 2.0e6).unwrap();
        assert!((small - 99.0).abs() < 0.1, "{small}");
        let large = axial_stiffness(&HelicoidSpec::large_module(), 2.277e6).unwrap();
        assert!(rel(large, 354.6) < 2e-3, "{large}");
        let scaled = axial_stiffness(&HelicoidSpec::small_module(), 6.0e6).unwrap();
        assert!(rel(scaled, 3.0 * small) < 1e-14);
    }

    #[test]
    fn bending_values() {
        let small = bending_stiffness(&HelicoidSpec::small_module(), 2.0e6).unwrap();
        assert!(rel(small, 0.0326) < 2e-3, "{small}");
        let large = bending_stiffness(&HelicoidSpec::large_module(), 2.277e6).unwrap();
        assert!(rel(large, 0.1845) < 2e-3, "{large}");
        let bar = bending_stiffness_solid_bar(&HelicoidSpec::small_module(), 2.0e6).unwrap();
        let g = derive_geometry(&HelicoidSpec::small_module()).unwrap();
        assert!(rel(small / bar, 9.0 * g.mean_radius / 0.12) < 1e-14);
    }

    #[test]
    fn bending_vanishes_with_mean_radius() {
        assert_eq!(bending_from_axial(100.0, 0.0, 1.0, 0.0, 0.1), 0.0);
    }

    #[test]
    fn report_small_module_shore_45() {
        let r = stiffness_report(&HelicoidSpec::small_module(), &Material::default_silicone())
            .unwrap();
        assert!((r.k_ax - 100.8).abs() < 0.1, "{}", r.k_ax);
        assert!((r.k_bend - 0.0332).abs() < 1e-4, "{}", r.k_bend);
        let g = derive_geometry(&r.spec).unwrap();
        let ratio = r.k_bend / r.k_ax;
        assert!(rel(ratio, 2.25 * g.mean_radius.powi(3) / r.spec.height) < 1e-12);
        assert!(r.feasible());
    }

    #[test]
    fn report_rejects_invalid_spec() {
        let mut s = HelicoidSpec::small_module();
        s.width = 0.04;
        assert!(stiffness_report(&s, &Material::default_silicone()).is_err());
    }

    #[test]
    fn sweep_helices_increasing() {
        let base = HelicoidSpec::literature_base();
        let rows = sweep(&base, SweepParam::Helices, &[3.0, 4.0, 5.0, 6.0], &Material::default_silicone());
        let k: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap().k_ax).collect();
        assert!(k.windows(2).all(|w| w[1] > w[0]), "{k:?}");
        assert!(sweep(&base, SweepParam::Thickness, &[], &Material::default_silicone()).is_empty());
    }

    #[test]
    fn sweep_thickness_is_cubic_without_run_correction() {
        // Oracle: with the 2t term removed from L_avg and alpha_avg the
        // thickness only enters through I, so k scales exactly as t^3.
        let base = HelicoidSpec::small_module();
        let e = 2.0e6;
        let k_no_run = |t: f64| {
            let s = HelicoidSpec { thickness: t, ..base };
            let run = std::f64::consts::PI * (s.diameter - s.width);
            let l = (s.height.powi(2) + run * run).sqrt() / (2.0 * s.helices as f64);
            let a = (2.0 * s.height / run).atan();
            12.0 * e * strut_inertia(&s) / (l.powi(3) * a.cos().powi(2))
        };
        let (t1, t2) = (0.003, 0.006);
        assert!(rel(k_no_run(t2) / k_no_run(t1), 8.0) < 1e-12);
        let rows = sweep(&base, SweepParam::Thickness, &[t1, t2], &Material::small_module_fit());
        let r: Vec<f64> = rows.iter().map(|r| r.result.as_ref().unwrap().k_ax).collect();
        // the 2t run correction shortens and steepens the strut, so growth
        // is above cubic (9.0895 by hand evaluation)
        assert!((r[1] / r[0] - 9.0895).abs() < 1e-4, "{}", r[1] / r[0]);
    }

    #[test]
    fn sweep_collects_row_errors() {
        let rows = sweep(
            &HelicoidSpec::small_module(),
            SweepParam::Width,
            &[0.008, 0.05, 0.01],
            &Material::default_silicone(),
        );
        assert_eq!(rows.len(), 3);
        assert!(rows[0].result.is_ok());
        assert!(rows[1].result.is_err());
        assert!(rows[2].result.is_ok());
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines[2], "w,0.05,,,");
        let v: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(v, rows[0].result.as_ref().unwrap().k_ax);
    }

    #[test]
    fn fractional_helix_count_rejected() {
        assert!(SweepParam::Helices.apply(&HelicoidSpec::small_module(), 2.5).is_none());
        assert!(SweepParam::Helices.apply(&HelicoidSpec::small_module(), 0.0).is_none());
    }

    #[test]
    fn series_helper() {
        assert_eq!(series_stack(100.0, 2), 50.0);
    }
}
