//! Parametric trimmed-helicoid segment and the derived quantities every
//! downstream model consumes.
//!
//! All lengths are meters. A segment is fully described by five numbers:
//! height `H`, outer diameter `D`, radial strut width `w`, strut thickness
//! `t` and the helix count `N_h`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Strain above which the Euler-Bernoulli small-strain assumption is
/// treated as questionable.
pub const SMALL_STRAIN_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid helicoid spec: {0}")]
    InvalidSpec(Violation),
    #[error("degenerate geometry: pi*(D - w) - 2t = {0:.6e} must be positive")]
    Degenerate(f64),
}

/// Five design parameters of one helicoid segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelicoidSpec {
    #[serde(rename = "H")]
    pub height: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "t")]
    pub thickness: f64,
    #[serde(rename = "N_h")]
    pub helices: u32,
}

impl HelicoidSpec {
    pub fn new(height: f64, diameter: f64, width: f64, thickness: f64, helices: u32) -> Self {
        Self {
            height,
            diameter,
            width,
            thickness,
            helices,
        }
    }

    /// "Small and flexible" module: H = 120 mm, D = 60 mm, w = 8 mm,
    /// t = 4 mm, three helices.
    pub fn small_module() -> Self {
        Self::new(0.12, 0.06, 0.008, 0.004, 3)
    }

    /// "Large and stiff" module: H = 170 mm, D = 80 mm, w = 12 mm,
    /// t = 5 mm, four helices.
    pub fn large_module() -> Self {
        Self::new(0.17, 0.08, 0.012, 0.005, 4)
    }

    /// Base geometry of the earlier trimmed-helicoid literature
    /// (H = 10 cm, D = 6 cm, six helices, t = 3 mm, w = 6 mm).
    pub fn literature_base() -> Self {
        Self::new(0.10, 0.06, 0.006, 0.003, 6)
    }

    /// Returns a copy with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(
            self.height * s,
            self.diameter * s,
            self.width * s,
            self.thickness * s,
            self.helices,
        )
    }

    /// Checks the type invariants and returns the first violation.
    pub fn check(&self) -> Result<(), GeometryError> {
        match self.invariant_violations().into_iter().next() {
            Some(v) => Err(GeometryError::InvalidSpec(v)),
            None => Ok(()),
        }
    }

    /// Structural invariants only, independent of manufacturing limits.
    pub fn invariant_violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let positive = [
            ("H", self.height),
            ("D", self.diameter),
            ("w", self.width),
            ("t", self.thickness),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                out.push(Violation::new(name, "> 0", 0.0, value));
            }
        }
        if self.helices < 1 {
            out.push(Violation::new("N_h", ">= 1", 1.0, self.helices as f64));
        }
        if !out.is_empty() {
            return out;
        }
        let half_d = self.diameter / 2.0;
        if self.width >= half_d {
            out.push(Violation::new("w", "w < D/2", half_d, self.width));
        }
        let stack = self.thickness * self.helices as f64;
        if stack >= self.height {
            out.push(Violation::new("t*N_h", "t*N_h < H", self.height, stack));
        }
        out
    }
}

impl fmt::Display for HelicoidSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "H={} D={} w={} t={} N_h={}",
            self.height, self.diameter, self.width, self.thickness, self.helices
        )
    }
}

/// Quantities derived from a [`HelicoidSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry {
    /// Helical angle at the outer diameter, radians.
    pub alpha: f64,
    pub radius: f64,
    /// Height per helix, `H / N_h`.
    pub pitch_height: f64,
    /// Nominal strut length.
    pub strut_length: f64,
    /// Strut length evaluated at the strut centroid.
    pub strut_length_avg: f64,
    /// Helical angle evaluated at the strut centroid, radians.
    pub alpha_avg: f64,
    /// Strut centroid radius `(D - w) / 2`.
    pub centroid_radius: f64,
    /// Mean radius `(2R - w) / 2` of the equivalent solid bar.
    pub mean_radius: f64,
    /// Equivalent bar area `pi * R_m^2`.
    pub bar_area: f64,
    /// Equivalent bar second moment `pi / 4 * R_m^4`.
    pub bar_inertia: f64,
}

pub fn derive_geometry(spec: &HelicoidSpec) -> Result<DerivedGeometry, GeometryError> {
    spec.check()?;
    let HelicoidSpec {
        height: h,
        diameter: d,
        width: w,
        thickness: t,
        helices,
    } = *spec;
    let n = helices as f64;

    let run_avg = PI * (d - w) - 2.0 * t;
    if !(run_avg > 0.0) {
        return Err(GeometryError::Degenerate(run_avg));
    }

    let alpha = (2.0 * h / (PI * d)).atan();
    let strut_length = ((h / n).powi(2) + (PI * d / n).powi(2)).sqrt() / 2.0;
    let strut_length_avg = (h * h + run_avg * run_avg).sqrt() / (2.0 * n);
    let alpha_avg = (2.0 * h / run_avg).atan();

    let radius = d / 2.0;
    let mean_radius = (2.0 * radius - w) / 2.0;
    let bar_area = PI * mean_radius.powi(2);
    let bar_inertia = PI / 4.0 * mean_radius.powi(4);

    Ok(DerivedGeometry {
        alpha,
        radius,
        pitch_height: h / n,
        strut_length,
        strut_length_avg,
        alpha_avg,
        centroid_radius: (d - w) / 2.0,
        mean_radius,
        bar_area,
        bar_inertia,
    })
}

/// Peak bending strain of a strut at full compression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainEstimate {
    pub eps_max: f64,
    pub small_strain_ok: bool,
}

/// Peak strain `t * alpha / (2 L)` with nominal `alpha` and `L`.
///
/// The frequently quoted 4.58 % for the literature base geometry is what
/// `t * alpha / (3 L)` gives; this function keeps the `2 L` form and the
/// report surfaces both numbers (see [`StrainDiscrepancy`]).
pub fn max_strain(spec: &HelicoidSpec) -> Result<StrainEstimate, GeometryError> {
    let g = derive_geometry(spec)?;
    let eps_max = spec.thickness * g.alpha / (2.0 * g.strut_length);
    Ok(StrainEstimate {
        eps_max,
        small_strain_ok: eps_max < SMALL_STRAIN_LIMIT,
    })
}

/// Documents the gap between the strain formula and the quoted base-case
/// figure so reports can show it next to the computed value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrainDiscrepancy {
    pub formula: &'static str,
    pub base_case_formula_value: f64,
    pub base_case_quoted_value: f64,
    pub quoted_value_matches: &'static str,
}

pub const QUOTED_BASE_CASE_STRAIN: f64 = 0.0458;

pub fn strain_discrepancy() -> StrainDiscrepancy {
    let base = HelicoidSpec::literature_base();
    let value = max_strain(&base)
        .map(|s| s.eps_max)
        .unwrap_or(f64::NAN);
    StrainDiscrepancy {
        formula: "t*alpha/(2*L)",
        base_case_formula_value: value,
        base_case_quoted_value: QUOTED_BASE_CASE_STRAIN,
        quoted_value_matches: "t*alpha/(3*L)",
    }
}

/// User-adjustable manufacturability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManufacturingLimits {
    pub min_thickness: f64,
    /// Minimum vertical clearance `H / N_h - t` between stacked struts.
    pub min_gap: f64,
    pub max_strain: f64,
}

impl Default for ManufacturingLimits {
    fn default() -> Self {
        Self {
            min_thickness: 0.002,
            min_gap: 0.001,
            max_strain: SMALL_STRAIN_LIMIT,
        }
    }
}

/// One violated bound, named by parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub parameter: String,
    pub rule: String,
    pub bound: f64,
    pub actual: f64,
}

impl Violation {
    fn new(parameter: &str, rule: &str, bound: f64, actual: f64) -> Self {
        Self {
            parameter: parameter.to_owned(),
            rule: rule.to_owned(),
            bound,
            actual,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: requires {} (bound {}, actual {})",
            self.parameter, self.rule, self.bound, self.actual
        )
    }
}

/// Lists every invariant and limit violation. An empty list means the spec
/// is valid and manufacturable under `limits`.
pub fn validate_spec(spec: &HelicoidSpec, limits: &ManufacturingLimits) -> Vec<Violation> {
    let mut out = spec.invariant_violations();
    if out.iter().any(|v| v.rule == "> 0" || v.rule == ">= 1") {
        return out;
    }
    if spec.thickness < limits.min_thickness {
        out.push(Violation::new(
            "t",
            "t >= min_thickness",
            limits.min_thickness,
            spec.thickness,
        ));
    }
    let gap = spec.height / spec.helices as f64 - spec.thickness;
    if gap < limits.min_gap {
        out.push(Violation::new("gap", "H/N_h - t >= min_gap", limits.min_gap, gap));
    }
    match max_strain(spec) {
        Ok(s) if s.eps_max > limits.max_strain => out.push(Violation::new(
            "eps_max",
            "eps_max <= max_strain",
            limits.max_strain,
            s.eps_max,
        )),
        Ok(_) => {}
        Err(GeometryError::Degenerate(run)) => {
            out.push(Violation::new("pi*(D-w)-2t", "> 0", 0.0, run));
        }
        // invariant failures are already listed above
        Err(GeometryError::InvalidSpec(_)) => {}
    }
    out
}
