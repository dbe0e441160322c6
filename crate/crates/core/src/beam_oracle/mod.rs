//! Frame-element models of single struts and whole segments, used as an
//! independent numerical check on the closed-form stiffness.

mod element;
mod solver;

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{derive_geometry, GeometryError, HelicoidSpec};
use crate::material::Material;

pub use element::{local_frame, local_stiffness, rect_torsion_constant, Section};
pub use solver::{AssembledSystem, Displacements, DofMap, FactoredSystem, NodeDisplacement};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("invalid discretization: {0}")]
    InvalidDiscretization(String),
    #[error("element {0} has zero length or an undefined orientation")]
    DegenerateElement(usize),
    #[error("node index {0} out of range")]
    BadNode(usize),
    #[error("invalid section on element {0}")]
    BadSection(usize),
    #[error("invalid rigid link or support: {0}")]
    InvalidLink(String),
    #[error("stiffness matrix is singular or indefinite ({})", match .zero_modes {
        Some(n) => format!("{n} zero-energy modes"),
        None => "zero-energy mode count not computed".to_string(),
    })]
    Singular { zero_modes: Option<usize> },
    #[error("solve residual {0:e} exceeds 1e-9")]
    Residual(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Element {
    pub nodes: [usize; 2],
    pub section: Section,
    pub youngs_modulus: f64,
    pub shear_modulus: f64,
    /// Global direction that the section's width follows; projected off the
    /// element axis to give local `y`.
    pub width_axis: Vector3<f64>,
}

/// Fixed DOFs at a node, expressed in a local orthonormal frame. `fixed`
/// holds three translations then three rotations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Support {
    pub node: usize,
    /// Rows are the frame axes in global coordinates.
    pub frame: [[f64; 3]; 3],
    pub fixed: [bool; 6],
}

impl Support {
    pub const GLOBAL: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    pub fn clamped(node: usize) -> Self {
        Self {
            node,
            frame: Self::GLOBAL,
            fixed: [true; 6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodalLoad {
    pub node: usize,
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
}

impl NodalLoad {
    pub fn force(node: usize, force: Vector3<f64>) -> Self {
        Self {
            node,
            force,
            moment: Vector3::zeros(),
        }
    }

    pub fn moment(node: usize, moment: Vector3<f64>) -> Self {
        Self {
            node,
            force: Vector3::zeros(),
            moment,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidLink {
    pub master: usize,
    pub slaves: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamModel {
    pub nodes: Vec<Vector3<f64>>,
    pub elements: Vec<Element>,
    pub supports: Vec<Support>,
    pub loads: Vec<NodalLoad>,
    pub rigid_links: Vec<RigidLink>,
    /// Node that [`oracle_stiffness`] loads: the strut tip or the top plate.
    pub probe: usize,
}

impl BeamModel {
    pub(crate) fn check_elements(&self) -> Result<(), OracleError> {
        let n = self.nodes.len();
        let in_range = |i: usize| if i < n { Ok(()) } else { Err(OracleError::BadNode(i)) };
        in_range(self.probe)?;
        for (i, e) in self.elements.iter().enumerate() {
            in_range(e.nodes[0])?;
            in_range(e.nodes[1])?;
            if !((self.nodes[e.nodes[1]] - self.nodes[e.nodes[0]]).norm() > 0.0) {
                return Err(OracleError::DegenerateElement(i));
            }
            if !e.section.is_valid() || !(e.youngs_modulus > 0.0) || !(e.shear_modulus > 0.0) {
                return Err(OracleError::BadSection(i));
            }
        }
        for s in &self.supports {
            in_range(s.node)?;
        }
        for l in &self.rigid_links {
            in_range(l.master)?;
            l.slaves.iter().try_for_each(|&s| in_range(s))?;
        }
        for l in &self.loads {
            in_range(l.node)?;
        }
        Ok(())
    }

    /// Checks every invariant, including positive definiteness.
    pub fn check(&self) -> Result<(), OracleError> {
        AssembledSystem::assemble(self)?.factor().map(|_| ())
    }

    pub fn assemble(&self) -> Result<AssembledSystem, OracleError> {
        AssembledSystem::assemble(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn add_element(&mut self, a: usize, b: usize, section: Section, mat: &Material, width_axis: Vector3<f64>) {
        self.elements.push(Element {
            nodes: [a, b],
            section,
            youngs_modulus: mat.youngs_modulus,
            shear_modulus: mat.shear_modulus(),
            width_axis,
        });
    }
}

pub fn solve_static(model: &BeamModel) -> Result<Displacements, OracleError> {
    let sys = model.assemble()?;
    let f = sys.factor()?;
    f.solve(&model.loads)
}

fn check_n(n: usize, what: &str) -> Result<(), OracleError> {
    if n == 0 {
        Err(OracleError::InvalidDiscretization(format!("{what} must be at least 1")))
    } else {
        Ok(())
    }
}

fn empty_model(probe: usize) -> BeamModel {
    BeamModel {
        nodes: Vec::new(),
        elements: Vec::new(),
        supports: Vec::new(),
        loads: Vec::new(),
        rigid_links: Vec::new(),
        probe,
    }
}

/// Tip support for a guided strut: all rotations fixed, translation along
/// the chord and along `lateral` fixed, so the tip only moves transverse to
/// the chord within the load plane.
fn guided_tip(node: usize, chord: Vector3<f64>, lateral: Vector3<f64>) -> Support {
    let e1 = chord.normalize();
    let e2 = (lateral - e1 * e1.dot(&lateral)).normalize();
    let e3 = e1.cross(&e2);
    Support {
        node,
        frame: [e1.into(), e2.into(), e3.into()],
        fixed: [true, true, false, true, true, true],
    }
}

/// Straight beam from the origin inclined at `alpha` above the x axis in the
/// x-z plane. The far end is guided and carries a unit downward force.
pub fn build_guided_cantilever(
    length: f64,
    alpha: f64,
    section: Section,
    material: &Material,
    n_elems: usize,
) -> Result<BeamModel, OracleError> {
    check_n(n_elems, "n_elems")?;
    if !(length > 0.0) || !length.is_finite() {
        return Err(OracleError::InvalidDiscretization(format!("length {length}")));
    }
    let dir = Vector3::new(alpha.cos(), 0.0, alpha.sin());
    let mut m = empty_model(n_elems);
    m.nodes = (0..=n_elems).map(|i| dir * (length * i as f64 / n_elems as f64)).collect();
    for i in 0..n_elems {
        m.add_element(i, i + 1, section, material, Vector3::y());
    }
    m.supports.push(Support::clamped(0));
    m.supports.push(guided_tip(n_elems, dir, Vector3::y()));
    m.loads.push(NodalLoad::force(n_elems, -Vector3::z()));
    Ok(m)
}

/// Polyline along a helix of radius `radius`, arc length `arc_length` and
/// pitch angle `alpha`, starting at the origin and with guided-tip
/// conditions matching [`build_guided_cantilever`].
pub fn build_helical_arc(
    radius: f64,
    arc_length: f64,
    alpha: f64,
    section: Section,
    material: &Material,
    n_elems: usize,
) -> Result<BeamModel, OracleError> {
    check_n(n_elems, "n_elems")?;
    if !(radius > 0.0 && arc_length > 0.0) {
        return Err(OracleError::InvalidDiscretization(format!(
            "radius {radius}, arc length {arc_length}"
        )));
    }
    let sweep = arc_length * alpha.cos() / radius;
    // relative to the start point to keep precision as radius grows
    let point = |psi: f64, s: f64| {
        Vector3::new(-2.0 * radius * (psi / 2.0).sin().powi(2), radius * psi.sin(), s * alpha.sin())
    };
    let inward = |psi: f64| Vector3::new(-psi.cos(), -psi.sin(), 0.0);
    let mut m = empty_model(n_elems);
    m.nodes = (0..=n_elems)
        .map(|i| {
            let f = i as f64 / n_elems as f64;
            point(sweep * f, arc_length * f)
        })
        .collect();
    for i in 0..n_elems {
        let mid = sweep * (i as f64 + 0.5) / n_elems as f64;
        m.add_element(i, i + 1, section, material, inward(mid));
    }
    m.supports.push(Support::clamped(0));
    m.supports.push(guided_tip(n_elems, m.nodes[n_elems], inward(sweep)));
    m.loads.push(NodalLoad::force(n_elems, -Vector3::z()));
    Ok(m)
}

/// Guided cantilever with the segment's averaged strut length and angle.
pub fn build_strut(spec: &HelicoidSpec, material: &Material, n_elems: usize) -> Result<BeamModel, OracleError> {
    let g = derive_geometry(spec)?;
    build_guided_cantilever(
        g.strut_length_avg,
        g.alpha_avg,
        Section::rectangular(spec.width, spec.thickness),
        material,
        n_elems,
    )
}

/// Curved counterpart of [`build_strut`] on the centroid radius.
pub fn build_helical_strut(
    spec: &HelicoidSpec,
    material: &Material,
    n_elems: usize,
) -> Result<BeamModel, OracleError> {
    let g = derive_geometry(spec)?;
    build_helical_arc(
        g.centroid_radius,
        g.strut_length_avg,
        g.alpha_avg,
        Section::rectangular(spec.width, spec.thickness),
        material,
        n_elems,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeTopology {
    /// `N_h` disjoint right-handed half-turn helices.
    #[default]
    Independent,
    /// Right- and left-handed helices sharing nodes where they cross.
    Crossed,
}

/// Whole-segment lattice between two rigid plates. The bottom plate is the
/// fixed master, the top plate the loaded master ([`BeamModel::probe`]).
/// Each helix is cut into `N_h` struts of `elems_per_strut` elements.
pub fn build_segment_lattice(
    spec: &HelicoidSpec,
    material: &Material,
    elems_per_strut: usize,
    topology: LatticeTopology,
) -> Result<BeamModel, OracleError> {
    check_n(elems_per_strut, "elems_per_strut")?;
    let g = derive_geometry(spec)?;
    let nh = spec.helices as usize;
    let steps = nh * elems_per_strut;
    let rc = g.centroid_radius;
    let h = spec.height;
    let section = Section::rectangular(spec.width, spec.thickness);
    // angles in units of pi / steps, so shared crossing nodes coincide exactly
    let ring = 2 * steps;
    let position = |k: usize, a: i64| {
        let ang = PI * a.rem_euclid(ring as i64) as f64 / steps as f64;
        Vector3::new(rc * ang.cos(), rc * ang.sin(), h * k as f64 / steps as f64)
    };

    let mut m = empty_model(0);
    let mut index: HashMap<(usize, i64), usize> = HashMap::new();
    let mut node_at = |m: &mut BeamModel, k: usize, a: i64| -> usize {
        let key = (k, a.rem_euclid(ring as i64));
        *index.entry(key).or_insert_with(|| {
            m.nodes.push(position(k, a));
            m.nodes.len() - 1
        })
    };
    let hands: &[i64] = match topology {
        LatticeTopology::Independent => &[1],
        LatticeTopology::Crossed => &[1, -1],
    };
    let mut bottom = Vec::new();
    let mut top = Vec::new();
    for &hand in hands {
        for i in 0..nh {
            let a0 = (2 * elems_per_strut * i) as i64;
            let mut prev = node_at(&mut m, 0, a0);
            bottom.push(prev);
            for k in 1..=steps {
                let a = a0 + hand * k as i64;
                let cur = node_at(&mut m, k, a);
                let mid_ang = PI * (a0 as f64 + hand as f64 * (k as f64 - 0.5)) / steps as f64;
                let inward = Vector3::new(-mid_ang.cos(), -mid_ang.sin(), 0.0);
                m.add_element(prev, cur, section, material, inward);
                prev = cur;
            }
            top.push(prev);
        }
    }
    bottom.sort_unstable();
    bottom.dedup();
    top.sort_unstable();
    top.dedup();

    let base = m.nodes.len();
    m.nodes.push(Vector3::zeros());
    m.nodes.push(Vector3::new(0.0, 0.0, h));
    m.probe = base + 1;
    m.supports.push(Support::clamped(base));
    m.rigid_links.push(RigidLink { master: base, slaves: bottom });
    m.rigid_links.push(RigidLink { master: base + 1, slaves: top });
    m.loads.push(NodalLoad::force(base + 1, -Vector3::z()));
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StiffnessMode {
    Axial,
    Bending,
}

impl std::str::FromStr for StiffnessMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "axial" => Ok(Self::Axial),
            "bending" => Ok(Self::Bending),
            _ => Err(format!("unknown mode {s:?}, expected axial or bending")),
        }
    }
}

/// Unit load on the probe node, with the model's own loads replaced.
/// Axial mode pushes down along `-z` and returns `1 / |u_z|` in N/m; bending
/// applies a unit moment about `x` and returns `1 / theta_x` in N·m/rad.
pub fn oracle_stiffness(model: &BeamModel, mode: StiffnessMode) -> Result<f64, OracleError> {
    let sys = model.assemble()?;
    let fac = sys.factor()?;
    let p = model.probe;
    let (load, pick): (NodalLoad, fn(&NodeDisplacement) -> f64) = match mode {
        StiffnessMode::Axial => (NodalLoad::force(p, -Vector3::z()), |d| -d.translation.z),
        StiffnessMode::Bending => (NodalLoad::moment(p, Vector3::x()), |d| d.rotation.x),
    };
    let u = fac.solve(&[load])?;
    let v = pick(&u.nodes[p]);
    if !(v.abs() > 0.0) {
        return Err(OracleError::Singular { zero_modes: None });
    }
    Ok(1.0 / v.abs())
}
