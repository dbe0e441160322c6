//! Design analysis for trimmed-helicoid soft-rigid hybrid robot segments.
//!
//! * [`geometry`] / [`material`]: the five-parameter segment and its
//!   elastic constants.
//! * [`stiffness`]: closed-form axial and bending stiffness.
//! * [`beam_oracle`]: 3D frame-element models used to check the closed forms.
//! * [`design_opt`]: inverse design against stiffness and workspace targets.
//! * [`mesh`]: watertight STL output of the segment solid.
//! * [`kinematics`]: plate limits, constant-curvature kinematics and tendons.
//! * [`reference`]: published measurements for the two prototype modules.

pub mod beam_oracle;
pub mod design_opt;
pub mod geometry;
pub mod kinematics;
pub mod material;
pub mod mesh;
pub mod reference;
pub mod stiffness;

pub use geometry::{derive_geometry, DerivedGeometry, HelicoidSpec, ManufacturingLimits};
pub use material::Material;
pub use stiffness::{axial_stiffness, bending_stiffness, stiffness_report, StiffnessReport};
