//! Two-node, twelve-DOF Euler-Bernoulli frame element.

use nalgebra::{Matrix3, SMatrix, Vector3};
use serde::{Deserialize, Serialize};

pub type Matrix12 = SMatrix<f64, 12, 12>;

/// Rectangular cross-section. The local `y` axis runs along the width and
/// the local `z` axis along the thickness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub width: f64,
    pub thickness: f64,
    pub area: f64,
    /// `t w^3 / 12`, resists deflection along the width axis.
    pub i_strong: f64,
    /// `w t^3 / 12`, resists deflection along the thickness axis.
    pub i_weak: f64,
    pub torsion: f64,
}

impl Section {
    pub fn rectangular(width: f64, thickness: f64) -> Self {
        Self {
            width,
            thickness,
            area: width * thickness,
            i_strong: thickness * width.powi(3) / 12.0,
            i_weak: width * thickness.powi(3) / 12.0,
            torsion: rect_torsion_constant(width, thickness),
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.area, self.i_strong, self.i_weak, self.torsion]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite())
    }
}

/// Roark's approximation for a solid rectangle, `a >= b`:
/// `a b^3 (1/3 - 0.21 (b/a) (1 - b^4 / (12 a^4)))`.
pub fn rect_torsion_constant(w: f64, t: f64) -> f64 {
    let (a, b) = if w >= t { (w, t) } else { (t, w) };
    a * b.powi(3) * (1.0 / 3.0 - 0.21 * (b / a) * (1.0 - b.powi(4) / (12.0 * a.powi(4))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Elastic {
    pub youngs_modulus: f64,
    pub shear_modulus: f64,
}

/// Local-to-global rotation. Rows are the element axes expressed in global
/// coordinates; `width_hint` is projected off the element axis to form `y`.
pub fn local_frame(axis: &Vector3<f64>, width_hint: &Vector3<f64>) -> Option<Matrix3<f64>> {
    let ex = axis.try_normalize(0.0)?;
    let ey = (width_hint - ex * ex.dot(width_hint)).try_normalize(1e-12)?;
    let ez = ex.cross(&ey);
    Some(Matrix3::from_rows(&[ex.transpose(), ey.transpose(), ez.transpose()]))
}

pub fn local_stiffness(length: f64, section: &Section, mat: &Elastic) -> Matrix12 {
    let l = length;
    let e = mat.youngs_modulus;
    let mut k = Matrix12::zeros();

    let ea = e * section.area / l;
    k[(0, 0)] = ea;
    k[(6, 6)] = ea;
    k[(0, 6)] = -ea;

    let gj = mat.shear_modulus * section.torsion / l;
    k[(3, 3)] = gj;
    k[(9, 9)] = gj;
    k[(3, 9)] = -gj;

    // deflection along y, rotation about z
    let iz = section.i_strong;
    let (a, b, c, d) = (12.0 * e * iz / l.powi(3), 6.0 * e * iz / l.powi(2), 4.0 * e * iz / l, 2.0 * e * iz / l);
    k[(1, 1)] = a;
    k[(1, 5)] = b;
    k[(1, 7)] = -a;
    k[(1, 11)] = b;
    k[(5, 5)] = c;
    k[(5, 7)] = -b;
    k[(5, 11)] = d;
    k[(7, 7)] = a;
    k[(7, 11)] = -b;
    k[(11, 11)] = c;

    // deflection along z, rotation about y
    let iy = section.i_weak;
    let (a, b, c, d) = (12.0 * e * iy / l.powi(3), 6.0 * e * iy / l.powi(2), 4.0 * e * iy / l, 2.0 * e * iy / l);
    k[(2, 2)] = a;
    k[(2, 4)] = -b;
    k[(2, 8)] = -a;
    k[(2, 10)] = -b;
    k[(4, 4)] = c;
    k[(4, 8)] = b;
    k[(4, 10)] = d;
    k[(8, 8)] = a;
    k[(8, 10)] = b;
    k[(10, 10)] = c;

    for i in 0..12 {
        for j in 0..i {
            k[(i, j)] = k[(j, i)];
        }
    }
    k
}

pub fn global_stiffness(
    xi: &Vector3<f64>,
    xj: &Vector3<f64>,
    width_hint: &Vector3<f64>,
    section: &Section,
    mat: &Elastic,
) -> Option<Matrix12> {
    let axis = xj - xi;
    let length = axis.norm();
    let r = local_frame(&axis, width_hint)?;
    let mut t = Matrix12::zeros();
    for b in 0..4 {
        t.fixed_view_mut::<3, 3>(3 * b, 3 * b).copy_from(&r);
    }
    let kl = local_stiffness(length, section, mat);
    Some(t.transpose() * kl * t)
}
