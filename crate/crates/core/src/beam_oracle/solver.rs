//! Direct stiffness assembly over a reduced DOF set and sparse Cholesky solve.

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

use super::element::{global_stiffness, Elastic};
use super::{BeamModel, NodalLoad, OracleError};

/// Pivots below this (after Jacobi scaling) count as zero-energy modes.
const PIVOT_TOL: f64 = 1e-13;
/// Dense eigen-analysis is only attempted for diagnostics below this size.
const DENSE_EIGEN_LIMIT: usize = 1500;

/// Each global DOF written as a combination of reduced unknowns.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub combos: Vec<Vec<(usize, f64)>>,
    pub n_reduced: usize,
}

impl DofMap {
    pub fn build(model: &BeamModel) -> Result<Self, OracleError> {
        let n = model.nodes.len();
        let mut master_of: Vec<Option<usize>> = vec![None; n];
        for link in &model.rigid_links {
            for &s in &link.slaves {
                if s == link.master || master_of[s].is_some() {
                    return Err(OracleError::InvalidLink(format!("node {s} tied twice")));
                }
                master_of[s] = Some(link.master);
            }
        }
        for link in &model.rigid_links {
            if master_of[link.master].is_some() {
                return Err(OracleError::InvalidLink(format!(
                    "master {} is itself a slave",
                    link.master
                )));
            }
        }
        let mut support_of = vec![None; n];
        for (i, s) in model.supports.iter().enumerate() {
            if master_of[s.node].is_some() {
                return Err(OracleError::InvalidLink(format!(
                    "node {} is both supported and tied",
                    s.node
                )));
            }
            if support_of[s.node].replace(i).is_some() {
                return Err(OracleError::InvalidLink(format!("node {} supported twice", s.node)));
            }
        }

        let mut combos: Vec<Vec<(usize, f64)>> = vec![Vec::new(); 6 * n];
        let mut next = 0usize;
        for node in 0..n {
            if master_of[node].is_some() {
                continue;
            }
            match support_of[node] {
                None => {
                    for d in 0..6 {
                        combos[6 * node + d].push((next, 1.0));
                        next += 1;
                    }
                }
                Some(si) => {
                    let sup = &model.supports[si];
                    // rows of `frame` are the support axes in global coordinates
                    for block in 0..2 {
                        for k in 0..3 {
                            if sup.fixed[3 * block + k] {
                                continue;
                            }
                            for j in 0..3 {
                                let c = sup.frame[k][j];
                                if c != 0.0 {
                                    combos[6 * node + 3 * block + j].push((next, c));
                                }
                            }
                            next += 1;
                        }
                    }
                }
            }
        }
        // u_s = u_m + theta_m x r,  theta_s = theta_m
        for node in 0..n {
            let Some(m) = master_of[node] else { continue };
            let r = model.nodes[node] - model.nodes[m];
            let th: [Vec<(usize, f64)>; 3] = std::array::from_fn(|i| combos[6 * m + 3 + i].clone());
            let ux: [Vec<(usize, f64)>; 3] = std::array::from_fn(|i| combos[6 * m + i].clone());
            let lin = |terms: &[(&Vec<(usize, f64)>, f64)]| {
                merge(
                    terms
                        .iter()
                        .filter(|(_, f)| *f != 0.0)
                        .flat_map(|(c, f)| c.iter().map(move |(i, v)| (*i, v * f)))
                        .collect(),
                )
            };
            combos[6 * node] = lin(&[(&ux[0], 1.0), (&th[1], r.z), (&th[2], -r.y)]);
            combos[6 * node + 1] = lin(&[(&ux[1], 1.0), (&th[2], r.x), (&th[0], -r.z)]);
            combos[6 * node + 2] = lin(&[(&ux[2], 1.0), (&th[0], r.y), (&th[1], -r.x)]);
            for i in 0..3 {
                combos[6 * node + 3 + i] = th[i].clone();
            }
        }
        Ok(Self { combos, n_reduced: next })
    }

    pub fn reduce_loads(&self, loads: &[NodalLoad], n_nodes: usize) -> Result<DVector<f64>, OracleError> {
        let mut f = DVector::zeros(self.n_reduced);
        for l in loads {
            if l.node >= n_nodes {
                return Err(OracleError::BadNode(l.node));
            }
            let g = [l.force, l.moment];
            for block in 0..2 {
                for j in 0..3 {
                    for &(i, c) in &self.combos[6 * l.node + 3 * block + j] {
                        f[i] += c * g[block][j];
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn expand(&self, u: &DVector<f64>, n_nodes: usize) -> Vec<NodeDisplacement> {
        (0..n_nodes)
            .map(|node| {
                let val = |d: usize| -> f64 {
                    self.combos[6 * node + d].iter().map(|&(i, c)| c * u[i]).sum()
                };
                NodeDisplacement {
                    translation: Vector3::new(val(0), val(1), val(2)),
                    rotation: Vector3::new(val(3), val(4), val(5)),
                }
            })
            .collect()
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn merge(mut terms: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
    for (i, v) in terms {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|t| t.1 != 0.0);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct NodeDisplacement {
    pub translation: Vector3<f64>,
    pub rotation: Vector3<f64>,
}

/// Result of a static solve. Immutable once produced.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Displacements {
    pub nodes: Vec<NodeDisplacement>,
    /// `||K u - f|| / ||f||` on the reduced system (0 for zero load).
    pub relative_residual: f64,
}

/// Reduced stiffness matrix in sparse form, with its COO entries kept for
/// residual checks.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub map: DofMap,
    entries: Vec<(usize, usize, f64)>,
    n_nodes: usize,
}

impl AssembledSystem {
    pub fn assemble(model: &BeamModel) -> Result<Self, OracleError> {
        model.check_elements()?;
        let map = DofMap::build(model)?;
        let mut entries = Vec::new();
        for (ei, el) in model.elements.iter().enumerate() {
            let mat = Elastic {
                youngs_modulus: el.youngs_modulus,
                shear_modulus: el.shear_modulus,
            };
            let ke = global_stiffness(
                &model.nodes[el.nodes[0]],
                &model.nodes[el.nodes[1]],
                &el.width_axis,
                &el.section,
                &mat,
            )
            .ok_or(OracleError::DegenerateElement(ei))?;
            let gdof = |a: usize| 6 * el.nodes[a / 6] + a % 6;
            for a in 0..12 {
                let ca = &map.combos[gdof(a)];
                if ca.is_empty() {
                    continue;
                }
                for b in 0..12 {
                    let k = ke[(a, b)];
                    if k == 0.0 {
                        continue;
                    }
                    for &(i, ci) in ca {
                        for &(j, cj) in &map.combos[gdof(b)] {
                            entries.push((i, j, ci * k * cj));
                        }
                    }
                }
            }
        }
        Ok(Self {
            map,
            entries,
            n_nodes: model.nodes.len(),
        })
    }

    pub fn size(&self) -> usize {
        self.map.n_reduced
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut k = DMatrix::zeros(n, n);
        for &(i, j, v) in &self.entries {
            k[(i, j)] += v;
        }
        k
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.size()];
        for &(i, j, v) in &self.entries {
            if i == j {
                d[i] += v;
            }
        }
        d
    }

    fn csc(&self) -> CscMatrix<f64> {
        let n = self.size();
        let mut coo = CooMatrix::new(n, n);
        for &(i, j, v) in &self.entries {
            coo.push(i, j, v);
        }
        CscMatrix::from(&coo)
    }

    /// Number of (near) zero eigenvalues of the Jacobi-scaled matrix, when
    /// the system is small enough for a dense eigen-decomposition.
    pub fn zero_energy_modes(&self) -> Option<usize> {
        let n = self.size();
        if n > DENSE_EIGEN_LIMIT {
            return None;
        }
        let d = self.diagonal();
        let mut k = self.dense();
        for i in 0..n {
            for j in 0..n {
                let s = (d[i] * d[j]).sqrt();
                k[(i, j)] = if s > 0.0 { k[(i, j)] / s } else { 0.0 };
            }
        }
        let eig = SymmetricEigen::new(k);
        let max = eig.eigenvalues.amax().max(1.0);
        Some(eig.eigenvalues.iter().filter(|&&l| l < 1e-10 * max).count())
    }

    pub fn factor(&self) -> Result<FactoredSystem<'_>, OracleError> {
        let n = self.size();
        if n == 0 {
            return Ok(FactoredSystem {
                system: self,
                chol: None,
                scale: Vec::new(),
                matrix: CscMatrix::zeros(0, 0),
            });
        }
        let d = self.diagonal();
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(self.singular());
        }
        let scale: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
        let mut coo = CooMatrix::new(n, n);
        // symbolic analysis walks the upper triangle, the numeric pass the lower
        for &(i, j, v) in &self.entries {
            coo.push(i, j, v * scale[i] * scale[j]);
        }
        let csc = CscMatrix::from(&coo);
        let chol = CscCholesky::factor(&csc).map_err(|_| self.singular())?;
        let l = chol.l();
        for col in 0..n {
            let c = l.col(col);
            let pivot = c
                .row_indices()
                .iter()
                .zip(c.values())
                .find(|(r, _)| **r == col)
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            if pivot * pivot < PIVOT_TOL {
                return Err(self.singular());
            }
        }
        Ok(FactoredSystem {
            system: self,
            chol: Some(chol),
            scale,
            matrix: self.csc(),
        })
    }

    fn singular(&self) -> OracleError {
        OracleError::Singular {
            zero_modes: self.zero_energy_modes(),
        }
    }
}

pub struct FactoredSystem<'a> {
    system: &'a AssembledSystem,
    chol: Option<CscCholesky<f64>>,
    scale: Vec<f64>,
    matrix: CscMatrix<f64>,
}

impl FactoredSystem<'_> {
    /// `f - K (u_hi + u_lo)` with each row accumulated in double-double
    /// precision, so the residual is not swamped by cancellation.
    fn residual(&self, u_hi: &DVector<f64>, u_lo: &DVector<f64>, f: &DVector<f64>) -> DVector<f64> {
        let mut hi = f.clone();
        let mut lo = DVector::zeros(f.len());
        for (col, c) in self.matrix.col_iter().enumerate() {
            let (uh, ul) = (u_hi[col], u_lo[col]);
            for (&row, &v) in c.row_indices().iter().zip(c.values()) {
                let p = -v * uh;
                let pe = (-v).mul_add(uh, -p);
                let (s, se) = two_sum(hi[row], p);
                hi[row] = s;
                lo[row] += se + pe - v * ul;
            }
        }
        hi + lo
    }

    fn solve_reduced(&self, f: &DVector<f64>) -> DVector<f64> {
        let Some(chol) = &self.chol else {
            return DVector::zeros(0);
        };
        let fs = DVector::from_iterator(f.len(), f.iter().zip(&self.scale).map(|(a, s)| a * s));
        let y = chol.solve(&fs);
        DVector::from_iterator(f.len(), y.column(0).iter().zip(&self.scale).map(|(a, s)| a * s))
    }

    pub fn solve(&self, loads: &[NodalLoad]) -> Result<Displacements, OracleError> {
        let sys = self.system;
        let f = sys.map.reduce_loads(loads, sys.n_nodes)?;
        let mut u = self.solve_reduced(&f);
        let mut u_lo = DVector::zeros(u.len());
        let fnorm = f.norm();
        let mut rel = 0.0;
        if fnorm > 0.0 {
            // iterative refinement with the solution carried as hi + lo
            let mut r = self.residual(&u, &u_lo, &f);
            rel = r.norm() / fnorm;
            for _ in 0..10 {
                if rel <= 1e-14 {
                    break;
                }
                let d = self.solve_reduced(&r);
                let (mut hi, mut lo) = (u.clone(), u_lo.clone());
                for i in 0..hi.len() {
                    let (s, e) = two_sum(hi[i], d[i]);
                    let (s2, e2) = two_sum(s, lo[i] + e);
                    hi[i] = s2;
                    lo[i] = e2;
                }
                let r_new = self.residual(&hi, &lo, &f);
                let rel_new = r_new.norm() / fnorm;
                if rel_new >= rel {
                    break;
                }
                (u, u_lo, r, rel) = (hi, lo, r_new, rel_new);
            }
            u += &u_lo;
        }
        if rel > 1e-9 {
            return Err(OracleError::Residual(rel));
        }
        Ok(Displacements {
            nodes: sys.map.expand(&u, sys.n_nodes),
            relative_residual: rel,
        })
    }
}
