//! Inverse design: search `(H, D, w, t, N_h)` for specs meeting stiffness,
//! workspace and manufacturability targets.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{validate_spec, HelicoidSpec, ManufacturingLimits, SMALL_STRAIN_LIMIT};
use crate::kinematics::{max_bending, PlateSpec};
use crate::material::{Material, MaterialError};
use crate::stiffness::{stiffness_report_with_limits, StiffnessReport};

/// Offset added to the objective of specs whose closed forms cannot be
/// evaluated at all.
const INVALID_OBJECTIVE: f64 = 1e6;
const GRID: [f64; 3] = [1.0 / 6.0, 0.5, 5.0 / 6.0];
/// Seeds refined per `N_h` branch.
const REFINED_SEEDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("invalid targets: {0}")]
    InvalidTargets(String),
    #[error("no feasible design found; nearest candidate has objective {:.6e}", .nearest.objective_value)]
    NoFeasibleDesign { nearest: Box<DesignResult> },
    #[error(transparent)]
    Material(#[from] MaterialError),
}

/// Target value with a relative tolerance band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub target: f64,
    /// Relative half-width, e.g. `0.01` for ±1%.
    pub band: f64,
}

impl Band {
    fn excess(&self, value: f64) -> f64 {
        ((value / self.target - 1.0).abs() - self.band).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "H")]
    pub height: [f64; 2],
    #[serde(rename = "D")]
    pub diameter: [f64; 2],
    #[serde(rename = "w")]
    pub width: [f64; 2],
    #[serde(rename = "t")]
    pub thickness: [f64; 2],
    #[serde(rename = "N_h")]
    pub helices: Vec<u32>,
}

impl Bounds {
    fn ranges(&self) -> [[f64; 2]; 4] {
        [self.height, self.diameter, self.width, self.thickness]
    }

    fn spec_at(&self, x: &[f64; 4], helices: u32) -> HelicoidSpec {
        let r = self.ranges();
        let v = |i: usize| r[i][0] + x[i].clamp(0.0, 1.0) * (r[i][1] - r[i][0]);
        HelicoidSpec::new(v(0), v(1), v(2), v(3), helices)
    }

    /// Relative distance outside the box, summed over parameters.
    fn excess(&self, spec: &HelicoidSpec) -> f64 {
        let vals = [spec.height, spec.diameter, spec.width, spec.thickness];
        let mut e: f64 = self
            .ranges()
            .iter()
            .zip(vals)
            .map(|([lo, hi], v)| ((lo - v).max(v - hi)).max(0.0) / (hi - lo).max(lo.abs()))
            .sum();
        if !self.helices.contains(&spec.helices) {
            e += 1.0;
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceTarget {
    pub plate: PlateSpec,
    /// Minimum required compression `H - 2 h_p (N_p + 1)`, m.
    pub delta_l_min: f64,
    /// Minimum bend at full compression margin, rad.
    pub theta_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Weights {
    pub k_ax: f64,
    pub k_bend: f64,
    pub penalty: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            k_ax: 1.0,
            k_bend: 1.0,
            penalty: 1e3,
        }
    }
}

fn default_eps_limit() -> f64 {
    SMALL_STRAIN_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    #[serde(default)]
    pub k_ax: Option<Band>,
    #[serde(default)]
    pub k_bend: Option<Band>,
    #[serde(default)]
    pub workspace: Option<WorkspaceTarget>,
    #[serde(default = "default_eps_limit")]
    pub eps_max_limit: f64,
    pub bounds: Bounds,
    #[serde(default)]
    pub weights: Weights,
}

impl DesignTargets {
    pub fn check(&self) -> Result<(), DesignError> {
        let bad = |m: String| Err(DesignError::InvalidTargets(m));
        if self.k_ax.is_none() && self.k_bend.is_none() && self.workspace.is_none() {
            return bad("at least one of k_ax, k_bend or workspace must be given".into());
        }
        for (name, b) in [("k_ax", self.k_ax), ("k_bend", self.k_bend)] {
            if let Some(b) = b {
                if !(b.target > 0.0 && b.target.is_finite()) || !(b.band >= 0.0) {
                    return bad(format!("{name}: target must be > 0 and band >= 0"));
                }
            }
        }
        let names = ["H", "D", "w", "t"];
        for (n, [lo, hi]) in names.iter().zip(self.bounds.ranges()) {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return bad(format!("bounds for {n} must satisfy 0 < lo <= hi, got [{lo}, {hi}]"));
            }
        }
        if self.bounds.helices.is_empty() || self.bounds.helices.contains(&0) {
            return bad("N_h set must be non-empty and >= 1".into());
        }
        let w = self.weights;
        if [w.k_ax, w.k_bend, w.penalty].iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return bad("weights must be non-negative".into());
        }
        if w.k_ax + w.k_bend + w.penalty == 0.0 {
            return bad("weights must not all be zero".into());
        }
        if !(self.eps_max_limit > 0.0) {
            return bad("eps_max_limit must be positive".into());
        }
        if let Some(ws) = &self.workspace {
            ws.plate
                .check()
                .or_else(|e| bad(e.to_string()))?;
        }
        Ok(())
    }

    fn limits(&self) -> ManufacturingLimits {
        ManufacturingLimits {
            max_strain: self.eps_max_limit,
            ..ManufacturingLimits::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkspaceAchieved {
    pub delta_l_max: f64,
    pub theta_max: f64,
}

fn workspace_of(spec: &HelicoidSpec, ws: &WorkspaceTarget) -> WorkspaceAchieved {
    let delta_l_max = spec.height - ws.plate.stack_height();
    WorkspaceAchieved {
        delta_l_max,
        theta_max: max_bending(&ws.plate, delta_l_max),
    }
}

/// Objective parts for one spec.
#[derive(Debug, Clone, PartialEq)]
struct Evaluation {
    value: f64,
    feasible: bool,
    met: bool,
}

fn evaluate(spec: &HelicoidSpec, targets: &DesignTargets, material: &Material) -> Evaluation {
    let w = targets.weights;
    let report = match stiffness_report_with_limits(spec, material, &targets.limits()) {
        Ok(r) => r,
        Err(_) => {
            let mag: f64 = validate_spec(spec, &targets.limits())
                .iter()
                .map(|v| relative_violation(v.bound, v.actual))
                .sum();
            return Evaluation {
                value: w.penalty * (INVALID_OBJECTIVE + mag + targets.bounds.excess(spec)),
                feasible: false,
                met: false,
            };
        }
    };
    let mut fit = 0.0;
    let mut met = true;
    if let Some(b) = targets.k_ax {
        let e = b.excess(report.k_ax);
        fit += w.k_ax * e * e;
        met &= e == 0.0;
    }
    if let Some(b) = targets.k_bend {
        let e = b.excess(report.k_bend);
        fit += w.k_bend * e * e;
        met &= e == 0.0;
    }
    let mut hinge: f64 = report
        .violations
        .iter()
        .map(|v| relative_violation(v.bound, v.actual))
        .sum();
    let mut violated = !report.violations.is_empty();
    if let Some(ws) = &targets.workspace {
        let a = workspace_of(spec, ws);
        for (need, got) in [(ws.delta_l_min, a.delta_l_max), (ws.theta_min, a.theta_max)] {
            if got < need {
                violated = true;
                hinge += (need - got) / need.abs().max(f64::MIN_POSITIVE);
            }
        }
    }
    let out_of_box = targets.bounds.excess(spec);
    if out_of_box > 0.0 {
        violated = true;
        hinge += out_of_box;
    }
    let value = if violated { fit + w.penalty * (1.0 + hinge) } else { fit };
    Evaluation {
        value,
        feasible: !violated,
        met: met && !violated,
    }
}

fn relative_violation(bound: f64, actual: f64) -> f64 {
    let scale = bound.abs().max(actual.abs()).max(f64::MIN_POSITIVE);
    ((bound - actual).abs() / scale).max(1e-12)
}

/// Weighted squared relative stiffness errors beyond their bands, plus
/// `penalty * (1 + sum of relative violations)` when any hard constraint
/// (manufacturing limits, strain limit, workspace, bounds) fails. Zero iff
/// all targets are met within their bands.
pub fn objective(spec: &HelicoidSpec, targets: &DesignTargets, material: &Material) -> f64 {
    evaluate(spec, targets, material).value
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    /// 1-based evaluation counter across all branches.
    pub evaluation: usize,
    pub objective: f64,
    pub spec: HelicoidSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DesignResult {
    pub best_spec: HelicoidSpec,
    pub achieved: StiffnessReport,
    pub workspace: Option<WorkspaceAchieved>,
    pub objective_value: f64,
    /// Hard constraints hold.
    pub feasible: bool,
    /// Hard constraints hold and every target is within its band.
    pub targets_met: bool,
    pub evaluations: usize,
    /// Each improvement of the running best, in evaluation order.
    pub trace: Vec<TraceEntry>,
}

impl DesignResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("evaluation,objective,H,D,w,t,N_h\n");
        for e in &self.trace {
            let p = &e.spec;
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.evaluation, e.objective, p.height, p.diameter, p.width, p.thickness, p.helices
            ));
        }
        s
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    spec: HelicoidSpec,
    eval: Evaluation,
}

fn spec_key(s: &HelicoidSpec) -> (u32, f64, f64, f64, f64) {
    (s.helices, s.height, s.diameter, s.width, s.thickness)
}

/// Objective first, then the lexicographically smaller spec.
fn better(a: &Candidate, b: &Candidate) -> Ordering {
    let (ka, kb) = (spec_key(&a.spec), spec_key(&b.spec));
    a.eval
        .value
        .total_cmp(&b.eval.value)
        .then(ka.0.cmp(&kb.0))
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.total_cmp(&kb.2))
        .then(ka.3.total_cmp(&kb.3))
        .then(ka.4.total_cmp(&kb.4))
}

/// Evaluation log for one `N_h` branch.
struct Branch {
    log: Vec<Candidate>,
}

impl Branch {
    fn eval(&mut self, x: &[f64; 4], nh: u32, targets: &DesignTargets, material: &Material) -> f64 {
        let spec = targets.bounds.spec_at(x, nh);
        let eval = evaluate(&spec, targets, material);
        let v = eval.value;
        self.log.push(Candidate { spec, eval });
        v
    }
}

/// Nelder-Mead in the unit box; points are clamped into `[0, 1]^4`.
fn nelder_mead(
    start: [f64; 4],
    f0: f64,
    budget: usize,
    mut f: impl FnMut(&[f64; 4]) -> f64,
) {
    if budget == 0 || f0 == 0.0 {
        return;
    }
    let clamp = |p: [f64; 4]| p.map(|v| v.clamp(0.0, 1.0));
    let mut used = 0usize;
    let mut simplex: Vec<([f64; 4], f64)> = vec![(start, f0)];
    for i in 0..4 {
        if used >= budget {
            return;
        }
        let mut p = start;
        p[i] += if p[i] + 0.1 <= 1.0 { 0.1 } else { -0.1 };
        let p = clamp(p);
        simplex.push((p, f(&p)));
        used += 1;
    }
    let comb = |a: &[f64; 4], b: &[f64; 4], t: f64| clamp(std::array::from_fn(|i| a[i] + t * (b[i] - a[i])));
    while used < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[4].1);
        if best == 0.0 {
            return;
        }
        let size = simplex[1..]
            .iter()
            .map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < 1e-12 || (worst - best).abs() <= 1e-15 * best.abs().max(1e-300) {
            return;
        }
        let centroid: [f64; 4] = std::array::from_fn(|i| simplex[..4].iter().map(|(p, _)| p[i]).sum::<f64>() / 4.0);
        let xw = simplex[4].0;
        let xr = comb(&centroid, &xw, -1.0);
        let fr = f(&xr);
        used += 1;
        if fr < simplex[0].1 {
            if used >= budget {
                simplex[4] = (xr, fr);
                break;
            }
            let xe = comb(&centroid, &xw, -2.0);
            let fe = f(&xe);
            used += 1;
            simplex[4] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (xr, fr);
        } else {
            if used >= budget {
                break;
            }
            let (xc, fc) = if fr < worst {
                let xc = comb(&centroid, &xr, 0.5);
                (xc, f(&xc))
            } else {
                let xc = comb(&centroid, &xw, 0.5);
                (xc, f(&xc))
            };
            used += 1;
            if fc < fr.min(worst) {
                simplex[4] = (xc, fc);
            } else {
                let x0 = simplex[0].0;
                for entry in simplex.iter_mut().skip(1) {
                    if used >= budget {
                        return;
                    }
                    let p = comb(&x0, &entry.0, 0.5);
                    *entry = (p, f(&p));
                    used += 1;
                }
            }
        }
    }
}

fn run_branch(nh: u32, targets: &DesignTargets, material: &Material, budget: usize) -> Branch {
    let mut branch = Branch { log: Vec::new() };
    let mut seeds = Vec::with_capacity(81);
    for a in GRID {
        for b in GRID {
            for c in GRID {
                for d in GRID {
                    let x = [a, b, c, d];
                    let v = branch.eval(&x, nh, targets, material);
                    seeds.push((x, v, branch.log.len() - 1));
                }
            }
        }
    }
    if budget <= 1 {
        return branch;
    }
    seeds.sort_by(|a, b| better(&branch.log[a.2], &branch.log[b.2]));
    let per_seed = budget / REFINED_SEEDS;
    for (x, v, _) in seeds.into_iter().take(REFINED_SEEDS) {
        nelder_mead(x, v, per_seed, |p| branch.eval(p, nh, targets, material));
    }
    branch
}

/// Multi-start bounded Nelder-Mead over `(H, D, w, t)` for each `N_h` in
/// the bounds. Grid seeds are always evaluated; `budget` caps the
/// refinement evaluations and is split evenly across branches and the best
/// seeds of each. `budget <= 1` returns the best seed.
pub fn optimize(
    targets: &DesignTargets,
    material: &Material,
    budget: usize,
) -> Result<DesignResult, DesignError> {
    targets.check()?;
    material.check()?;
    let mut helices = targets.bounds.helices.clone();
    helices.sort_unstable();
    helices.dedup();
    let per_branch = if budget <= 1 { budget } else { budget / helices.len() };
    let branches: Vec<Branch> = helices
        .par_iter()
        .map(|&nh| run_branch(nh, targets, material, per_branch))
        .collect();

    let mut trace: Vec<TraceEntry> = Vec::new();
    let mut best: Option<&Candidate> = None;
    let mut best_feasible: Option<&Candidate> = None;
    let mut n = 0usize;
    for c in branches.iter().flat_map(|b| &b.log) {
        n += 1;
        if best.is_none_or(|b| better(c, b) == Ordering::Less) {
            best = Some(c);
            trace.push(TraceEntry {
                evaluation: n,
                objective: c.eval.value,
                spec: c.spec,
            });
        }
        if c.eval.feasible && best_feasible.is_none_or(|b| better(c, b) == Ordering::Less) {
            best_feasible = Some(c);
        }
    }
    let chosen = best_feasible.or(best).expect("grid seeds are always evaluated");
    let achieved = stiffness_report_with_limits(&chosen.spec, material, &targets.limits());
    let result = match achieved {
        Ok(achieved) => DesignResult {
            best_spec: chosen.spec,
            achieved,
            workspace: targets.workspace.as_ref().map(|w| workspace_of(&chosen.spec, w)),
            objective_value: chosen.eval.value,
            feasible: chosen.eval.feasible,
            targets_met: chosen.eval.met,
            evaluations: n,
            trace,
        },
        Err(e) => {
            return Err(DesignError::InvalidTargets(format!(
                "no evaluable spec inside the bounds ({e})"
            )))
        }
    };
    if result.targets_met {
        Ok(result)
    } else {
        Err(DesignError::NoFeasibleDesign {
            nearest: Box::new(result),
        })
    }
}
