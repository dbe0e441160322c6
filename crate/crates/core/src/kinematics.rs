//! Plate-limited workspace, piecewise-constant-curvature (PCC) kinematics of
//! the serial robot, and tendon length maps.

use std::f64::consts::PI;

use nalgebra::{Isometry3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, HelicoidSpec};
use crate::material::Material;
use crate::stiffness::{axial_stiffness, bending_stiffness, StiffnessError};

/// Slack allowed when checking configurations against their limits.
const LIMIT_EPS: f64 = 1e-12;
/// Below this bend angle the arc uses its series expansion.
const SERIES_THETA: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("plate stack 2*h_p*(N_p+1) = {stack} exceeds segment height {height}")]
    InfeasiblePlate { stack: f64, height: f64 },
    #[error("invalid plate: {0}")]
    InvalidPlate(String),
    #[error("invalid module: {0}")]
    InvalidModule(String),
    #[error("robot needs at least one module")]
    NoModules,
    #[error("non-positive arc length {0}")]
    NonPositiveArc(f64),
    #[error("configuration has {got} segment states, robot has {expected} segments")]
    SegmentCount { expected: usize, got: usize },
    #[error("expected {expected} tendon length triples, got {got}")]
    TendonCount { expected: usize, got: usize },
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Stiffness(#[from] StiffnessError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateSpec {
    #[serde(rename = "h_p")]
    pub height: f64,
    #[serde(rename = "D_p")]
    pub diameter: f64,
    #[serde(rename = "N_p", default)]
    pub intermediate: u32,
}

impl PlateSpec {
    pub fn new(height: f64, diameter: f64, intermediate: u32) -> Self {
        Self {
            height,
            diameter,
            intermediate,
        }
    }

    /// Total rigid height per segment, `2 h_p (N_p + 1)`.
    pub fn stack_height(&self) -> f64 {
        2.0 * self.height * (self.intermediate as f64 + 1.0)
    }

    pub fn check(&self) -> Result<(), KinematicsError> {
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(KinematicsError::InvalidPlate(format!("h_p = {} must be > 0", self.height)));
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(KinematicsError::InvalidPlate(format!("D_p = {} must be > 0", self.diameter)));
        }
        Ok(())
    }
}

pub const DEFAULT_TENDON_PHASES: [f64; 3] = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub segments: [HelicoidSpec; 2],
    pub plate: PlateSpec,
    pub tendon_radius: f64,
    #[serde(default = "default_phases")]
    pub tendon_phases: [f64; 3],
}

fn default_phases() -> [f64; 3] {
    DEFAULT_TENDON_PHASES
}

impl ModuleSpec {
    pub fn check(&self) -> Result<(), KinematicsError> {
        self.plate.check()?;
        for seg in &self.segments {
            seg.check()?;
            max_compression(seg, &self.plate)?;
        }
        if !(self.tendon_radius > 0.0 && self.tendon_radius <= self.plate.diameter / 2.0) {
            return Err(KinematicsError::InvalidModule(format!(
                "tendon radius {} must lie in (0, D_p/2 = {}]",
                self.tendon_radius,
                self.plate.diameter / 2.0
            )));
        }
        let p = self.tendon_phases;
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = (p[i] - p[j]).rem_euclid(2.0 * PI);
            if d < 1e-9 || 2.0 * PI - d < 1e-9 {
                return Err(KinematicsError::InvalidModule("tendon phases must be distinct".into()));
            }
        }
        Ok(())
    }

    /// Total arc length of the module when straight and unloaded.
    pub fn free_length(&self) -> f64 {
        self.segments.iter().map(|s| s.height).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotSpec {
    pub modules: Vec<ModuleSpec>,
    #[serde(default)]
    pub base_rotation: bool,
}

impl RobotSpec {
    pub fn check(&self) -> Result<(), KinematicsError> {
        if self.modules.is_empty() {
            return Err(KinematicsError::NoModules);
        }
        self.modules.iter().try_for_each(ModuleSpec::check)
    }

    pub fn segment_count(&self) -> usize {
        2 * self.modules.len()
    }

    /// Segment specs with their module's plate, in base-to-tip order.
    pub fn segments(&self) -> impl Iterator<Item = (&HelicoidSpec, &PlateSpec)> {
        self.modules
            .iter()
            .flat_map(|m| m.segments.iter().map(move |s| (s, &m.plate)))
    }

    /// Straight-pose length from base to tip, arcs plus plate stacks.
    pub fn straight_length(&self) -> f64 {
        self.segments().map(|(s, p)| s.height + p.stack_height()).sum()
    }

    /// Three modules of two 0.06 m segments with the flexible helicoid
    /// cross-section, 7.5 mm plates and a rotating base. Plate and tendon
    /// dimensions are assumptions chosen to give a 0.45 m straight length.
    pub fn reference_arm() -> Self {
        let seg = HelicoidSpec::new(0.06, 0.06, 0.008, 0.004, 3);
        let module = ModuleSpec {
            segments: [seg, seg],
            plate: PlateSpec::new(0.0075, 0.06, 0),
            tendon_radius: 0.025,
            tendon_phases: DEFAULT_TENDON_PHASES,
        };
        Self {
            modules: vec![module; 3],
            base_rotation: true,
        }
    }
}

/// PCC state of one segment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SegmentState {
    pub delta_l: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SegmentState {
    pub fn new(delta_l: f64, theta: f64, phi: f64) -> Self {
        Self { delta_l, theta, phi }
    }

    /// Bend vector `theta * (-sin phi, cos phi)`: the rotation axis of the
    /// arc scaled by its angle.
    pub fn bend_vector(&self) -> [f64; 2] {
        [-self.theta * self.phi.sin(), self.theta * self.phi.cos()]
    }

    pub fn from_bend_vector(delta_l: f64, w: [f64; 2]) -> Self {
        let theta = w[0].hypot(w[1]);
        let phi = if theta > 0.0 { (-w[0]).atan2(w[1]) } else { 0.0 };
        Self { delta_l, theta, phi }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PccConfig {
    /// Two states per module, base to tip.
    pub segments: Vec<SegmentState>,
    #[serde(default)]
    pub base_angle: f64,
}

impl PccConfig {
    pub fn straight(robot: &RobotSpec) -> Self {
        Self {
            segments: vec![SegmentState::default(); robot.segment_count()],
            base_angle: 0.0,
        }
    }

    /// Both segments of every module share the module's state.
    pub fn per_module(states: &[SegmentState], base_angle: f64) -> Self {
        Self {
            segments: states.iter().flat_map(|s| [*s, *s]).collect(),
            base_angle,
        }
    }
}

/// `H - 2 h_p (N_p + 1)`. Zero means the plates already touch.
pub fn max_compression(segment: &HelicoidSpec, plate: &PlateSpec) -> Result<f64, KinematicsError> {
    plate.check()?;
    let stack = plate.stack_height();
    let d = segment.height - stack;
    if d < 0.0 {
        return Err(KinematicsError::InfeasiblePlate {
            stack,
            height: segment.height,
        });
    }
    Ok(d)
}

/// `2 delta_l / D_p`, with `delta_l` the compression margin left on the
/// bending side.
pub fn max_bending(plate: &PlateSpec, delta_l: f64) -> f64 {
    2.0 * delta_l.max(0.0) / plate.diameter
}

/// Bend limit for a segment already compressed by `delta_l` (negative),
/// using the linear budget `delta_l_max - |delta_l|`.
pub fn bend_limit(segment: &HelicoidSpec, plate: &PlateSpec, delta_l: f64) -> Result<f64, KinematicsError> {
    let dl_max = max_compression(segment, plate)?;
    Ok(max_bending(plate, dl_max - delta_l.abs()))
}

/// `(1 - cos t) / t` and `sin t / t`, series-expanded near zero.
fn arc_factors(theta: f64) -> (f64, f64) {
    if theta.abs() < SERIES_THETA {
        let t2 = theta * theta;
        (theta / 2.0 * (1.0 - t2 / 12.0), 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0))
    } else {
        (2.0 * (theta / 2.0).sin().powi(2) / theta, theta.sin() / theta)
    }
}

/// Constant-curvature transform of one segment with free height `height`:
/// rotate by `phi` about the base axis, bend through `theta` along an arc
/// of length `height + delta_l`, rotate back.
pub fn segment_transform(state: &SegmentState, height: f64) -> Result<Isometry3<f64>, KinematicsError> {
    let s = height + state.delta_l;
    if !(s > 0.0) {
        return Err(KinematicsError::NonPositiveArc(s));
    }
    let (c, si) = arc_factors(state.theta);
    let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), state.phi);
    let bend = Rotation3::from_axis_angle(&Vector3::y_axis(), state.theta);
    let p = rz * Vector3::new(s * c, 0.0, s * si);
    let r = rz * bend * rz.inverse();
    Ok(Isometry3::from_parts(
        Translation3::from(p),
        UnitQuaternion::from_rotation_matrix(&r),
    ))
}

fn check_config(robot: &RobotSpec, config: &PccConfig) -> Result<(), KinematicsError> {
    let expected = robot.segment_count();
    if config.segments.len() != expected {
        return Err(KinematicsError::SegmentCount {
            expected,
            got: config.segments.len(),
        });
    }
    for (i, ((seg, plate), st)) in robot.segments().zip(&config.segments).enumerate() {
        let dl_max = max_compression(seg, plate)?;
        if st.delta_l > LIMIT_EPS || st.delta_l < -dl_max - LIMIT_EPS {
            return Err(KinematicsError::InfeasibleConfig(format!(
                "segment {i}: delta_L = {} outside [-{dl_max}, 0]",
                st.delta_l
            )));
        }
        let t_max = bend_limit(seg, plate, st.delta_l)?;
        if st.theta.abs() > t_max + LIMIT_EPS {
            return Err(KinematicsError::InfeasibleConfig(format!(
                "segment {i}: |theta| = {} exceeds {t_max}",
                st.theta.abs()
            )));
        }
    }
    Ok(())
}

/// Validates `config` against the robot's compression and bend limits.
pub fn validate_config(robot: &RobotSpec, config: &PccConfig) -> Result<(), KinematicsError> {
    robot.check()?;
    check_config(robot, config)
}

/// Per module, per tendon: `sum over its segments of s - theta r_d cos(phi - phi_i)`.
/// Tendons see only their own module's arcs.
pub fn cable_lengths(config: &PccConfig, robot: &RobotSpec) -> Result<Vec<[f64; 3]>, KinematicsError> {
    validate_config(robot, config)?;
    let mut out = Vec::with_capacity(robot.modules.len());
    for (m, module) in robot.modules.iter().enumerate() {
        let mut l = [0.0; 3];
        for (k, seg) in module.segments.iter().enumerate() {
            let st = &config.segments[2 * m + k];
            let s = seg.height + st.delta_l;
            for (li, ph) in l.iter_mut().zip(module.tendon_phases) {
                *li += s - st.theta * module.tendon_radius * (st.phi - ph).cos();
            }
        }
        if let Some(bad) = l.iter().find(|v| **v < 0.0) {
            return Err(KinematicsError::InfeasibleConfig(format!(
                "module {m}: negative tendon length {bad}"
            )));
        }
        out.push(l);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CableEstimate {
    pub config: PccConfig,
    /// Per-module least-squares residual of the tendon fit, m.
    pub residuals: Vec<f64>,
    /// Set when a residual exceeds tolerance or the state leaves its limits.
    pub warning: Option<String>,
}

/// Closed-form inversion of [`cable_lengths`]. Each module's arc `(s, theta,
/// phi)` is recovered by least squares and split evenly over its two
/// segments. The base angle is not observable from tendons and is zero.
pub fn estimate_config_from_cables(
    lengths: &[[f64; 3]],
    robot: &RobotSpec,
) -> Result<CableEstimate, KinematicsError> {
    robot.check()?;
    if lengths.len() != robot.modules.len() {
        return Err(KinematicsError::TendonCount {
            expected: robot.modules.len(),
            got: lengths.len(),
        });
    }
    let mut segments = Vec::with_capacity(robot.segment_count());
    let mut residuals = Vec::new();
    let mut warnings = Vec::new();
    for (m, (module, l)) in robot.modules.iter().zip(lengths).enumerate() {
        if let Some(bad) = l.iter().find(|v| !(**v > 0.0)) {
            return Err(KinematicsError::InfeasibleConfig(format!(
                "module {m}: tendon length {bad} must be positive"
            )));
        }
        let r = module.tendon_radius;
        let a = nalgebra::Matrix3::from_fn(|i, j| {
            let ph = module.tendon_phases[i];
            [1.0, -r * ph.cos(), -r * ph.sin()][j]
        });
        let b = Vector3::from(*l);
        let x = a
            .svd(true, true)
            .solve(&b, 1e-14)
            .map_err(|e| KinematicsError::InvalidModule(e.to_string()))?;
        let res = (a * x - b).norm();
        residuals.push(res);
        if res > 1e-9 {
            warnings.push(format!("module {m}: tendon residual {res:e}"));
        }
        let (s, c, sn) = (x[0], x[1], x[2]);
        let theta = c.hypot(sn);
        let phi = if theta > 0.0 { sn.atan2(c) } else { 0.0 };
        let delta_l = (s - module.free_length()) / 2.0;
        segments.extend([SegmentState::new(delta_l, theta / 2.0, phi); 2]);
    }
    let config = PccConfig {
        segments,
        base_angle: 0.0,
    };
    if let Err(e) = check_config(robot, &config) {
        warnings.push(e.to_string());
    }
    Ok(CableEstimate {
        config,
        residuals,
        warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FkResult {
    /// Base frame followed by the frame at the end of every segment
    /// (after its distal plate offset).
    pub frames: Vec<Isometry3<f64>>,
    pub tip: Isometry3<f64>,
}

/// Base rotation, then for each segment half its plate stack, the PCC arc
/// and the other half.
pub fn forward_kinematics(robot: &RobotSpec, config: &PccConfig) -> Result<FkResult, KinematicsError> {
    validate_config(robot, config)?;
    fk_unchecked(robot, config)
}

fn fk_unchecked(robot: &RobotSpec, config: &PccConfig) -> Result<FkResult, KinematicsError> {
    let base = if robot.base_rotation {
        Isometry3::rotation(Vector3::z() * config.base_angle)
    } else {
        Isometry3::identity()
    };
    let mut frames = vec![base];
    let mut t = base;
    for ((seg, plate), st) in robot.segments().zip(&config.segments) {
        let half = Isometry3::translation(0.0, 0.0, plate.stack_height() / 2.0);
        t = t * half * segment_transform(st, seg.height)? * half;
        frames.push(t);
    }
    Ok(FkResult { frames, tip: t })
}

/// Radical-inverse (van der Corput) of `i` in base `b`.
fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= b as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n);
    let mut c = 2u64;
    while out.len() < n {
        if out.iter().take_while(|p| *p * *p <= c).all(|p| c % p != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

/// Halton-sampled configurations mapped through forward kinematics. Sample
/// `k` uses Halton index `k`, so sample 0 is the straight pose. Per segment:
/// `delta_L = -u0 * dL_max`, `theta = u1 * theta_max(delta_L)`,
/// `phi = 2 pi u2`; the base angle (if any) is `2 pi u`.
pub fn workspace_sample(robot: &RobotSpec, n_samples: usize) -> Result<Vec<Point3<f64>>, KinematicsError> {
    robot.check()?;
    let nseg = robot.segment_count();
    let dims = 3 * nseg + usize::from(robot.base_rotation);
    let primes = first_primes(dims);
    let limits: Vec<(f64, &HelicoidSpec, &PlateSpec)> = robot
        .segments()
        .map(|(s, p)| max_compression(s, p).map(|d| (d, s, p)))
        .collect::<Result<_, _>>()?;
    (0..n_samples)
        .into_par_iter()
        .map(|k| {
            let u = |d: usize| radical_inverse(k as u64, primes[d]);
            let segments = limits
                .iter()
                .enumerate()
                .map(|(j, (dl_max, _, plate))| {
                    let delta_l = -u(3 * j) * dl_max;
                    let theta = u(3 * j + 1) * max_bending(plate, dl_max + delta_l);
                    SegmentState::new(delta_l, theta, 2.0 * PI * u(3 * j + 2))
                })
                .collect();
            let base_angle = if robot.base_rotation { 2.0 * PI * u(3 * nseg) } else { 0.0 };
            let cfg = PccConfig { segments, base_angle };
            fk_unchecked(robot, &cfg).map(|r| Point3::from(r.tip.translation.vector))
        })
        .collect()
}

pub fn workspace_csv(points: &[Point3<f64>]) -> String {
    let mut s = String::from("x,y,z\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.x, p.y, p.z));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayloadResponse {
    pub config: PccConfig,
    pub tip_displacement: Vector3<f64>,
    pub tip: Point3<f64>,
    /// Per segment `(k_ax, k_bend)` used for the compliance.
    pub stiffness: Vec<(f64, f64)>,
}

/// Coordinates `(delta_L, w_x, w_y)` per segment, with `w` the bend vector.
fn to_coords(config: &PccConfig) -> Vec<f64> {
    config
        .segments
        .iter()
        .flat_map(|s| {
            let w = s.bend_vector();
            [s.delta_l, w[0], w[1]]
        })
        .collect()
}

fn from_coords(q: &[f64], base_angle: f64) -> PccConfig {
    PccConfig {
        segments: q
            .chunks(3)
            .map(|c| SegmentState::from_bend_vector(c[0], [c[1], c[2]]))
            .collect(),
        base_angle,
    }
}

/// First-order tip compliance under a global tip force. Each segment takes
/// the moment of the force about its arc base (in the arc's base frame):
/// the transverse part rotates the bend vector by `M / k_bend` and the
/// axial part changes `delta_L` by `F_axial / k_ax`. The tip displacement
/// is mapped through the forward-kinematics Jacobian, so it is linear in
/// the force.
pub fn payload_deflection(
    robot: &RobotSpec,
    config: &PccConfig,
    tip_force: Vector3<f64>,
    material: &Material,
) -> Result<PayloadResponse, KinematicsError> {
    let fk = forward_kinematics(robot, config)?;
    let tip = fk.tip.translation.vector;
    let stiffness: Vec<(f64, f64)> = robot
        .segments()
        .map(|(s, _)| Ok((axial_stiffness(s, material.youngs_modulus)?, bending_stiffness(s, material.youngs_modulus)?)))
        .collect::<Result<_, KinematicsError>>()?;

    let mut dq = Vec::with_capacity(3 * config.segments.len());
    for (j, (plate, (k_ax, k_bend))) in robot.segments().map(|(_, p)| p).zip(&stiffness).enumerate() {
        let arc_base = fk.frames[j] * Isometry3::translation(0.0, 0.0, plate.stack_height() / 2.0);
        let arm = tip - arc_base.translation.vector;
        let inv = arc_base.rotation.inverse();
        let m_local = inv * arm.cross(&tip_force);
        let f_local = inv * tip_force;
        dq.extend([f_local.z / k_ax, m_local.x / k_bend, m_local.y / k_bend]);
    }

    let q = to_coords(config);
    let tip_of = |q: &[f64]| -> Result<Vector3<f64>, KinematicsError> {
        Ok(fk_unchecked(robot, &from_coords(q, config.base_angle))?.tip.translation.vector)
    };
    let mut disp = Vector3::zeros();
    const H_FD: f64 = 1e-6;
    for (i, d) in dq.iter().enumerate() {
        if *d == 0.0 {
            continue;
        }
        let (mut qp, mut qm) = (q.clone(), q.clone());
        qp[i] += H_FD;
        qm[i] -= H_FD;
        disp += (tip_of(&qp)? - tip_of(&qm)?) / (2.0 * H_FD) * *d;
    }
    let q_new: Vec<f64> = q.iter().zip(&dq).map(|(a, b)| a + b).collect();
    Ok(PayloadResponse {
        config: from_coords(&q_new, config.base_angle),
        tip_displacement: disp,
        tip: Point3::from(tip + disp),
        stiffness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plate(h: f64, d: f64, n: u32) -> PlateSpec {
        PlateSpec::new(h, d, n)
    }

    fn seg(h: f64) -> HelicoidSpec {
        HelicoidSpec::new(h, 0.06, 0.008, 0.004, 3)
    }

    #[test]
    fn compression_limits() {
        let d = max_compression(&seg(0.12), &plate(0.01, 0.06, 0)).unwrap();
        assert!((d - 0.10).abs() < 1e-15);
        assert_eq!(max_compression(&seg(0.12), &plate(0.06, 0.06, 0)).unwrap(), 0.0);
        let d1 = max_compression(&seg(0.12), &plate(0.01, 0.06, 1)).unwrap();
        assert!((d - d1 - 0.02).abs() < 1e-15);
        assert!(matches!(
            max_compression(&seg(0.12), &plate(0.07, 0.06, 0)),
            Err(KinematicsError::InfeasiblePlate { .. })
        ));
        assert!(max_compression(&seg(0.12), &plate(0.0, 0.06, 0)).is_err());
    }

    #[test]
    fn bending_limits() {
        let p = plate(0.01, 0.06, 0);
        assert!((max_bending(&p, 0.10) - 3.3333333).abs() < 1e-6);
        assert_eq!(max_bending(&p, 0.0), 0.0);
        let wide = plate(0.01, 0.12, 0);
        assert!((max_bending(&wide, 0.07) * 2.0 - max_bending(&p, 0.07)).abs() < 1e-15);
    }

    #[test]
    fn straight_and_half_circle_transforms() {
        let t = segment_transform(&SegmentState::default(), 0.1).unwrap();
        assert!((t.translation.vector - Vector3::new(0.0, 0.0, 0.1)).norm() < 1e-15);
        assert!(t.rotation.angle() < 1e-15);

        let h = 0.1;
        let t = segment_transform(&SegmentState::new(0.0, PI, 0.0), h).unwrap();
        assert!((t.translation.vector - Vector3::new(2.0 * h / PI, 0.0, 0.0)).norm() < 1e-15);
        assert!((t.rotation * Vector3::z() + Vector3::z()).norm() < 1e-12);
    }

    #[test]
    fn transform_is_continuous_at_zero_bend() {
        let zero = segment_transform(&SegmentState::new(0.0, 0.0, 0.7), 0.1)
            .unwrap()
            .to_homogeneous();
        let tiny = segment_transform(&SegmentState::new(0.0, 1e-12, 0.7), 0.1)
            .unwrap()
            .to_homogeneous();
        assert!((zero - tiny).abs().max() < 1e-9);
        // either side of the series switch
        let a = segment_transform(&SegmentState::new(0.0, SERIES_THETA * (1.0 - 1e-9), 0.3), 0.1)
            .unwrap()
            .to_homogeneous();
        let b = segment_transform(&SegmentState::new(0.0, SERIES_THETA * (1.0 + 1e-9), 0.3), 0.1)
            .unwrap()
            .to_homogeneous();
        assert!((a - b).abs().max() < 1e-12);
        let (c, s) = arc_factors(1e-6);
        assert!((c - (1.0 - 1e-6f64.cos()) / 1e-6).abs() < 1e-9);
        assert!((s - 1e-6f64.sin() / 1e-6).abs() < 1e-9);
    }

    #[test]
    fn non_positive_arc_rejected() {
        assert!(matches!(
            segment_transform(&SegmentState::new(-0.1, 0.0, 0.0), 0.1),
            Err(KinematicsError::NonPositiveArc(_))
        ));
    }

    #[test]
    fn reference_arm_height() {
        let r = RobotSpec::reference_arm();
        r.check().unwrap();
        let fk = forward_kinematics(&r, &PccConfig::straight(&r)).unwrap();
        assert!((fk.tip.translation.z - 0.45).abs() < 1e-12);
        assert_eq!(fk.frames.len(), 7);
        assert!((r.straight_length() - 0.45).abs() < 1e-12);
    }

    #[test]
    fn cables_for_straight_and_symmetric_bend() {
        let r = RobotSpec::reference_arm();
        let mut cfg = PccConfig::straight(&r);
        cfg.segments[0].delta_l = -0.01;
        cfg.segments[1].delta_l = -0.01;
        let l = cable_lengths(&cfg, &r).unwrap();
        for v in l[0] {
            assert!((v - 0.10).abs() < 1e-15);
        }
        let cfg = PccConfig::per_module(&[SegmentState::new(0.0, 0.5, 0.0); 3], 0.0);
        let l = cable_lengths(&cfg, &r).unwrap();
        assert!(l[0][0] < l[0][1]);
        assert!((l[0][1] - l[0][2]).abs() < 1e-15);
        assert!((l[0].iter().sum::<f64>() - 3.0 * 0.12).abs() < 1e-14);
    }

    #[test]
    fn estimate_hand_cases() {
        let r = RobotSpec::reference_arm();
        let est = estimate_config_from_cables(&[[0.11; 3]; 3], &r).unwrap();
        for s in &est.config.segments {
            assert!(s.theta.abs() < 1e-15);
            assert!((s.delta_l + 0.005).abs() < 1e-15);
        }
        assert!(est.warning.is_none());
        // {s - a, s + a/2, s + a/2}, a = theta r_d
        let (s, theta) = (0.11, 0.4);
        let a = theta * 0.025;
        let l = [s - a, s + a / 2.0, s + a / 2.0];
        let est = estimate_config_from_cables(&[l; 3], &r).unwrap();
        let st = est.config.segments[0];
        assert!((2.0 * st.theta - theta).abs() < 1e-12);
        assert!(st.phi.abs() < 1e-12);
    }

    #[test]
    fn estimate_rejects_bad_input() {
        let r = RobotSpec::reference_arm();
        assert!(estimate_config_from_cables(&[[0.1; 3]; 2], &r).is_err());
        assert!(estimate_config_from_cables(&[[0.1, 0.0, 0.1]; 3], &r).is_err());
        // too short for the plate limits: flagged, not rejected
        let est = estimate_config_from_cables(&[[0.01; 3]; 3], &r).unwrap();
        assert!(est.warning.is_some());
    }

    #[test]
    fn base_rotation_rotates_tip() {
        let r = RobotSpec::reference_arm();
        let mut cfg = PccConfig::per_module(&[SegmentState::new(-0.01, 0.3, 0.4); 3], 0.0);
        let p0 = forward_kinematics(&r, &cfg).unwrap().tip.translation.vector;
        cfg.base_angle = 0.9;
        let p1 = forward_kinematics(&r, &cfg).unwrap().tip.translation.vector;
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), 0.9) * p0;
        assert!((rot - p1).norm() < 1e-15);
    }

    #[test]
    fn invalid_configs_rejected() {
        let r = RobotSpec::reference_arm();
        let mut cfg = PccConfig::straight(&r);
        cfg.segments[2].delta_l = 0.001;
        assert!(forward_kinematics(&r, &cfg).is_err());
        let mut cfg = PccConfig::straight(&r);
        cfg.segments[2].theta = 5.0;
        assert!(forward_kinematics(&r, &cfg).is_err());
        let cfg = PccConfig {
            segments: vec![SegmentState::default(); 2],
            base_angle: 0.0,
        };
        assert!(matches!(
            forward_kinematics(&r, &cfg),
            Err(KinematicsError::SegmentCount { expected: 6, got: 2 })
        ));
    }

    #[test]
    fn module_checks() {
        let mut r = RobotSpec::reference_arm();
        r.modules[0].tendon_radius = 0.05;
        assert!(r.check().is_err());
        let mut r = RobotSpec::reference_arm();
        r.modules[1].tendon_phases = [0.0, 0.0, 1.0];
        assert!(r.check().is_err());
        let r = RobotSpec {
            modules: vec![],
            base_rotation: false,
        };
        assert_eq!(r.check(), Err(KinematicsError::NoModules));
    }

    #[test]
    fn workspace_first_sample_is_straight() {
        let r = RobotSpec::reference_arm();
        let pts = workspace_sample(&r, 1).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0] - Point3::new(0.0, 0.0, 0.45)).norm() < 1e-12);
        assert!(workspace_csv(&pts).starts_with("x,y,z\n0,0,0.45"));
    }

    #[test]
    fn halton_bases() {
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn payload_zero_and_linear() {
        let r = RobotSpec::reference_arm();
        let mat = Material::small_module_fit();
        let cfg = PccConfig::per_module(&[SegmentState::new(-0.005, 0.4, 1.0); 3], 0.3);
        let z = payload_deflection(&r, &cfg, Vector3::zeros(), &mat).unwrap();
        assert_eq!(z.tip_displacement, Vector3::zeros());
        let f = Vector3::new(0.01, -0.02, -0.03);
        let a = payload_deflection(&r, &cfg, f, &mat).unwrap();
        let b = payload_deflection(&r, &cfg, f * 2.0, &mat).unwrap();
        assert!((b.tip_displacement - a.tip_displacement * 2.0).norm() < 1e-12 * a.tip_displacement.norm());
    }
}
