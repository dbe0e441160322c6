use std::f64::consts::PI;

use nalgebra::Vector3;
use proptest::prelude::*;
use trimhelix::kinematics::{
    bend_limit, cable_lengths, estimate_config_from_cables, forward_kinematics, max_compression,
    payload_deflection, segment_transform, workspace_sample, KinematicsError, ModuleSpec, PccConfig,
    PlateSpec, RobotSpec, SegmentState,
};
use trimhelix::{axial_stiffness, bending_stiffness, HelicoidSpec, Material};

fn state(robot: &RobotSpec) -> impl Strategy<Value = PccConfig> {
    let n = robot.segment_count();
    let (seg, plate) = robot.segments().next().map(|(s, p)| (*s, *p)).unwrap();
    let dl_max = max_compression(&seg, &plate).unwrap();
    proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64, -PI..PI), n / 2).prop_map(move |v| {
        let states: Vec<SegmentState> = v
            .into_iter()
            .map(|(a, b, phi)| {
                let dl = -a * dl_max;
                let t = bend_limit(&seg, &plate, dl).unwrap();
                SegmentState::new(dl, b * t, phi)
            })
            .collect();
        PccConfig::per_module(&states, 0.0)
    })
}

#[test]
fn straight_segment_is_pure_translation() {
    let t = segment_transform(&SegmentState::new(-0.01, 0.0, 0.7), 0.06).unwrap();
    assert!((t.translation.vector - Vector3::new(0.0, 0.0, 0.05)).norm() < 1e-15);
    assert!(t.rotation.angle() < 1e-15);
}

#[test]
fn quarter_arc_hand_value() {
    // arc of length s bent by pi/2 in the x-z plane ends at (r, 0, r)
    let s = 0.1;
    let t = segment_transform(&SegmentState::new(0.0, PI / 2.0, 0.0), s).unwrap();
    let r = s / (PI / 2.0);
    assert!((t.translation.vector - Vector3::new(r, 0.0, r)).norm() < 1e-14);
}

#[test]
fn workspace_points_within_reach() {
    let robot = RobotSpec::reference_arm();
    let pts = workspace_sample(&robot, 500).unwrap();
    assert_eq!(pts.len(), 500);
    let reach = robot.straight_length();
    assert!(pts.iter().all(|p| p.coords.norm() <= reach + 1e-12));
    assert_eq!(pts, workspace_sample(&robot, 500).unwrap());
}

#[test]
fn oversized_plate_stack_rejected() {
    let seg = HelicoidSpec::small_module();
    let plate = PlateSpec::new(0.03, 0.06, 2);
    assert!(matches!(max_compression(&seg, &plate), Err(KinematicsError::InfeasiblePlate { .. })));
}

#[test]
fn two_segment_payload_hand_oracle() {
    // one module with negligible plates: an axial tip load on a straight arm only compresses
    let seg = HelicoidSpec::small_module();
    let robot = RobotSpec {
        modules: vec![ModuleSpec {
            segments: [seg, seg],
            plate: PlateSpec::new(1e-7, 0.06, 0),
            tendon_radius: 0.025,
            tendon_phases: [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0],
        }],
        base_rotation: false,
    };
    let mat = Material::small_module_fit();
    let cfg = PccConfig::straight(&robot);
    let k_ax = axial_stiffness(&seg, mat.youngs_modulus).unwrap();
    let r = payload_deflection(&robot, &cfg, Vector3::new(0.0, 0.0, -1.0), &mat).unwrap();
    assert!((r.tip_displacement.z + 2.0 / k_ax).abs() < 1e-6 * 2.0 / k_ax);
    assert!(r.tip_displacement.xy().norm() < 1e-9);

    // lateral tip load: the base arc takes moment 2hF and carries the upper
    // arc, so the tip moves (h/2 + h) 2hF/k_b + (h/2) hF/k_b = 3.5 h^2 F/k_b
    let k_b = bending_stiffness(&seg, mat.youngs_modulus).unwrap();
    let (h, f) = (seg.height, 1e-3);
    let r = payload_deflection(&robot, &cfg, Vector3::new(f, 0.0, 0.0), &mat).unwrap();
    let expect = 3.5 * h * h * f / k_b;
    assert!((r.tip_displacement.x / expect - 1.0).abs() < 1e-4, "{} vs {expect}", r.tip_displacement.x);
    assert!(r.tip_displacement.y.abs() < 1e-9 * expect);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cable_round_trip(cfg in state(&RobotSpec::reference_arm())) {
        let robot = RobotSpec::reference_arm();
        let l = cable_lengths(&cfg, &robot).unwrap();
        let est = estimate_config_from_cables(&l, &robot).unwrap();
        let back = cable_lengths(&est.config, &robot).unwrap();
        for (a, b) in l.iter().flatten().zip(back.iter().flatten()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fk_is_lipschitz_in_bend(cfg in state(&RobotSpec::reference_arm()), d in -1e-4..1e-4f64, k in 0usize..6) {
        let robot = RobotSpec::reference_arm();
        let mut moved = cfg.clone();
        let s = moved.segments[k];
        let w = s.bend_vector();
        moved.segments[k] = SegmentState::from_bend_vector(s.delta_l, [w[0] + d, w[1]]);
        prop_assume!(moved.segments[k].theta <= bend_limit(&robot.modules[k / 2].segments[0], &robot.modules[k / 2].plate, s.delta_l).unwrap());
        let a = forward_kinematics(&robot, &cfg).unwrap().tip.translation.vector;
        let b = forward_kinematics(&robot, &moved).unwrap().tip.translation.vector;
        // a bend change rotates at most the full straight length about the segment
        prop_assert!((a - b).norm() <= robot.straight_length() * d.abs() * 1.0001 + 1e-15);
    }

    #[test]
    fn base_rotation_spins_tip(cfg in state(&RobotSpec::reference_arm()), beta in -PI..PI) {
        let robot = RobotSpec::reference_arm();
        let a = forward_kinematics(&robot, &cfg).unwrap().tip.translation.vector;
        let mut spun = cfg.clone();
        spun.base_angle = beta;
        let b = forward_kinematics(&robot, &spun).unwrap().tip.translation.vector;
        prop_assert!((a.z - b.z).abs() < 1e-12);
        prop_assert!((a.xy().norm() - b.xy().norm()).abs() < 1e-12);
    }
}
