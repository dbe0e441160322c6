use nalgebra::Vector3;
use proptest::prelude::*;
use trimhelix::beam_oracle::{
    build_guided_cantilever, build_segment_lattice, build_strut, oracle_stiffness, solve_static,
    LatticeTopology, NodalLoad, OracleError, Section, StiffnessMode,
};
use trimhelix::{HelicoidSpec, Material};

#[test]
fn lattice_converges_under_refinement() {
    let spec = HelicoidSpec::small_module();
    let mat = Material::small_module_fit();
    for mode in [StiffnessMode::Axial, StiffnessMode::Bending] {
        let k = |n| oracle_stiffness(&build_segment_lattice(&spec, &mat, n, LatticeTopology::Independent).unwrap(), mode).unwrap();
        let (coarse, fine) = (k(16), k(32));
        assert!((coarse / fine - 1.0).abs() < 1e-2, "{mode:?}: {coarse} vs {fine}");
    }
}

#[test]
fn crossed_lattice_is_stiffer() {
    let spec = HelicoidSpec::small_module();
    let mat = Material::small_module_fit();
    let k = |t| oracle_stiffness(&build_segment_lattice(&spec, &mat, 8, t).unwrap(), StiffnessMode::Axial).unwrap();
    assert!(k(LatticeTopology::Crossed) > k(LatticeTopology::Independent));
}

#[test]
fn zero_elements_rejected() {
    let err = build_strut(&HelicoidSpec::small_module(), &Material::small_module_fit(), 0).unwrap_err();
    assert!(matches!(err, OracleError::InvalidDiscretization(_)));
}

#[test]
fn unsupported_model_is_singular() {
    let mut m = build_strut(&HelicoidSpec::small_module(), &Material::small_module_fit(), 4).unwrap();
    m.supports.clear();
    match solve_static(&m) {
        Err(OracleError::Singular { zero_modes }) => assert_eq!(zero_modes, Some(6)),
        other => panic!("expected singular, got {other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn guided_cantilever_matches_closed_form(
        len in 0.01..1.0f64, alpha in 0.0..1.2f64, w in 0.002..0.02f64, t in 0.001..0.01f64
    ) {
        let section = Section::rectangular(w, t);
        let mat = Material::small_module_fit();
        let m = build_guided_cantilever(len, alpha, section, &mat, 4).unwrap();
        let u = solve_static(&m).unwrap();
        // the tip only moves normal to the chord, so the vertical part is F cos^2(a) L^3 / 12EI
        let expect = len.powi(3) * alpha.cos().powi(2) / (12.0 * mat.youngs_modulus * section.i_weak);
        let got = -u.nodes[m.probe].translation.z;
        prop_assert!((got / expect - 1.0).abs() < 1e-6, "{got} vs {expect}");
    }

    #[test]
    fn response_is_linear_in_load(c in -50.0..50.0f64) {
        prop_assume!(c.abs() > 1e-3);
        let mut m = build_strut(&HelicoidSpec::small_module(), &Material::small_module_fit(), 8).unwrap();
        let base = solve_static(&m).unwrap().nodes[m.probe].translation;
        for l in &mut m.loads {
            *l = NodalLoad { node: l.node, force: l.force * c, moment: l.moment * c };
        }
        let scaled = solve_static(&m).unwrap().nodes[m.probe].translation;
        prop_assert!((scaled - base * c).norm() <= 1e-9 * (base * c).norm());
    }

    #[test]
    fn superposition(node_a in 1usize..8, node_b in 1usize..8, fa in -1.0..1.0f64, fb in -1.0..1.0f64) {
        let m = build_strut(&HelicoidSpec::small_module(), &Material::small_module_fit(), 8).unwrap();
        let sys = m.assemble().unwrap();
        let f = sys.factor().unwrap();
        let la = NodalLoad::force(node_a, Vector3::new(fa, 0.0, 0.3));
        let lb = NodalLoad::force(node_b, Vector3::new(0.0, fb, -0.2));
        let ua = f.solve(&[la]).unwrap();
        let ub = f.solve(&[lb]).unwrap();
        let uab = f.solve(&[la, lb]).unwrap();
        for i in 0..m.nodes.len() {
            let d = uab.nodes[i].translation - ua.nodes[i].translation - ub.nodes[i].translation;
            prop_assert!(d.norm() <= 1e-9 * uab.nodes[i].translation.norm().max(1e-12));
        }
    }
}
