use proptest::prelude::*;
use trimhelix::{axial_stiffness, bending_stiffness, HelicoidSpec};

fn spec() -> impl Strategy<Value = HelicoidSpec> {
    (0.03..0.3f64, 0.02..0.15f64, 0.002..0.02f64, 0.001..0.01f64, 1..8u32)
        .prop_map(|(h, d, w, t, n)| HelicoidSpec::new(h, d, w, t, n))
        .prop_filter("valid", |s| s.check().is_ok())
}

proptest! {
    #[test]
    fn stiffness_linear_in_modulus(s in spec(), e in 1e5..1e7f64, c in 0.1..10.0f64) {
        let a = axial_stiffness(&s, e).unwrap();
        let b = axial_stiffness(&s, c * e).unwrap();
        prop_assert!((b / (c * a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thicker_is_stiffer(s in spec(), e in 1e5..1e7f64) {
        let thicker = HelicoidSpec::new(s.height, s.diameter, s.width, s.thickness * 1.05, s.helices);
        prop_assume!(thicker.check().is_ok());
        prop_assert!(axial_stiffness(&thicker, e).unwrap() > axial_stiffness(&s, e).unwrap());
        prop_assert!(bending_stiffness(&thicker, e).unwrap() > bending_stiffness(&s, e).unwrap());
    }

    #[test]
    fn more_helices_is_stiffer_axially(s in spec(), e in 1e5..1e7f64) {
        let more = HelicoidSpec::new(s.height, s.diameter, s.width, s.thickness, s.helices + 1);
        prop_assume!(more.check().is_ok());
        prop_assert!(axial_stiffness(&more, e).unwrap() > axial_stiffness(&s, e).unwrap());
    }
}
