use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use optaudit_core::composite::{self, CompositeTheory};
use optaudit_core::faithful::{self, FaithfulCalculus};
use optaudit_core::geometry;
use optaudit_core::gns;
use optaudit_core::linalg;
use optaudit_core::theories::{self, Sampler};
use optaudit_core::theory::{self, Theory, Transformation};
use proptest::prelude::*;

fn theory_for(kind: usize) -> Theory {
    match kind {
        0 => theories::build_quantum(2),
        1 => theories::build_quantum(3),
        2 => theories::build_classical(3),
        _ => theories::build_gbit(),
    }
    .unwrap()
}

fn calc_for(kind: usize) -> FaithfulCalculus {
    let phi = match kind {
        0 => theories::build_bell_state(2),
        1 => theories::build_bell_state(3),
        2 => theories::build_classical_correlated(3, &[0.2, 0.3, 0.5]),
        _ => theories::build_classical_correlated(2, &[0.5, 0.5]),
    };
    FaithfulCalculus::new(phi.unwrap()).unwrap()
}

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    linalg::max_abs(&(a - b)) <= tol * linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_is_associative(kind in 0usize..4, seed in any::<u64>()) {
        let t = theory_for(kind);
        let mut s = Sampler::new(seed);
        let (a, b, c) = (s.generalized_transformation(&t), s.generalized_transformation(&t), s.generalized_transformation(&t));
        let left = theory::compose(&theory::compose(&a, &b).unwrap(), &c).unwrap();
        let right = theory::compose(&a, &theory::compose(&b, &c).unwrap()).unwrap();
        prop_assert!(close(left.matrix(), right.matrix(), 1e-12));
    }

    #[test]
    fn heisenberg_and_schrodinger_pictures_agree(kind in 0usize..4, seed in any::<u64>()) {
        let t = theory_for(kind);
        let mut s = Sampler::new(seed);
        let a = s.channel(&t).unwrap();
        let b = s.physical_effect(&t).unwrap();
        let omega = s.state(&t);
        let forward = theory::probability(&b, &theory::schrodinger_apply(&a, &omega).unwrap()).unwrap();
        let backward = theory::probability(&theory::heisenberg_apply(&a, &b).unwrap(), &omega).unwrap();
        prop_assert!((forward - backward).abs() < 1e-12);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&forward));
    }

    #[test]
    fn channels_compose_to_physical_maps(kind in 0usize..4, seed in any::<u64>()) {
        let t = theory_for(kind);
        let mut s = Sampler::new(seed);
        let c = theory::compose(&s.channel(&t).unwrap(), &s.channel(&t).unwrap()).unwrap();
        prop_assert!(theory::is_physical_transformation(&c));
        prop_assert!(theory::validate_experiment(&s.instrument(&t, 3).unwrap()).passed);
    }

    #[test]
    fn weight_and_effect_norms_are_norms(kind in 0usize..4, seed in any::<u64>(), lambda in -3.0f64..3.0) {
        let t = theory_for(kind);
        let mut s = Sampler::new(seed);
        let (v, w) = (s.generalized_weight(&t), s.generalized_weight(&t));
        let nv = geometry::weight_norm(&v);
        prop_assert!(geometry::weight_norm(&v.add(&w).unwrap()) <= nv + geometry::weight_norm(&w) + 1e-9);
        assert_abs_diff_eq!(geometry::weight_norm(&v.scaled(lambda)), lambda.abs() * nv, epsilon = 1e-9);
        let (e, f) = (s.generalized_effect(&t), s.generalized_effect(&t));
        let ne = geometry::effect_norm(&e);
        prop_assert!(geometry::effect_norm(&e.add(&f).unwrap()) <= ne + geometry::effect_norm(&f) + 1e-12);
        assert_abs_diff_eq!(geometry::effect_norm(&e.scaled(lambda)), lambda.abs() * ne, epsilon = 1e-12);
        let omega = s.state(&t);
        assert_abs_diff_eq!(geometry::weight_norm(&omega), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_transformation_norms_are_submultiplicative(kind in 2usize..4, seed in any::<u64>()) {
        let t = theory_for(kind);
        let mut s = Sampler::new(seed);
        let (a, b) = (s.generalized_transformation(&t), s.generalized_transformation(&t));
        let na = geometry::transformation_norm(&a);
        let nb = geometry::transformation_norm(&b);
        prop_assert!(na.exact && nb.exact);
        let nab = geometry::transformation_norm(&theory::compose(&a, &b).unwrap()).value;
        prop_assert!(nab <= na.value * nb.value * (1.0 + 1e-10) + 1e-12);
        prop_assert!(geometry::effect_norm(&a.effect()) <= na.value + 1e-10);
    }

    #[test]
    fn local_operations_do_not_signal(kind in 0usize..3, seed in any::<u64>()) {
        let t = theory_for(kind);
        let c = CompositeTheory::new(&t, &t).unwrap();
        let mut s = Sampler::new(seed);
        let omega = s.joint_state(&c);
        let r = composite::check_no_signaling(&c, &omega, &s.instrument(&t, 2).unwrap()).unwrap();
        prop_assert!(r.deviation < 1e-10 && r.consistency_deviation < 1e-10);
        let (a, b) = (s.generalized_transformation(&t), s.generalized_transformation(&t));
        prop_assert!(composite::embedding_commutator(&c, &a, &b).unwrap() < 1e-10);
    }

    #[test]
    fn transposition_is_a_linear_involutive_antihomomorphism(kind in 0usize..4, seed in any::<u64>(), lambda in -2.0f64..2.0) {
        let calc = calc_for(kind);
        let t = calc.theory().clone();
        let mut s = Sampler::new(seed);
        let (a, b) = (s.generalized_transformation(&t), s.generalized_transformation(&t));
        let at = calc.transpose(&a).unwrap();
        let bt = calc.transpose(&b).unwrap();
        prop_assert!(close(calc.transpose(&at).unwrap().matrix(), a.matrix(), 1e-10));
        let combo = a.scaled_unchecked(lambda).sum_unchecked(&b).unwrap();
        let expected = at.matrix() * lambda + bt.matrix();
        prop_assert!(close(calc.transpose(&combo).unwrap().matrix(), &expected, 1e-10));
        let ab = calc.transpose(&theory::compose(&a, &b).unwrap()).unwrap();
        prop_assert!(close(ab.matrix(), theory::compose(&bt, &at).unwrap().matrix(), 1e-10));
        let c = s.generalized_transformation(&t);
        let lhs = faithful::pairing(calc.phi(), &theory::compose(&b, &a).unwrap(), &c).unwrap();
        let rhs = faithful::pairing(calc.phi(), &b, &theory::compose(&c, &at).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
    }

    #[test]
    fn adjoint_is_an_involutive_antihomomorphism(kind in 0usize..4, seed in any::<u64>()) {
        let calc = calc_for(kind);
        let inv = gns::involution_for(&calc).unwrap();
        let t = calc.theory().clone();
        let mut s = Sampler::new(seed);
        let (a, b) = (s.generalized_transformation(&t), s.generalized_transformation(&t));
        let ad = gns::adjoint(&calc, &inv, &a).unwrap();
        prop_assert!(close(gns::adjoint(&calc, &inv, &ad).unwrap().matrix(), a.matrix(), 1e-10));
        let abd = gns::adjoint(&calc, &inv, &theory::compose(&a, &b).unwrap()).unwrap();
        let bd = gns::adjoint(&calc, &inv, &b).unwrap();
        prop_assert!(close(abd.matrix(), theory::compose(&bd, &ad).unwrap().matrix(), 1e-10));
    }
}

#[test]
fn involution_squares_to_identity_and_fixes_the_unit() {
    for kind in 0..4 {
        let calc = calc_for(kind);
        let inv = gns::involution_for(&calc).unwrap();
        let n = calc.theory().dim();
        assert!(close(&(&inv.sigma * &inv.sigma), &DMatrix::identity(n, n), 1e-12));
        assert!(inv.is_identity_preserving(calc.theory().unit()));
        assert!(!inv.degenerate);
    }
}

#[test]
fn adjoint_of_a_channel_is_its_dual() {
    let calc = calc_for(1);
    let inv = gns::involution_for(&calc).unwrap();
    let t = calc.theory().clone();
    let mut s = Sampler::new(11);
    for _ in 0..10 {
        let kraus = s.quantum_channel_kraus(3);
        let a = Transformation::from_kraus(&t, &kraus).unwrap();
        let dual: Vec<_> = kraus.iter().map(|k| k.adjoint()).collect();
        let oracle = Transformation::from_kraus(&t, &dual).unwrap();
        assert!(close(gns::adjoint(&calc, &inv, &a).unwrap().matrix(), oracle.matrix(), 1e-10));
    }
}
