mod common;

use cinf_core::expr::{format_expression, parse_expression};
use cinf_core::forms::differential;
use cinf_core::structures::{check_symmetry, rescale_symmetry};
use cinf_core::{Expr, VectorField, ZeroTestPolicy, ZeroTester};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn dd_vanishes(seed: u64, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::chart(n);
        let g = common::poly(&mut rng, &c, 2);
        prop_assert!(differential(&c, &g).d().unwrap().is_zero());
        let a = common::form(&mut rng, &c, 1, 2);
        if n >= 3 {
            prop_assert!(a.d().unwrap().d().unwrap().is_zero());
        }
    }

    #[test]
    fn interior_is_an_antiderivation(seed: u64, n in 3usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::chart(n);
        let a = common::form(&mut rng, &c, 1, 2);
        let b = common::form(&mut rng, &c, 2, 1);
        let x = common::field(&mut rng, &c, 2);
        let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
        let rhs = a.interior(&x).unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.interior(&x).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exterior_derivative_on_two_fields(seed: u64, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::chart(n);
        let a = common::form(&mut rng, &c, 1, 2);
        let x = common::field(&mut rng, &c, 2);
        let y = common::field(&mut rng, &c, 2);
        let xy = x.bracket(&y).unwrap();
        let lhs = a.d().unwrap().eval_on(&[&x, &y]).unwrap();
        let ay = a.eval_on(&[&y]).unwrap();
        let ax = a.eval_on(&[&x]).unwrap();
        let rhs = &(&x.apply(&ay) - &y.apply(&ax)) - &a.eval_on(&[&xy]).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn bracket_is_a_lie_bracket(seed: u64, n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::chart(n);
        let x = common::field(&mut rng, &c, 2);
        let y = common::field(&mut rng, &c, 2);
        let z = common::field(&mut rng, &c, 1);
        prop_assert!(x.bracket(&y).unwrap().add(&y.bracket(&x).unwrap()).unwrap().is_zero());
        let jac = x.bracket(&y.bracket(&z).unwrap()).unwrap()
            .add(&y.bracket(&z.bracket(&x).unwrap()).unwrap()).unwrap()
            .add(&z.bracket(&x.bracket(&y).unwrap()).unwrap()).unwrap();
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn rescaled_symmetry_shifts_lambda(seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = ZeroTester::new(ZeroTestPolicy::default());
        let c = common::chart(2);
        let z = common::field(&mut rng, &c, 1);
        let x = common::field(&mut rng, &c, 1);
        let h = common::nonzero_poly(&mut rng, &c, 2);
        let refs: Vec<&VectorField> = vec![&z];
        let names = vec!["Z".to_string()];
        let check = check_symmetry(&x, "X", &refs, &names, &t);
        prop_assume!(check.is_ok());
        let check = check.unwrap();
        prop_assume!(check.entries[0].residual.is_proved_zero());
        let direct = rescale_symmetry(&check, &x, &h, &refs, &t).unwrap();
        let predicted = &check.entries[0].lambda - &z.apply(&h).checked_div(&h).unwrap();
        prop_assert_eq!(predicted, direct.entries[0].lambda.clone());
    }

    #[test]
    fn format_then_parse_is_identity(seed: u64, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::chart(n);
        let p = common::poly(&mut rng, &c, 2);
        let q = common::nonzero_poly(&mut rng, &c, 2);
        let e: Expr = p.checked_div(&q).unwrap();
        let back = parse_expression(&format_expression(&e), &c).unwrap();
        prop_assert_eq!(back, e);
    }
}
