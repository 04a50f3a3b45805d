//! Randomized structural properties of the core operators.

use nalgebra::DVector;
use orbitflow::catalog;
use orbitflow::metric::{Polynomial, ScalarField};
use orbitflow::rat::rat_from_i64;
use orbitflow::representation::{matrix_exp, poisson_bracket, tau_exp};
use proptest::prelude::*;

fn vec4() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-3.0..3.0f64, 4).prop_map(DVector::from_vec)
}

fn vec5() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-3.0..3.0f64, 5).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_bilinear_and_antisymmetric(x in vec5(), y in vec5(), z in vec5(), a in -2.0..2.0f64) {
        let alg = catalog::example_i().algebra;
        let lhs = alg.bracket(&(&x * a + &z), &y).unwrap();
        let rhs = alg.bracket(&x, &y).unwrap() * a + alg.bracket(&z, &y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
        let anti = alg.bracket(&x, &y).unwrap() + alg.bracket(&y, &x).unwrap();
        prop_assert!(anti.norm() < 1e-12);
    }

    #[test]
    fn ad_is_a_representation(x in vec5(), y in vec5()) {
        // ad_{[x,y]} = ad_x ad_y - ad_y ad_x
        let alg = catalog::example_i().algebra;
        let lhs = alg.ad_matrix(&alg.bracket(&x, &y).unwrap()).unwrap();
        let ax = alg.ad_matrix(&x).unwrap();
        let ay = alg.ad_matrix(&y).unwrap();
        prop_assert!((lhs - (&ax * &ay - &ay * &ax)).norm() < 1e-9);
    }

    #[test]
    fn ad_transpose_defining_identity(x in vec4(), y in vec4(), z in vec4()) {
        // <ad^t_X Y, Z> = <Y, [X, Z]> for every metric
        let e = catalog::example_iii();
        for m in &e.metrics {
            let lhs = m.form.pair(&m.form.ad_transpose(&e.algebra, &x, &y).unwrap(), &z).unwrap();
            let rhs = m.form.pair(&y, &e.algebra.bracket(&x, &z).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn tau_exp_one_parameter_group(x in vec4(), s in -1.0..1.0f64, t in -1.0..1.0f64) {
        let e = catalog::example_iii();
        let g = &e.metric("orthonormal").unwrap().form;
        let a = tau_exp(&e.algebra, g, &(&x * s)).unwrap();
        let b = tau_exp(&e.algebra, g, &(&x * t)).unwrap();
        let c = tau_exp(&e.algebra, g, &(&x * (s + t))).unwrap();
        prop_assert!((a * b - c).norm() < 1e-9);
    }

    #[test]
    fn tau_exp_inverse(x in vec4()) {
        let e = catalog::example_iii();
        let g = &e.metric("ad_invariant").unwrap().form;
        let a = tau_exp(&e.algebra, g, &x).unwrap();
        let b = tau_exp(&e.algebra, g, &(-&x)).unwrap();
        prop_assert!((a * b - nalgebra::DMatrix::identity(4, 4)).norm() < 1e-9);
    }

    #[test]
    fn poisson_bracket_antisymmetric_and_leibniz(u in vec4()) {
        let e = catalog::example_iii();
        let g = &e.metric("orthonormal").unwrap().form;
        let f1 = ScalarField::polynomial_field(
            "a",
            Polynomial::from_terms(4, &[(rat_from_i64(1, 1), &[1, 1, 0, 0])]),
        );
        let f2 = ScalarField::polynomial_field(
            "b",
            Polynomial::from_terms(4, &[(rat_from_i64(1, 1), &[0, 0, 2, 0])]),
        );
        let f3 = ScalarField::polynomial_field(
            "c",
            Polynomial::from_terms(4, &[(rat_from_i64(1, 2), &[0, 1, 0, 1])]),
        );
        let pb = |a: &ScalarField, b: &ScalarField| {
            poisson_bracket(&e.algebra, g, a, b, &u, None).unwrap()
        };
        prop_assert!((pb(&f1, &f2) + pb(&f2, &f1)).abs() < 1e-9);
        // Leibniz: {f1, f2*f3} = f2(u){f1,f3} + f3(u){f1,f2}
        let prod = ScalarField::polynomial_field(
            "bc",
            Polynomial::from_terms(4, &[(rat_from_i64(1, 2), &[0, 1, 2, 1])]),
        );
        let lhs = pb(&f1, &prod);
        let rhs = f2.eval(&u).unwrap() * pb(&f1, &f3) + f3.eval(&u).unwrap() * pb(&f1, &f2);
        prop_assert!((lhs - rhs).abs() < 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn split_projectors_are_complementary(v in vec4()) {
        let e = catalog::example_iii();
        let s = &e.split_for("ad_invariant").unwrap().split;
        let sum = s.project_plus_perp(&v) + s.project_minus_perp(&v);
        prop_assert!((sum - &v).norm() < 1e-12);
        let p = s.project_plus_perp(&v);
        prop_assert!((s.project_plus_perp(&p) - &p).norm() < 1e-12);
        let (vp, vm) = s.decompose(&v);
        prop_assert!((vp + vm - &v).norm() < 1e-12);
    }

    #[test]
    fn matrix_exp_matches_series_scalar(a in -3.0..3.0f64) {
        let m = nalgebra::DMatrix::from_element(1, 1, a);
        prop_assert!((matrix_exp(&m)[(0, 0)] - a.exp()).abs() < 1e-12 * a.exp().max(1.0));
    }
}
