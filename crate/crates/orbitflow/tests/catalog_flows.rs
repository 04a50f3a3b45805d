//! End-to-end checks of the built-in systems: integrated trajectories vs
//! closed forms, conserved quantities, Lax realizations, level sets and
//! flow equivalences.

use std::f64::consts::TAU;

use nalgebra::DVector;
use orbitflow::catalog::{self, CatalogEntry};
use orbitflow::hamiltonian::{
    conservation_report, factorization_report, factorization_solution, integrate_rk4,
    level_set_probe, linear_flow, reconstruct_flow, LevelSetVerdict, LEVEL_SET_RADII,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn closed_form_deviation(entry: &CatalogEntry, system: &str, t_final: f64) -> f64 {
    let sys = entry.build_system(system, None).unwrap();
    let traj = sys.integrate(t_final, 1e-3).unwrap();
    let mut max = 0.0_f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let cf = entry.closed_form(system, &sys.initial, *t).unwrap();
        max = max.max((cf - s).amax());
    }
    max
}

#[test]
fn example_i_closed_form_matches_rk4() {
    let e = catalog::example_i();
    assert!(closed_form_deviation(&e, "h3_flow", 1.0) < 1e-6);
}

#[test]
fn example_i_seed_point_polynomials() {
    // from (0,0,0,1,0): u3 = t, u2 = t²/2, u1 = t³/6
    let e = catalog::example_i();
    let sys = e.build_system("h3_flow", None).unwrap();
    let traj = sys.integrate(1.0, 1e-3).unwrap();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        assert!((s[2] - t).abs() < 1e-8);
        assert!((s[1] - t * t / 2.0).abs() < 1e-8);
        assert!((s[0] - t * t * t / 6.0).abs() < 1e-8);
        assert!((s[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn example_ii_closed_form_matches_rk4_from_random_rational_points() {
    let e = catalog::example_ii();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..3 {
        let mut x0 = DVector::zeros(8);
        for i in [1usize, 3, 4, 5, 6, 7] {
            // random rationals k/4 with small k
            x0[i] = rng.gen_range(-8..=8i32) as f64 / 4.0;
        }
        let sys = e.build_system("h4_flow", Some(x0.clone())).unwrap();
        let traj = sys.integrate(1.0, 1e-3).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let cf = e.closed_form("h4_flow", &x0, *t).unwrap();
            assert!((cf - s).amax() < 1e-6);
        }
    }
}

#[test]
fn example_iii_all_four_flows_match_closed_forms() {
    let e = catalog::example_iii();
    for sys_id in ["sis11", "sis22", "sis11_variant", "sis22_variant"] {
        let dev = closed_form_deviation(&e, sys_id, TAU);
        assert!(dev < 1e-6, "{sys_id} deviates by {dev}");
    }
}

#[test]
fn example_iii_sis22_unit_circle() {
    // (x1,x2,x3) = (1,0,1) rotates as (cos t, sin t) with period 2π
    let e = catalog::example_iii();
    let x0 = DVector::from_vec(vec![0.0, 1.0, 0.0, 1.0]);
    for t in [0.5, 1.0, 2.0, TAU] {
        let cf = e.closed_form("sis22", &x0, t).unwrap();
        assert!((cf[1] - t.cos()).abs() < 1e-12);
        assert!((cf[2] - t.sin()).abs() < 1e-12);
        assert!((cf[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn oscillator_family_closed_forms() {
    for n in 1..=3 {
        let e = catalog::oscillator(n);
        let dev = closed_form_deviation(&e, "sphere_flow", TAU);
        assert!(dev < 1e-6, "oscillator({n}) deviates by {dev}");
    }
}

#[test]
fn conservation_of_all_invariants_along_all_flows() {
    for (id, sys_id, t_final) in [
        ("example_i", "h3_flow", 1.0),
        ("example_ii", "h4_flow", 1.0),
        ("example_iii", "sis11", TAU),
        ("example_iii", "sis22", TAU),
        ("example_iii", "sis11_variant", TAU),
        ("example_iii", "sis22_variant", TAU),
        ("oscillator(2)", "sphere_flow", TAU),
    ] {
        let e = catalog::entry(id).unwrap();
        let sys = e.build_system(sys_id, None).unwrap();
        let traj = sys.integrate(t_final, 1e-3).unwrap();
        for (name, drift) in conservation_report(&traj, &e.invariants).unwrap() {
            assert!(
                drift < 1e-8,
                "{id}/{sys_id}: {name} drifts by {drift}"
            );
        }
    }
}

#[test]
fn rk4_order_at_least_3_8() {
    // energy drift must fall by at least 2^3.8 when the step is halved
    let e = catalog::example_iii();
    let sys = e.build_system("sis22", None).unwrap();
    let h = &e.invariants[0];
    let drift = |dt: f64| {
        let traj = sys.integrate(TAU, dt).unwrap();
        conservation_report(&traj, std::slice::from_ref(h)).unwrap()[0].1
    };
    let coarse = drift(0.1);
    let fine = drift(0.05);
    assert!(
        coarse / fine >= 2f64.powf(3.8),
        "observed ratio {}",
        coarse / fine
    );
}

#[test]
fn time_reversal_reproduces_trajectory() {
    let e = catalog::example_iii();
    let sys = e.build_system("sis22", None).unwrap();
    let forward = sys.integrate(TAU, 1e-3).unwrap();
    let mut back = sys.clone();
    back.sign = -sys.sign;
    back.initial = forward.final_state().clone();
    let reversed = back.integrate(TAU, 1e-3).unwrap();
    let n = forward.states.len();
    for (i, s) in reversed.states.iter().enumerate() {
        assert!((s - &forward.states[n - 1 - i]).norm() < 1e-8);
    }
}

#[test]
fn tangency_along_flows() {
    for (id, sys_id) in [
        ("example_i", "h3_flow"),
        ("example_ii", "h4_flow"),
        ("example_iii", "sis22"),
    ] {
        let e = catalog::entry(id).unwrap();
        let sys = e.build_system(sys_id, None).unwrap();
        let traj = sys.integrate(1.0, 1e-2).unwrap();
        for s in traj.states.iter().step_by(10) {
            assert!(sys.tangency_residual(s).unwrap() < 1e-9);
        }
    }
}

#[test]
fn lax_pairs_are_isospectral() {
    let e = catalog::example_iii();
    let sys = e.build_system("sis22", None).unwrap();
    let traj = sys.integrate(TAU, 1e-3).unwrap();
    let rep = e.lax_report(&traj).unwrap();
    assert!(rep.derivative_residual < 1e-5, "{}", rep.derivative_residual);
    assert!(rep.eigenvalue_drift < 1e-8, "{}", rep.eigenvalue_drift);

    for n in 1..=3 {
        let e = catalog::oscillator(n);
        let sys = e.build_system("sphere_flow", None).unwrap();
        let traj = sys.integrate(TAU, 1e-3).unwrap();
        let rep = e.lax_report(&traj).unwrap();
        assert!(rep.derivative_residual < 1e-5);
        assert!(rep.eigenvalue_drift < 1e-8);
    }
}

#[test]
fn lax_residual_zero_on_constant_trajectory() {
    let e = catalog::example_iii();
    // frequency coordinate zero: the state is an equilibrium
    let x0 = DVector::from_vec(vec![0.0, 1.0, 2.0, 0.0]);
    let sys = e.build_system("sis22", Some(x0)).unwrap();
    let traj = sys.integrate(1.0, 1e-2).unwrap();
    let rep = e.lax_report(&traj).unwrap();
    assert_eq!(rep.derivative_residual, 0.0);
    assert_eq!(rep.eigenvalue_drift, 0.0);
}

#[test]
fn level_set_verdicts_match_compactness() {
    // bounded circle for the solvable example
    let e3 = catalog::example_iii();
    let sys = e3.build_system("sis11", None).unwrap();
    let h = &e3.invariants[0];
    let c = h.eval(&sys.initial).unwrap();
    let rep = level_set_probe(&sys, std::slice::from_ref(h), &[c], &LEVEL_SET_RADII, 11).unwrap();
    assert_eq!(rep.verdict, LevelSetVerdict::Bounded);

    // unbounded cubic level curve for the 5-dimensional nilpotent example
    let e1 = catalog::example_i();
    let sys = e1.build_system("h3_flow", None).unwrap();
    let f3 = e1.invariant("f3").unwrap();
    let c = f3.eval(&sys.initial).unwrap();
    let rep =
        level_set_probe(&sys, std::slice::from_ref(f3), &[c], &LEVEL_SET_RADII, 11).unwrap();
    assert_eq!(rep.verdict, LevelSetVerdict::Unbounded);
    let far = rep.witnesses.last().unwrap();
    assert!(far.norm() > 50.0, "witness norm {}", far.norm());

    // joint level set of the two conserved quantities in the 8-dim example
    let e2 = catalog::example_ii();
    let sys = e2.build_system("h4_flow", None).unwrap();
    let p3 = e2.invariant("P3").unwrap().clone();
    let p4 = e2.invariant("P4").unwrap().clone();
    let values = [
        p3.eval(&sys.initial).unwrap(),
        p4.eval(&sys.initial).unwrap(),
    ];
    let rep = level_set_probe(&sys, &[p3, p4], &values, &LEVEL_SET_RADII, 11).unwrap();
    assert_eq!(rep.verdict, LevelSetVerdict::Unbounded);
}

#[test]
fn equivalence_identity_map_for_self() {
    let e = catalog::example_iii();
    let rep = e.equivalence_check("sis22", "sis22").unwrap();
    let map = rep.map.expect("self-equivalence");
    assert!(!map.time_reversed);
    assert_eq!(map.permutation, vec![0, 1, 2, 3]);
    assert!(map.signs.iter().all(|&s| s == 1.0));
}

#[test]
fn example_iii_flow_equivalences() {
    let e = catalog::example_iii();
    for (a, b) in [
        ("sis11", "sis22"),
        ("sis11_variant", "sis11"),
        ("sis22_variant", "sis22"),
    ] {
        let rep = e.equivalence_check(a, b).unwrap();
        assert!(
            rep.map.is_some(),
            "no identification found for {a} vs {b}; best deviation {}",
            rep.deviation
        );
        assert!(rep.deviation < 1e-6);
    }
}

#[test]
fn linear_flow_agrees_with_integration() {
    let e = catalog::example_i();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let q = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
        let p = DVector::from_fn(5, |_, _| rng.gen_range(-1.0..1.0));
        let adt = e.metrics[0].form.ad_transpose_matrix(&e.algebra, &q).unwrap();
        let traj = integrate_rk4(|x| Ok(&adt * x), &p, 1.0, 1e-3).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states).step_by(100) {
            let x = linear_flow(&e.algebra, &e.metrics[0].form, &q, &p, *t).unwrap();
            assert!((x - s).norm() < 1e-8);
        }
    }
}

#[test]
fn reconstruct_flow_conserves_invariants() {
    let e = catalog::example_iii();
    let metric = &e.metric("ad_invariant").unwrap().form;
    let p_const = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
    let u0 = DVector::from_vec(vec![0.0, 1.0, 0.5, 1.0]);
    let inv = &e.invariants[0];
    let f0 = inv.eval(&u0).unwrap();
    for k in 0..20 {
        let t = k as f64 * 0.1;
        let u = reconstruct_flow(&e.algebra, metric, &p_const, &u0, 1.0, t).unwrap();
        assert!((inv.eval(&u).unwrap() - f0).abs() < 1e-10);
    }
    assert!((reconstruct_flow(&e.algebra, metric, &p_const, &u0, 1.0, 0.0).unwrap() - &u0).norm() < 1e-14);
}

#[test]
fn factorization_candidate_reported_not_asserted() {
    // stationarity: with the full gradient as generator the curve is frozen
    let e = catalog::example_iii();
    let sys = e.build_system("sis22", None).unwrap();
    let metric = &e.metric("ad_invariant").unwrap().form;
    let grad = metric.gradient(&e.invariants[0], &sys.initial).unwrap();
    for k in 0..10 {
        let t = k as f64 * 0.3;
        let moved = orbitflow::representation::tau_exp(&e.algebra, metric, &(grad.clone() * t))
            .unwrap()
            * &sys.initial;
        assert!((moved - &sys.initial).norm() < 1e-10);
    }

    // t = 0 reproduces the initial point; afterwards only report deviation
    let at0 = factorization_solution(&sys, 0.0).unwrap();
    assert!((at0 - &sys.initial).norm() < 1e-14);
    let dev = factorization_report(&sys, TAU, 1e-2).unwrap();
    assert!(dev.is_finite());
}

#[test]
fn orbit_dimension_strata() {
    use orbitflow::representation::orbit_tangent;
    let e1 = catalog::example_i();
    let s1 = e1.split_for("orthonormal").unwrap();
    let spec1 = e1.system_spec("h3_flow").unwrap();
    let dim_at = |v: Vec<f64>| {
        orbit_tangent(
            &e1.algebra,
            &e1.metrics[0].form,
            &DVector::from_vec(v),
            Some((&s1.split, spec1.role)),
        )
        .unwrap()
        .dim
    };
    assert_eq!(dim_at(vec![0.0, 0.0, 0.0, 1.0, 0.0]), 2);
    assert_eq!(dim_at(vec![1.0, 2.0, 0.0, 0.0, 0.0]), 0);
    assert_eq!(dim_at(vec![0.0, 0.0, 1.0, 0.0, 0.0]), 2);

    let e2 = catalog::example_ii();
    let s2 = e2.split_for("standard").unwrap();
    let spec2 = e2.system_spec("h4_flow").unwrap();
    let dim2_at = |v: Vec<f64>| {
        orbit_tangent(
            &e2.algebra,
            &e2.metrics[0].form,
            &DVector::from_vec(v),
            Some((&s2.split, spec2.role)),
        )
        .unwrap()
        .dim
    };
    // (y8, y7) strata: 4 / 2 / 0
    assert_eq!(dim2_at(vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]), 4);
    assert_eq!(dim2_at(vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0]), 2);
    assert_eq!(dim2_at(vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0]), 0);

    let e3 = catalog::example_iii();
    let s3 = e3.split_for("orthonormal").unwrap();
    let spec3 = e3.system_spec("sis11").unwrap();
    let dim3_at = |v: Vec<f64>| {
        orbit_tangent(
            &e3.algebra,
            &e3.metric("orthonormal").unwrap().form,
            &DVector::from_vec(v),
            Some((&s3.split, spec3.role)),
        )
        .unwrap()
        .dim
    };
    assert_eq!(dim3_at(vec![1.0, 1.0, 0.0, 0.0]), 2);
    assert_eq!(dim3_at(vec![0.0, 1.0, 1.0, 0.0]), 0);
}
