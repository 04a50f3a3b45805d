//! Acceptance gate: eleven go/no-go criteria covering exact structure,
//! formula equivalence, conservation, Lax realizations, level sets, the
//! splitting identity and reproducibility. Each test prints a single
//! PASS/FAIL line (visible with `--nocapture`); a FAIL line is followed by
//! the panic of the failing assertion.

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::DVector;
use num::Zero;
use orbitflow::catalog::{self, CatalogEntry};
use orbitflow::config::RunConfig;
use orbitflow::hamiltonian::{
    conservation_report, level_set_probe, LevelSetVerdict, LEVEL_SET_RADII,
};
use orbitflow::rat::{rat_from_i64, Rat, Subspace};
use orbitflow::report::trajectory_csv;
use orbitflow::representation::{orbit_tangent, poisson_bracket, tau_invariance_residual};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances for the gate.
const TOL_INVARIANCE: f64 = 1e-10;
const TOL_INVOLUTION: f64 = 1e-10;
const TOL_TRAJECTORY: f64 = 1e-6;
const TOL_CONSERVATION: f64 = 1e-8;
const MIN_ORDER_RATIO: f64 = 13.9288; // 2^3.8
const TOL_LAX_DERIVATIVE: f64 = 1e-5;
const TOL_LAX_EIGENVALUE: f64 = 1e-8;
const TOL_SPLIT_IDENTITY: f64 = 1e-10;
const RUN_ALL_BUDGET_SECS: f64 = 60.0;
const SAMPLE_POINTS: usize = 100;
const RATIONAL_SAMPLES: usize = 20;

fn verdict(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[{}] {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{criterion}: {detail}");
}

fn r(n: i64, d: i64) -> Rat {
    rat_from_i64(n, d)
}

fn random_rat_vec(dim: usize, rng: &mut impl Rng) -> Vec<Rat> {
    (0..dim)
        .map(|_| r(rng.gen_range(-9..=9), rng.gen_range(1..=4)))
        .collect()
}

fn random_vec(dim: usize, rng: &mut impl Rng) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.gen_range(-2.0..2.0))
}

fn unit(dim: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); dim];
    v[i] = r(1, 1);
    v
}

#[test]
fn criterion_01_structural_exactness() {
    let entries = [
        catalog::example_i(),
        catalog::example_ii(),
        catalog::example_iii(),
        catalog::oscillator(3),
    ];
    let mut pass = entries
        .iter()
        .all(|e| e.algebra.jacobi_residual().is_zero() && e.algebra.antisymmetry_residual().is_zero());
    pass &= entries[0].algebra.nilpotency_step() == Some(4);
    pass &= entries[1].algebra.nilpotency_step() == Some(5);
    pass &= entries[2].algebra.is_solvable() && !entries[2].algebra.is_nilpotent();
    verdict(
        "criterion 01 structural exactness",
        pass,
        "Jacobi/antisymmetry exactly zero; nilpotency steps 4 and 5",
    );
}

#[test]
fn criterion_02_formula_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let mut pass = true;

    // 5-dim nilpotent example: transposed action and gradient displays.
    let e1 = catalog::example_i();
    let g1 = &e1.metrics[0].form;
    for _ in 0..RATIONAL_SAMPLES {
        let x = random_rat_vec(5, &mut rng);
        let y = random_rat_vec(5, &mut rng);
        let got = g1.ad_transpose_rat(&e1.algebra, &x, &y).unwrap();
        let expected = vec![
            &x[4] * &y[1] - &x[2] * &y[3] - &x[1] * &y[2],
            &x[0] * &y[2] + &x[4] * &y[2],
            &x[0] * &y[3] + &x[4] * &y[3],
            Rat::zero(),
            -(&x[0] * &y[1] + &x[2] * &y[3] + &x[1] * &y[2]),
        ];
        pass &= got == expected;
        let gf2 = g1.gradient_rat(e1.invariant("f2").unwrap(), &x).unwrap();
        pass &= gf2 == vec![Rat::zero(), x[3].clone(), -&x[2], x[1].clone(), Rat::zero()];
        let gf3 = g1.gradient_rat(e1.invariant("f3").unwrap(), &x).unwrap();
        pass &= gf3
            == vec![
                &x[3] * &x[3],
                -(&x[2] * &x[3]),
                &x[2] * &x[2] - &x[1] * &x[3],
                r(2, 1) * (&x[0] - &x[4]) * &x[3] - &x[1] * &x[2],
                -(&x[3] * &x[3]),
            ];
    }

    // 8-dim nilpotent example: full action, split action and gradients.
    let e2 = catalog::example_ii();
    let g2 = &e2.metrics[0].form;
    let split2 = &e2.split_for("standard").unwrap().split;
    for _ in 0..RATIONAL_SAMPLES {
        let x = random_rat_vec(8, &mut rng);
        let y = random_rat_vec(8, &mut rng);
        let got = g2.ad_transpose_rat(&e2.algebra, &x, &y).unwrap();
        let expected = vec![
            &x[1] * &y[2] - &x[2] * &y[1] + &x[3] * &y[5] - &x[5] * &y[3],
            -(&x[0] * &y[2]) + &x[2] * &y[6] - &x[3] * &y[7] - &x[4] * &y[3],
            -(&x[1] * &y[3]) - &x[2] * &y[5],
            Rat::zero(),
            -(&x[0] * &y[1]) + &x[1] * &y[6] + &x[4] * &y[5] + &x[5] * &y[7],
            &x[0] * &y[3] + &x[2] * &y[7],
            &x[0] * &y[5] - &x[1] * &y[7],
            Rat::zero(),
        ];
        pass &= got == expected;

        let mut xs = x.clone();
        xs[0] = Rat::zero();
        xs[4] = Rat::zero();
        let mut ys = y.clone();
        ys[0] = Rat::zero();
        ys[2] = Rat::zero();
        let got =
            split2.project_minus_perp_rat(&g2.ad_transpose_rat(&e2.algebra, &xs, &ys).unwrap());
        let mut expected = vec![Rat::zero(); 8];
        expected[1] = &xs[2] * &ys[6] - &xs[3] * &ys[7];
        expected[4] = &xs[1] * &ys[6] + &xs[5] * &ys[7];
        expected[5] = &xs[2] * &ys[7];
        expected[6] = -(&xs[1] * &ys[7]);
        pass &= got == expected;

        let gp3 = g2.gradient_rat(e2.invariant("P3").unwrap(), &x).unwrap();
        pass &= gp3
            == vec![
                Rat::zero(),
                Rat::zero(),
                Rat::zero(),
                -&x[3],
                x[7].clone(),
                -&x[5],
                -&x[6],
                -&x[2],
            ];
        let gp4 = g2.gradient_rat(e2.invariant("P4").unwrap(), &x).unwrap();
        pass &= gp4
            == vec![
                x[7].clone(),
                x[5].clone(),
                -&x[3],
                -&x[2],
                -&x[6],
                x[1].clone(),
                -&x[4],
                x[0].clone(),
            ];
    }

    // solvable 4-dim example: full action, both split actions, gradients.
    let e3 = catalog::example_iii();
    let go = &e3.metric("orthonormal").unwrap().form;
    let so = &e3.split_for("orthonormal").unwrap().split;
    let ga = &e3.metric("ad_invariant").unwrap().form;
    let sa = &e3.split_for("ad_invariant").unwrap().split;
    let p = e3.invariant("P").unwrap();
    for _ in 0..RATIONAL_SAMPLES {
        let x = random_rat_vec(4, &mut rng);
        let y = random_rat_vec(4, &mut rng);
        let got = go.ad_transpose_rat(&e3.algebra, &x, &y).unwrap();
        let expected = vec![
            Rat::zero(),
            &x[3] * &y[2] - &x[2] * &y[0],
            &x[1] * &y[0] - &x[3] * &y[1],
            &x[2] * &y[1] - &x[1] * &y[2],
        ];
        pass &= got == expected;

        let mut xs = x.clone();
        xs[3] = Rat::zero();
        let mut ys = y.clone();
        ys[3] = Rat::zero();
        let got = so.project_minus_perp_rat(&go.ad_transpose_rat(&e3.algebra, &xs, &ys).unwrap());
        let mut expected = vec![Rat::zero(); 4];
        expected[1] = -(&xs[2] * &ys[0]);
        expected[2] = &xs[1] * &ys[0];
        pass &= got == expected;

        let mut ya = y.clone();
        ya[0] = Rat::zero();
        let adt = ga.ad_transpose_rat(&e3.algebra, &xs, &ya).unwrap();
        let neg: Vec<Rat> = adt.iter().map(|v| -v).collect();
        let got = sa.project_minus_perp_rat(&neg);
        let mut expected = vec![Rat::zero(); 4];
        expected[1] = &xs[2] * &ya[3];
        expected[2] = -(&xs[1] * &ya[3]);
        pass &= got == expected;

        let gp = go.gradient_rat(p, &x).unwrap();
        pass &= gp == vec![x[3].clone(), x[1].clone(), x[2].clone(), x[0].clone()];
        pass &= ga.gradient_rat(p, &x).unwrap() == x;
    }

    verdict(
        "criterion 02 formula equivalence",
        pass,
        "displayed actions and gradients reproduced exactly at 20 rational points each",
    );
}

#[test]
fn criterion_03_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(203);
    let mut max = 0.0_f64;
    let mut count = 0usize;
    for id in ["example_i", "example_ii", "example_iii"] {
        let e = catalog::entry(id).unwrap();
        for f in &e.invariants {
            count += 1;
            for m in &e.metrics {
                for _ in 0..SAMPLE_POINTS {
                    let u = random_vec(e.algebra.dim(), &mut rng);
                    max = max.max(tau_invariance_residual(&e.algebra, &m.form, f, &u).unwrap());
                }
            }
        }
    }
    let pass = count == 8 && max < TOL_INVARIANCE;
    verdict(
        "criterion 03 invariance",
        pass,
        &format!("8 invariants, max residual {max:.3e} < {TOL_INVARIANCE:.0e} at 100 points each"),
    );
}

#[test]
fn criterion_04_involution() {
    let mut rng = ChaCha8Rng::seed_from_u64(204);
    let mut max = 0.0_f64;
    let mut cubic_quartic_pair = f64::NAN;
    for id in ["example_i", "example_ii", "example_iii"] {
        let e = catalog::entry(id).unwrap();
        let g = &e.metrics[0].form;
        for i in 0..e.invariants.len() {
            for j in i + 1..e.invariants.len() {
                for _ in 0..SAMPLE_POINTS {
                    let u = random_vec(e.algebra.dim(), &mut rng);
                    let pb = poisson_bracket(
                        &e.algebra,
                        g,
                        &e.invariants[i],
                        &e.invariants[j],
                        &u,
                        None,
                    )
                    .unwrap()
                    .abs();
                    max = max.max(pb);
                    if id == "example_ii"
                        && e.invariants[i].name() == "P3"
                        && e.invariants[j].name() == "P4"
                    {
                        cubic_quartic_pair = pb.max(cubic_quartic_pair.max(0.0));
                    }
                }
            }
        }
    }
    let pass = max < TOL_INVOLUTION && cubic_quartic_pair < TOL_INVOLUTION;
    verdict(
        "criterion 04 involution",
        pass,
        &format!(
            "max |{{f,g}}| {max:.3e} over all pairs, cubic/quartic pair {cubic_quartic_pair:.3e}"
        ),
    );
}

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
fn criterion_05_trajectory_reproduction() {
    let d1 = closed_form_deviation(&catalog::example_i(), "h3_flow", 1.0);
    let d2 = closed_form_deviation(&catalog::example_ii(), "h4_flow", 1.0);
    let e3 = catalog::example_iii();
    let d3a = closed_form_deviation(&e3, "sis11", TAU);
    let d3b = closed_form_deviation(&e3, "sis22", TAU);
    let max = d1.max(d2).max(d3a).max(d3b);
    let pass = max < TOL_TRAJECTORY;
    verdict(
        "criterion 05 trajectory reproduction",
        pass,
        &format!("max closed-form deviation {max:.3e} < {TOL_TRAJECTORY:.0e} (dt = 1e-3)"),
    );
}

#[test]
fn criterion_06_conservation_and_order() {
    let mut max_drift = 0.0_f64;
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
        for (_, drift) in conservation_report(&traj, &e.invariants).unwrap() {
            max_drift = max_drift.max(drift);
        }
    }

    // fourth-order convergence on the rotation flow's energy drift
    let e3 = catalog::example_iii();
    let sys = e3.build_system("sis22", None).unwrap();
    let h = std::slice::from_ref(e3.invariant("P").unwrap());
    let coarse = conservation_report(&sys.integrate(TAU, 0.1).unwrap(), h).unwrap()[0].1;
    let fine = conservation_report(&sys.integrate(TAU, 0.05).unwrap(), h).unwrap()[0].1;
    let ratio = coarse / fine;

    let pass = max_drift < TOL_CONSERVATION && ratio >= MIN_ORDER_RATIO;
    verdict(
        "criterion 06 conservation",
        pass,
        &format!(
            "max invariant drift {max_drift:.3e} < {TOL_CONSERVATION:.0e}; halving dt cuts drift by {ratio:.1}x (needs >= {MIN_ORDER_RATIO:.1})"
        ),
    );
}

#[test]
fn criterion_07_lax_verification() {
    let mut max_deriv = 0.0_f64;
    let mut max_drift = 0.0_f64;
    let mut cases = vec![("example_iii".to_string(), "sis22")];
    for n in 1..=3 {
        cases.push((format!("oscillator({n})"), "sphere_flow"));
    }
    for (id, sys_id) in &cases {
        let e = catalog::entry(id).unwrap();
        let sys = e.build_system(sys_id, None).unwrap();
        let traj = sys.integrate(TAU, 1e-3).unwrap();
        let rep = e.lax_report(&traj).unwrap();
        max_deriv = max_deriv.max(rep.derivative_residual);
        max_drift = max_drift.max(rep.eigenvalue_drift);
    }
    let pass = max_deriv < TOL_LAX_DERIVATIVE && max_drift < TOL_LAX_EIGENVALUE;
    verdict(
        "criterion 07 lax verification",
        pass,
        &format!(
            "max ||L' - [M,L]|| {max_deriv:.3e} < {TOL_LAX_DERIVATIVE:.0e}, max eigenvalue drift {max_drift:.3e} < {TOL_LAX_EIGENVALUE:.0e}"
        ),
    );
}

#[test]
fn criterion_08_orbit_strata() {
    let dim_at = |e: &CatalogEntry, sys_id: &str, v: Vec<f64>| {
        let spec = e.system_spec(sys_id).unwrap();
        let split = e.split_for(&spec.metric).unwrap();
        orbit_tangent(
            &e.algebra,
            &e.metric(&spec.metric).unwrap().form,
            &DVector::from_vec(v),
            Some((&split.split, spec.role)),
        )
        .unwrap()
        .dim
    };
    let e1 = catalog::example_i();
    let e2 = catalog::example_ii();
    let e3 = catalog::example_iii();
    let pass = dim_at(&e1, "h3_flow", vec![0.0, 0.0, 0.0, 1.0, 0.0]) == 2
        && dim_at(&e1, "h3_flow", vec![1.0, 2.0, 0.0, 0.0, 0.0]) == 0
        && dim_at(&e2, "h4_flow", vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0]) == 4
        && dim_at(&e2, "h4_flow", vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0]) == 2
        && dim_at(&e2, "h4_flow", vec![0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0]) == 0
        && dim_at(&e3, "sis11", vec![1.0, 1.0, 0.0, 0.0]) == 2
        && dim_at(&e3, "sis11", vec![0.0, 1.0, 1.0, 0.0]) == 0;
    verdict(
        "criterion 08 orbit strata",
        pass,
        "orbit dimensions 2/0, 4/2/0 and 2/0 at the deterministic probe points",
    );
}

#[test]
fn criterion_09_level_set_probes() {
    let e3 = catalog::example_iii();
    let sys3 = e3.build_system("sis11", None).unwrap();
    let h = e3.invariant("P").unwrap();
    let c = h.eval(&sys3.initial).unwrap();
    let rep3 =
        level_set_probe(&sys3, std::slice::from_ref(h), &[c], &LEVEL_SET_RADII, 11).unwrap();

    let e1 = catalog::example_i();
    let sys1 = e1.build_system("h3_flow", None).unwrap();
    let f3 = e1.invariant("f3").unwrap();
    let c = f3.eval(&sys1.initial).unwrap();
    let rep1 =
        level_set_probe(&sys1, std::slice::from_ref(f3), &[c], &LEVEL_SET_RADII, 11).unwrap();

    let e2 = catalog::example_ii();
    let sys2 = e2.build_system("h4_flow", None).unwrap();
    let p3 = e2.invariant("P3").unwrap().clone();
    let p4 = e2.invariant("P4").unwrap().clone();
    let values = [
        p3.eval(&sys2.initial).unwrap(),
        p4.eval(&sys2.initial).unwrap(),
    ];
    let rep2 = level_set_probe(&sys2, &[p3, p4], &values, &LEVEL_SET_RADII, 11).unwrap();

    let pass = rep3.verdict == LevelSetVerdict::Bounded
        && rep1.verdict == LevelSetVerdict::Unbounded
        && !rep1.witnesses.is_empty()
        && rep2.verdict == LevelSetVerdict::Unbounded
        && !rep2.witnesses.is_empty();
    verdict(
        "criterion 09 level-set probes",
        pass,
        &format!(
            "verdicts {:?}/{:?}/{:?} with {}+{} unboundedness witnesses",
            rep3.verdict,
            rep1.verdict,
            rep2.verdict,
            rep1.witnesses.len(),
            rep2.witnesses.len()
        ),
    );
}

#[test]
fn criterion_10_splitting_correctness() {
    let mut pass = true;

    // perps span exactly the published coordinate subspaces
    let e1 = catalog::example_i();
    let s1 = &e1.split_for("orthonormal").unwrap().split;
    pass &= *s1.plus_perp() == Subspace::from_span(5, &[unit(5, 4)]);
    pass &= *s1.minus_perp()
        == Subspace::from_span(5, &[unit(5, 0), unit(5, 1), unit(5, 2), unit(5, 3)]);
    let e2 = catalog::example_ii();
    let s2 = &e2.split_for("standard").unwrap().split;
    pass &= *s2.plus_perp() == Subspace::from_span(8, &[unit(8, 0), unit(8, 2)]);
    pass &= *s2.minus_perp()
        == Subspace::from_span(
            8,
            &[unit(8, 1), unit(8, 3), unit(8, 4), unit(8, 5), unit(8, 6), unit(8, 7)],
        );
    let e3 = catalog::example_iii();
    let so = &e3.split_for("orthonormal").unwrap().split;
    pass &= *so.plus_perp() == Subspace::from_span(4, &[unit(4, 3)]);
    pass &= *so.minus_perp()
        == Subspace::from_span(4, &[unit(4, 0), unit(4, 1), unit(4, 2)]);
    let sa = &e3.split_for("ad_invariant").unwrap().split;
    pass &= *sa.plus_perp() == Subspace::from_span(4, &[unit(4, 0)]);
    pass &= *sa.minus_perp()
        == Subspace::from_span(4, &[unit(4, 1), unit(4, 2), unit(4, 3)]);

    // projector idempotence, exactly
    for s in [s1, s2, so, sa] {
        let p = s.projector_plus_perp();
        pass &= p.mul(p) == *p;
    }

    // the two half-gradients generate opposite motions of any point
    let mut rng = ChaCha8Rng::seed_from_u64(210);
    let mut max = 0.0_f64;
    for id in ["example_i", "example_ii", "example_iii", "oscillator(2)"] {
        let e = catalog::entry(id).unwrap();
        for spec in &e.systems {
            let m = &e.metric(&spec.metric).unwrap().form;
            let s = &e.split_for(&spec.metric).unwrap().split;
            let h = e.invariant(&spec.hamiltonian).unwrap();
            for _ in 0..SAMPLE_POINTS {
                let u = random_vec(e.algebra.dim(), &mut rng);
                let (gp, gm) = s.split_gradient(m, h, &u).unwrap();
                let res = (m.ad_transpose(&e.algebra, &gp, &u).unwrap()
                    + m.ad_transpose(&e.algebra, &gm, &u).unwrap())
                .norm();
                max = max.max(res);
            }
        }
    }
    pass &= max < TOL_SPLIT_IDENTITY;
    verdict(
        "criterion 10 splitting correctness",
        pass,
        &format!(
            "published perps and exact projectors; max ||ad^t(grad+)U + ad^t(grad-)U|| {max:.3e} < {TOL_SPLIT_IDENTITY:.0e}"
        ),
    );
}

#[test]
fn criterion_11_determinism_and_round_trip() {
    let started = Instant::now();
    let mut pass = true;
    let mut runs = 0usize;
    for id in catalog::CATALOG_IDS {
        let entry = catalog::entry(id).unwrap();
        for spec in &entry.systems {
            let run = |entry: &CatalogEntry| -> (String, String) {
                let cfg = RunConfig::from_catalog(entry, &spec.id).unwrap();
                let json = cfg.to_json();
                let cfg2 = RunConfig::from_json(&json).unwrap();
                assert_eq!(json, cfg2.to_json(), "config round trip not byte-identical");
                let built = cfg2.build().unwrap(); // validates algebra, metric and split
                let traj = built.system.integrate(cfg2.t, cfg2.dt).unwrap();
                (json, trajectory_csv(&traj))
            };
            let (json_a, csv_a) = run(&entry);
            let (json_b, csv_b) = run(&catalog::entry(id).unwrap());
            pass &= json_a == json_b && csv_a == csv_b;
            runs += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    pass &= elapsed < RUN_ALL_BUDGET_SECS;
    verdict(
        "criterion 11 determinism",
        pass,
        &format!(
            "{runs} flows exported, rebuilt and re-integrated byte-identically in {elapsed:.1}s (< {RUN_ALL_BUDGET_SECS:.0}s)"
        ),
    );
}
