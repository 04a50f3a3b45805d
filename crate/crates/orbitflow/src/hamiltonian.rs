//! Hamiltonian vector fields on orbits, fixed-step RK4 integration,
//! conservation and involution reports, closed-form exponential flows and a
//! level-set boundedness probe.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::metric::{BilinearForm, ScalarField};
use crate::representation::{matrix_exp, orbit_tangent, RANK_TOL};
use crate::splitting::{SplitDecomposition, SplitRole};

/// Phase-space convention for a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemMode {
    /// `X_H(U) = sign · ad^t_{∇f(U)} U` on a full orbit.
    FullOrbit,
    /// `X_H(U) = sign · π_{acted⊥}(ad^t_{∇f-(U)} U)` on a split orbit.
    SplitOrbit,
}

/// A Hamiltonian flow configuration on an orbit.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    pub algebra: Arc<LieAlgebra>,
    pub metric: Arc<BilinearForm>,
    pub split: Option<Arc<SplitDecomposition>>,
    pub role: SplitRole,
    pub hamiltonian: ScalarField,
    pub initial: DVector<f64>,
    pub mode: SystemMode,
    /// Overall flow direction; `+1` or `-1`. Both directions are Hamiltonian
    /// flows of the same function; catalog entries pin the one matching the
    /// published solution curves.
    pub sign: f64,
    /// When set, the split vector field is cross-checked against the
    /// equivalent expression through the complementary gradient component.
    pub invariant_flagged: bool,
}

impl HamiltonianSystem {
    pub fn full_orbit(
        algebra: Arc<LieAlgebra>,
        metric: Arc<BilinearForm>,
        hamiltonian: ScalarField,
        initial: DVector<f64>,
        sign: f64,
    ) -> Result<Self> {
        let sys = HamiltonianSystem {
            algebra,
            metric,
            split: None,
            role: SplitRole::MinusActsOnPlusPerp,
            hamiltonian,
            initial,
            mode: SystemMode::FullOrbit,
            sign,
            invariant_flagged: false,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn split_orbit(
        algebra: Arc<LieAlgebra>,
        metric: Arc<BilinearForm>,
        split: Arc<SplitDecomposition>,
        role: SplitRole,
        hamiltonian: ScalarField,
        initial: DVector<f64>,
        sign: f64,
    ) -> Result<Self> {
        let sys = HamiltonianSystem {
            algebra,
            metric,
            split: Some(split),
            role,
            hamiltonian,
            initial,
            mode: SystemMode::SplitOrbit,
            sign,
            invariant_flagged: false,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn flag_invariant(mut self) -> Self {
        self.invariant_flagged = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.initial.len() != self.algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.algebra.dim(),
                got: self.initial.len(),
            });
        }
        if self.sign != 1.0 && self.sign != -1.0 {
            return Err(Error::Domain("sign must be +1 or -1".into()));
        }
        if self.mode == SystemMode::SplitOrbit {
            let split = self
                .split
                .as_deref()
                .ok_or_else(|| Error::Domain("split-orbit mode needs a split".into()))?;
            let res =
                SplitDecomposition::membership_residual(split.acted_perp(self.role), &self.initial);
            if res > RANK_TOL {
                return Err(Error::Domain(format!(
                    "initial condition is not in the acted perp (residual {res:.2e})"
                )));
            }
        }
        Ok(())
    }

    /// The Hamiltonian vector field at `u`.
    pub fn vector_field(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        match self.mode {
            SystemMode::FullOrbit => {
                let grad = self.metric.gradient(&self.hamiltonian, u)?;
                Ok(self.metric.ad_transpose(&self.algebra, &grad, u)? * self.sign)
            }
            SystemMode::SplitOrbit => {
                let split = self.split.as_deref().expect("validated");
                let (gp, gm) = split.split_gradient(&self.metric, &self.hamiltonian, u)?;
                let raw = self.metric.ad_transpose(&self.algebra, &gm, u)?;
                let field = split.project_acted_perp(self.role, &raw) * self.sign;
                if self.invariant_flagged {
                    // For invariant functions ad^t_{∇f} u = 0, so the field
                    // must also equal -sign · ad^t_{∇f+(u)} u.
                    let alt = self.metric.ad_transpose(&self.algebra, &gp, u)? * (-self.sign);
                    let tol = 1e-8 * field.norm().max(1.0);
                    if (&field - &alt).norm() > tol {
                        return Err(Error::CrossCheck(format!(
                            "split field expressions disagree by {:.3e} for `{}`",
                            (&field - &alt).norm(),
                            self.hamiltonian.name()
                        )));
                    }
                }
                Ok(field)
            }
        }
    }

    /// Residual of the field against the orbit tangent space at `u`.
    pub fn tangency_residual(&self, u: &DVector<f64>) -> Result<f64> {
        let split = match self.mode {
            SystemMode::FullOrbit => None,
            SystemMode::SplitOrbit => Some((self.split.as_deref().expect("validated"), self.role)),
        };
        let orbit = orbit_tangent(&self.algebra, &self.metric, u, split)?;
        let v = self.vector_field(u)?;
        if v.norm() == 0.0 {
            return Ok(0.0);
        }
        let b = &orbit.tangent_basis;
        let coeffs = b
            .clone()
            .svd(true, true)
            .solve(&v, RANK_TOL)
            .map_err(|e| Error::Domain(e.to_string()))?;
        Ok((b * coeffs - &v).norm() / v.norm())
    }

    /// Fixed-step classical RK4 from the system's initial condition.
    pub fn integrate(&self, t_final: f64, dt: f64) -> Result<Trajectory> {
        integrate_rk4(
            |u| self.vector_field(u),
            &self.initial,
            t_final,
            dt,
        )
    }

    /// Like [`integrate`](Self::integrate), but on failure the valid prefix
    /// of the trajectory is returned alongside the error.
    pub fn integrate_partial(&self, t_final: f64, dt: f64) -> (Trajectory, Option<Error>) {
        integrate_rk4_partial(|u| self.vector_field(u), &self.initial, t_final, dt)
    }
}

/// A uniformly sampled solution curve.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub dt: f64,
    pub method: &'static str,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("non-empty trajectory")
    }

    /// State at time `t` by linear interpolation between stored samples.
    pub fn sample(&self, t: f64) -> DVector<f64> {
        let last = *self.times.last().expect("non-empty");
        let t = t.clamp(self.times[0], last);
        let idx = ((t - self.times[0]) / self.dt).floor() as usize;
        if idx + 1 >= self.states.len() {
            return self.states[self.states.len() - 1].clone();
        }
        let alpha = (t - self.times[idx]) / self.dt;
        &self.states[idx] * (1.0 - alpha) + &self.states[idx + 1] * alpha
    }
}

/// Classical RK4 on `x' = f(x)` with a fixed step.
pub fn integrate_rk4(
    f: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    x0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    let (traj, err) = integrate_rk4_partial(f, x0, t_final, dt);
    match err {
        None => Ok(traj),
        Some(e) => Err(e),
    }
}

/// RK4 that always returns the valid prefix of the trajectory; on
/// divergence or a field evaluation failure the accompanying error is
/// `Some`.
pub fn integrate_rk4_partial(
    f: impl Fn(&DVector<f64>) -> Result<DVector<f64>>,
    x0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> (Trajectory, Option<Error>) {
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![x0.clone()],
        dt,
        method: "rk4",
    };
    if !(dt > 0.0) || !(t_final > 0.0) {
        return (
            traj,
            Some(Error::Domain("integration needs T > 0 and dt > 0".into())),
        );
    }
    // Snap the step so the grid lands exactly on t_final.
    let steps = (t_final / dt).round().max(1.0) as usize;
    let dt = t_final / steps as f64;
    traj.dt = dt;
    let mut x = x0.clone();
    for n in 0..steps {
        let step = (|| -> Result<DVector<f64>> {
            let k1 = f(&x)?;
            let k2 = f(&(&x + &k1 * (dt / 2.0)))?;
            let k3 = f(&(&x + &k2 * (dt / 2.0)))?;
            let k4 = f(&(&x + &k3 * dt))?;
            Ok((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0))
        })();
        match step {
            Ok(delta) => x += delta,
            Err(e) => return (traj, Some(e)),
        }
        if x.iter().any(|v| !v.is_finite()) {
            return (traj, Some(Error::Divergence { last_valid: n }));
        }
        traj.states.push(x.clone());
        traj.times.push((n + 1) as f64 * dt);
    }
    (traj, None)
}

/// `x(t) = exp(t · ad^t_Q) P`, the solution of the linear equation
/// `x' = ad^t_Q x` with `x(0) = P`.
pub fn linear_flow(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    q: &DVector<f64>,
    p: &DVector<f64>,
    t: f64,
) -> Result<DVector<f64>> {
    let adt = metric.ad_transpose_matrix(algebra, q)?;
    Ok(matrix_exp(&(adt * t)) * p)
}

/// `u(t) = exp(sign · t · ad^t_P) u0`, solving `u' = sign · ad^t_P u`.
pub fn reconstruct_flow(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    p_const: &DVector<f64>,
    u0: &DVector<f64>,
    sign: f64,
    t: f64,
) -> Result<DVector<f64>> {
    let adt = metric.ad_transpose_matrix(algebra, p_const)?;
    Ok(matrix_exp(&(adt * (sign * t))) * u0)
}

/// The exponential-curve candidate `τ(exp t ∇f+(U0)) U0` built from the
/// plus-component of the gradient at the initial point.
///
/// This is evaluated as written and treated as a conjecture: use
/// [`factorization_report`] to measure its deviation from the integrated
/// flow rather than assuming agreement.
pub fn factorization_solution(sys: &HamiltonianSystem, t: f64) -> Result<DVector<f64>> {
    let split = sys
        .split
        .as_deref()
        .ok_or_else(|| Error::Domain("factorization needs a split".into()))?;
    let (gp, _) = split.split_gradient(&sys.metric, &sys.hamiltonian, &sys.initial)?;
    let adt = sys.metric.ad_transpose_matrix(&sys.algebra, &gp)?;
    Ok(matrix_exp(&(adt * (-t))) * &sys.initial)
}

/// Max deviation between the exponential-curve candidate and the RK4 flow
/// over `[0, t_final]`.
pub fn factorization_report(sys: &HamiltonianSystem, t_final: f64, dt: f64) -> Result<f64> {
    let traj = sys.integrate(t_final, dt)?;
    let mut max = 0.0_f64;
    for (i, t) in traj.times.iter().enumerate() {
        let candidate = factorization_solution(sys, *t)?;
        max = max.max((&candidate - &traj.states[i]).norm());
    }
    Ok(max)
}

/// Per-field maximum drift `max_t |f(x(t)) - f(x(0))|` along a trajectory.
pub fn conservation_report(traj: &Trajectory, fields: &[ScalarField]) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::with_capacity(fields.len());
    for f in fields {
        let f0 = f.eval(&traj.states[0])?;
        let mut drift = 0.0_f64;
        for s in &traj.states[1..] {
            drift = drift.max((f.eval(s)? - f0).abs());
        }
        out.push((f.name().to_string(), drift));
    }
    Ok(out)
}

/// Symmetric matrix of `max |{f_i, f_j}|` over the sample points.
pub fn involution_matrix(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    split: Option<&SplitDecomposition>,
    fields: &[ScalarField],
    sample_points: &[DVector<f64>],
) -> Result<DMatrix<f64>> {
    let n = fields.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut max = 0.0_f64;
            for u in sample_points {
                let pb = crate::representation::poisson_bracket(
                    algebra, metric, &fields[i], &fields[j], u, split,
                )?;
                max = max.max(pb.abs());
            }
            m[(i, j)] = max;
            m[(j, i)] = max;
        }
    }
    Ok(m)
}

/// Outcome of the level-set boundedness probe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSetVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl std::fmt::Display for LevelSetVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LevelSetVerdict::Bounded => "BOUNDED",
            LevelSetVerdict::Unbounded => "UNBOUNDED",
            LevelSetVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Clone, Debug)]
pub struct LevelSetReport {
    pub verdict: LevelSetVerdict,
    /// Level-set points found, largest displacement last; for UNBOUNDED
    /// these witness growth, for BOUNDED they all stay near the base point.
    pub witnesses: Vec<DVector<f64>>,
    /// `(radius, largest displacement of a root found from that shell)`.
    pub shell_results: Vec<(f64, Option<f64>)>,
}

/// Default radius schedule of the probe.
pub const LEVEL_SET_RADII: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Heuristic boundedness probe for a joint level set inside the affine chart
/// `initial + span(orbit tangent at initial)`.
///
/// From seeded random starts on shells of increasing radius, a damped
/// Gauss-Newton search solves `f_i = v_i`. If roots keep appearing at
/// displacements comparable to the largest shells, the set is reported
/// UNBOUNDED with the roots as witnesses; if distant starts keep falling
/// back to small-displacement roots, BOUNDED. The verdict is heuristic:
/// it only ever inspects finitely many points.
pub fn level_set_probe(
    sys: &HamiltonianSystem,
    fields: &[ScalarField],
    values: &[f64],
    radii: &[f64],
    seed: u64,
) -> Result<LevelSetReport> {
    if fields.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: fields.len(),
            got: values.len(),
        });
    }
    let split = match sys.mode {
        SystemMode::FullOrbit => None,
        SystemMode::SplitOrbit => Some((sys.split.as_deref().expect("validated"), sys.role)),
    };
    let orbit = orbit_tangent(&sys.algebra, &sys.metric, &sys.initial, split)?;
    // Orthonormalize the chart directions.
    let chart = orthonormal_range(&orbit.tangent_basis);
    let k = chart.ncols();
    if k == 0 {
        // zero-dimensional orbit: the set is the base point or empty
        let on_level = fields
            .iter()
            .zip(values)
            .try_fold(true, |acc, (f, v)| {
                Ok::<_, Error>(acc && (f.eval(&sys.initial)? - v).abs() < 1e-8)
            })?;
        return Ok(LevelSetReport {
            verdict: LevelSetVerdict::Bounded,
            witnesses: if on_level { vec![sys.initial.clone()] } else { vec![] },
            shell_results: vec![],
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts_per_shell = 12;
    let mut witnesses: Vec<(f64, DVector<f64>)> = Vec::new();
    let mut shell_results = Vec::new();
    for &radius in radii {
        let mut best: Option<f64> = None;
        for _ in 0..starts_per_shell {
            let mut c = DVector::from_fn(k, |_, _| rng.gen_range(-1.0..1.0_f64));
            let n = c.norm();
            if n > 0.0 {
                c *= radius / n;
            }
            if let Some(root) = gauss_newton_on_chart(sys, &chart, fields, values, &c) {
                let displacement = (&chart * &root).norm();
                let point = &sys.initial + &chart * &root;
                best = Some(best.map_or(displacement, |b: f64| b.max(displacement)));
                witnesses.push((displacement, point));
            }
        }
        shell_results.push((radius, best));
    }

    witnesses.sort_by(|a, b| a.0.total_cmp(&b.0));
    witnesses.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
    let max_radius = radii.iter().cloned().fold(0.0_f64, f64::max);
    let small_scale = shell_results
        .first()
        .and_then(|(_, b)| *b)
        .unwrap_or(0.0)
        .max(sys.initial.norm())
        .max(1.0);

    let far_roots = witnesses.iter().filter(|(d, _)| *d > max_radius / 10.0).count();
    let all_shells_solved = shell_results.iter().all(|(_, b)| b.is_some());
    let all_roots_small = witnesses.iter().all(|(d, _)| *d <= 10.0 * small_scale);

    let verdict = if far_roots > 0 {
        LevelSetVerdict::Unbounded
    } else if all_shells_solved && all_roots_small {
        LevelSetVerdict::Bounded
    } else {
        LevelSetVerdict::Inconclusive
    };
    Ok(LevelSetReport {
        verdict,
        witnesses: witnesses.into_iter().map(|(_, p)| p).collect(),
        shell_results,
    })
}

fn orthonormal_range(b: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = b.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax.max(1e-300))
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(b.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Damped Gauss-Newton root search for `f_i(x0 + chart·c) = v_i`; returns
/// chart coordinates of a root or `None`.
fn gauss_newton_on_chart(
    sys: &HamiltonianSystem,
    chart: &DMatrix<f64>,
    fields: &[ScalarField],
    values: &[f64],
    start: &DVector<f64>,
) -> Option<DVector<f64>> {
    let mut c = start.clone();
    let m = fields.len();
    let tol = 1e-10;
    for _ in 0..120 {
        let point = &sys.initial + chart * &c;
        let mut residual = DVector::zeros(m);
        let mut jac = DMatrix::zeros(m, chart.ncols());
        for (i, f) in fields.iter().enumerate() {
            residual[i] = f.eval(&point).ok()? - values[i];
            let df = f.differential(&point).ok()?;
            for j in 0..chart.ncols() {
                jac[(i, j)] = df.dot(&chart.column(j).into_owned());
            }
        }
        let rnorm = residual.norm();
        if rnorm < tol * (1.0 + values.iter().map(|v| v.abs()).fold(0.0_f64, f64::max)) {
            return Some(c);
        }
        // minimum-norm Gauss-Newton step via SVD pseudoinverse
        let step = jac.clone().svd(true, true).solve(&residual, 1e-12).ok()?;
        let mut lambda = 1.0_f64;
        let mut accepted = false;
        for _ in 0..20 {
            let trial = &c - &step * lambda;
            let p = &sys.initial + chart * &trial;
            let mut ok = true;
            let mut tnorm = 0.0_f64;
            for (i, f) in fields.iter().enumerate() {
                match f.eval(&p) {
                    Ok(val) => tnorm += (val - values[i]).powi(2),
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok && tnorm.sqrt() < rnorm {
                c = trial;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            return None;
        }
    }
    None
}
