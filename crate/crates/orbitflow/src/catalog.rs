//! Built-in worked systems: two nilpotent examples, a solvable example with
//! four metrics, and the 2n+1 oscillator family, together with their
//! invariants, pinned flow signs, closed-form solutions and Lax pairs.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSystem, Trajectory};
use crate::metric::{BilinearForm, Polynomial, ScalarField};
use crate::rat::{rat_from_i64, rat_vec_to_f64, Rat};
use crate::splitting::{SplitDecomposition, SplitRole};

pub const CATALOG_IDS: [&str; 4] = ["example_i", "example_ii", "example_iii", "oscillator"];

type ClosedForm = Arc<dyn Fn(&DVector<f64>, f64) -> DVector<f64> + Send + Sync>;
type MatrixBuilder = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A metric together with the exact entries it was built from.
#[derive(Clone, Debug)]
pub struct NamedMetric {
    pub name: String,
    pub form: Arc<BilinearForm>,
    pub entries: Vec<(usize, usize, Rat)>,
}

/// A split decomposition tied to one of the entry's metrics.
#[derive(Clone, Debug)]
pub struct NamedSplit {
    pub metric: String,
    pub split: Arc<SplitDecomposition>,
    /// Coordinate indices spanning each subalgebra (all catalog splits are
    /// coordinate spans).
    pub plus_indices: Vec<usize>,
    pub minus_indices: Vec<usize>,
}

/// Configuration of one named flow of an entry.
#[derive(Clone)]
pub struct SystemSpec {
    pub id: String,
    pub metric: String,
    pub hamiltonian: String,
    pub role: SplitRole,
    /// Pinned flow direction reproducing the published solution curves.
    pub sign: f64,
    /// Coordinates that must vanish for a point to lie in the phase space.
    pub zero_pattern: Vec<usize>,
    pub default_initial: Vec<Rat>,
    pub closed_form: Option<ClosedForm>,
}

impl std::fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemSpec")
            .field("id", &self.id)
            .field("metric", &self.metric)
            .field("hamiltonian", &self.hamiltonian)
            .field("sign", &self.sign)
            .finish()
    }
}

/// Isospectral matrix realization `L' = [M, L]` of a flow.
#[derive(Clone)]
pub struct LaxPair {
    pub size: usize,
    pub m_builder: MatrixBuilder,
    pub l_builder: MatrixBuilder,
}

impl std::fmt::Debug for LaxPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LaxPair").field("size", &self.size).finish()
    }
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: String,
    pub algebra: Arc<LieAlgebra>,
    pub structure_entries: Vec<(usize, usize, usize, Rat)>,
    pub metrics: Vec<NamedMetric>,
    pub invariants: Vec<ScalarField>,
    pub splits: Vec<NamedSplit>,
    pub systems: Vec<SystemSpec>,
    pub lax: Option<LaxPair>,
}

/// Look up an entry by id; `oscillator(n)` takes the family parameter in
/// parentheses.
pub fn entry(id: &str) -> Result<CatalogEntry> {
    match id {
        "example_i" => Ok(example_i()),
        "example_ii" => Ok(example_ii()),
        "example_iii" => Ok(example_iii()),
        _ => {
            if let Some(rest) = id.strip_prefix("oscillator(").and_then(|r| r.strip_suffix(')')) {
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownCatalogId(id.to_string()))?;
                if n == 0 || n > 50 {
                    return Err(Error::UnknownCatalogId(id.to_string()));
                }
                Ok(oscillator(n))
            } else if id == "oscillator" {
                Ok(oscillator(1))
            } else {
                Err(Error::UnknownCatalogId(id.to_string()))
            }
        }
    }
}

fn unit_rat(dim: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::from_integer(0.into()); dim];
    v[i] = rat_from_i64(1, 1);
    v
}

fn coordinate_span(dim: usize, indices: &[usize]) -> Vec<Vec<Rat>> {
    indices.iter().map(|&i| unit_rat(dim, i)).collect()
}

fn build_split(
    algebra: &Arc<LieAlgebra>,
    metric: &NamedMetric,
    plus: &[usize],
    minus: &[usize],
) -> NamedSplit {
    let dim = algebra.dim();
    let split = SplitDecomposition::build(
        algebra,
        &metric.form,
        &coordinate_span(dim, plus),
        &coordinate_span(dim, minus),
    )
    .expect("catalog split data is valid");
    NamedSplit {
        metric: metric.name.clone(),
        split: Arc::new(split),
        plus_indices: plus.to_vec(),
        minus_indices: minus.to_vec(),
    }
}

impl CatalogEntry {
    pub fn metric(&self, name: &str) -> Result<&NamedMetric> {
        self.metrics
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::UnknownCatalogId(format!("{}::metric {name}", self.id)))
    }

    pub fn split_for(&self, metric: &str) -> Result<&NamedSplit> {
        self.splits
            .iter()
            .find(|s| s.metric == metric)
            .ok_or_else(|| Error::UnknownCatalogId(format!("{}::split {metric}", self.id)))
    }

    pub fn invariant(&self, name: &str) -> Result<&ScalarField> {
        self.invariants
            .iter()
            .find(|f| f.name() == name)
            .ok_or_else(|| Error::UnknownCatalogId(format!("{}::invariant {name}", self.id)))
    }

    pub fn system_spec(&self, id: &str) -> Result<&SystemSpec> {
        self.systems
            .iter()
            .find(|s| s.id == id)
            .ok_or_else(|| Error::UnknownCatalogId(format!("{}::system {id}", self.id)))
    }

    fn check_pattern(&self, spec: &SystemSpec, x0: &DVector<f64>) -> Result<()> {
        for &i in &spec.zero_pattern {
            if x0[i] != 0.0 {
                return Err(Error::Domain(format!(
                    "system {} requires coordinate {} of the initial condition to vanish",
                    spec.id,
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Instantiate a flow from its spec, optionally overriding the initial
    /// condition (which must satisfy the system's zero pattern).
    pub fn build_system(
        &self,
        system_id: &str,
        initial: Option<DVector<f64>>,
    ) -> Result<HamiltonianSystem> {
        let spec = self.system_spec(system_id)?;
        let x0 = match initial {
            Some(v) => {
                self.check_pattern(spec, &v)?;
                v
            }
            None => rat_vec_to_f64(&spec.default_initial),
        };
        let metric = self.metric(&spec.metric)?;
        let split = self.split_for(&spec.metric)?;
        let h = self.invariant(&spec.hamiltonian)?.clone();
        Ok(HamiltonianSystem::split_orbit(
            self.algebra.clone(),
            metric.form.clone(),
            split.split.clone(),
            spec.role,
            h,
            x0,
            spec.sign,
        )?
        .flag_invariant())
    }

    /// Published closed-form solution of a flow at time `t`.
    pub fn closed_form(&self, system_id: &str, x0: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
        let spec = self.system_spec(system_id)?;
        self.check_pattern(spec, x0)?;
        let cf = spec
            .closed_form
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{system_id} has no closed form")))?;
        Ok(cf(x0, t))
    }

    /// The Lax matrices `(M, L)` at a state.
    pub fn lax_matrices(&self, x: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let lax = self
            .lax
            .as_ref()
            .ok_or_else(|| Error::Unsupported(format!("{} has no Lax pair", self.id)))?;
        Ok(((lax.m_builder)(x), (lax.l_builder)(x)))
    }

    /// Finite-difference residual of `L' = [M, L]` and eigenvalue drift of
    /// `L` along a trajectory.
    pub fn lax_report(&self, traj: &Trajectory) -> Result<LaxReport> {
        let n = traj.states.len();
        if n < 3 {
            return Ok(LaxReport {
                derivative_residual: 0.0,
                eigenvalue_drift: 0.0,
            });
        }
        let (_, l0) = self.lax_matrices(&traj.states[0])?;
        let eig0 = sorted_eigenvalues(&l0);
        let mut deriv = 0.0_f64;
        let mut drift = 0.0_f64;
        for i in 1..n - 1 {
            let (m, l) = self.lax_matrices(&traj.states[i])?;
            let (_, lp) = self.lax_matrices(&traj.states[i + 1])?;
            let (_, lm) = self.lax_matrices(&traj.states[i - 1])?;
            let ldot = (lp - lm) / (2.0 * traj.dt);
            let comm = &m * &l - &l * &m;
            deriv = deriv.max((ldot - comm).norm());
            // pair each eigenvalue with its nearest initial one: ordering
            // from the solver is not stable for conjugate pairs
            let eig = sorted_eigenvalues(&l);
            for a in &eig {
                let nearest = eig0
                    .iter()
                    .map(|b| (a - b).norm())
                    .fold(f64::INFINITY, f64::min);
                drift = drift.max(nearest);
            }
        }
        Ok(LaxReport {
            derivative_residual: deriv,
            eigenvalue_drift: drift,
        })
    }

    /// Deterministic sample point in a system's phase space.
    pub fn sample_phase_point(&self, system_id: &str, rng: &mut impl Rng) -> Result<DVector<f64>> {
        let spec = self.system_spec(system_id)?;
        let split = self.split_for(&spec.metric)?;
        let basis = split.split.acted_perp(spec.role).basis().to_f64();
        let mut p = DVector::zeros(self.algebra.dim());
        for j in 0..basis.ncols() {
            p += basis.column(j) * rng.gen_range(-2.0..2.0);
        }
        Ok(p)
    }

    /// Search for a signed coordinate identification (optionally with time
    /// reversal) carrying the flow of `system_a` onto the flow of
    /// `system_b`.
    pub fn equivalence_check(&self, system_a: &str, system_b: &str) -> Result<EquivalenceReport> {
        let sys_a = self.build_system(system_a, None)?;
        let t_final = 1.0;
        let dt = 1e-3;
        let traj_a = sys_a.integrate(t_final, dt)?;
        let dim = self.algebra.dim();

        let candidates = coordinate_map_candidates(dim);
        let mut best_dev = f64::INFINITY;
        for (perm, signs) in &candidates {
            for &reversed in &[false, true] {
                let mapped0 = apply_map(perm, signs, &traj_a.states[0]);
                let sign_flip = if reversed { -1.0 } else { 1.0 };
                // cheap prefilter: mapped field must match at the start
                let spec_b = self.system_spec(system_b)?;
                let sys_b = match self.build_system_with_sign(
                    system_b,
                    mapped0.clone(),
                    spec_b.sign * sign_flip,
                ) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                let fa = sys_a.vector_field(&traj_a.states[0])?;
                let fb = match sys_b.vector_field(&mapped0) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                let mapped_fa = apply_map(perm, signs, &fa);
                if (mapped_fa - fb).norm() > 1e-8 * (1.0 + fa.norm()) {
                    continue;
                }
                let traj_b = match sys_b.integrate(t_final, dt) {
                    Ok(t) => t,
                    Err(_) => continue,
                };
                let mut dev = 0.0_f64;
                for (sa, sb) in traj_a.states.iter().zip(&traj_b.states) {
                    dev = dev.max((apply_map(perm, signs, sa) - sb).norm());
                }
                if dev < 1e-6 {
                    return Ok(EquivalenceReport {
                        map: Some(CoordinateMap {
                            permutation: perm.clone(),
                            signs: signs.clone(),
                            time_reversed: reversed,
                        }),
                        deviation: dev,
                    });
                }
                best_dev = best_dev.min(dev);
            }
        }
        Ok(EquivalenceReport {
            map: None,
            deviation: best_dev,
        })
    }

    fn build_system_with_sign(
        &self,
        system_id: &str,
        initial: DVector<f64>,
        sign: f64,
    ) -> Result<HamiltonianSystem> {
        let spec = self.system_spec(system_id)?;
        self.check_pattern(spec, &initial)?;
        let metric = self.metric(&spec.metric)?;
        let split = self.split_for(&spec.metric)?;
        let h = self.invariant(&spec.hamiltonian)?.clone();
        Ok(HamiltonianSystem::split_orbit(
            self.algebra.clone(),
            metric.form.clone(),
            split.split.clone(),
            spec.role,
            h,
            initial,
            sign,
        )?
        .flag_invariant())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LaxReport {
    pub derivative_residual: f64,
    pub eigenvalue_drift: f64,
}

#[derive(Clone, Debug)]
pub struct CoordinateMap {
    /// `new[permutation[i]] = signs[i] * old[i]`.
    pub permutation: Vec<usize>,
    pub signs: Vec<f64>,
    pub time_reversed: bool,
}

#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    pub map: Option<CoordinateMap>,
    /// Deviation of the reported map, or the best deviation seen if none
    /// qualified.
    pub deviation: f64,
}

fn apply_map(perm: &[usize], signs: &[f64], v: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(v.len());
    for i in 0..v.len() {
        out[perm[i]] = signs[i] * v[i];
    }
    out
}

fn coordinate_map_candidates(dim: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
    let perms: Vec<Vec<usize>> = if dim <= 6 {
        permutations(dim)
    } else {
        vec![(0..dim).collect()]
    };
    let mut out = Vec::new();
    for p in perms {
        for mask in 0..(1u32 << dim) {
            let signs: Vec<f64> = (0..dim)
                .map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 })
                .collect();
            out.push((p.clone(), signs));
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    let mut eig: Vec<Complex<f64>> = m.clone().complex_eigenvalues().iter().cloned().collect();
    eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    eig
}

fn r(n: i64, d: i64) -> Rat {
    rat_from_i64(n, d)
}

// ---------------------------------------------------------------------------
// Entry builders
// ---------------------------------------------------------------------------

/// Five-dimensional 4-step nilpotent algebra with an orthonormal metric;
/// flow of the cubic invariant on the two-dimensional orbit at
/// `(0,0,0,1,0)`.
pub fn example_i() -> CatalogEntry {
    let dim = 5;
    // [e1,e2]=e3, [e1,e3]=e4, [e5,e1]=e2, [e5,e2]=e3, [e5,e3]=e4 (1-based)
    let structure = vec![
        (0, 1, 2, r(1, 1)),
        (0, 2, 3, r(1, 1)),
        (4, 0, 1, r(1, 1)),
        (4, 1, 2, r(1, 1)),
        (4, 2, 3, r(1, 1)),
    ];
    let algebra = Arc::new(LieAlgebra::new("example_i", dim, &structure).expect("valid table"));
    let gram_entries: Vec<(usize, usize, Rat)> = (0..dim).map(|i| (i, i, r(1, 1))).collect();
    let metric = NamedMetric {
        name: "orthonormal".into(),
        form: Arc::new(BilinearForm::from_entries(dim, &gram_entries).expect("valid")),
        entries: gram_entries,
    };

    let f1 = ScalarField::polynomial_field(
        "f1",
        Polynomial::from_terms(dim, &[(r(1, 1), &[0, 0, 0, 1, 0])]),
    );
    let f2 = ScalarField::polynomial_field(
        "f2",
        Polynomial::from_terms(
            dim,
            &[(r(1, 1), &[0, 1, 0, 1, 0]), (r(-1, 2), &[0, 0, 2, 0, 0])],
        ),
    );
    let f3 = ScalarField::polynomial_field(
        "f3",
        Polynomial::from_terms(
            dim,
            &[
                (r(1, 1), &[1, 0, 0, 2, 0]),
                (r(-1, 1), &[0, 0, 0, 2, 1]),
                (r(-1, 1), &[0, 1, 1, 1, 0]),
                (r(1, 3), &[0, 0, 3, 0, 0]),
            ],
        ),
    );

    let split = build_split(&algebra, &metric, &[0, 1, 2, 3], &[4]);

    let closed: ClosedForm = Arc::new(|x0: &DVector<f64>, t: f64| {
        let (u1, u2, u3, u4) = (x0[0], x0[1], x0[2], x0[3]);
        DVector::from_vec(vec![
            u4.powi(7) * t.powi(3) / 6.0
                + 0.5 * u4.powi(4) * u3 * t * t
                + u4 * u4 * u2 * t
                + u1,
            0.5 * u4.powi(5) * t * t + u4 * u4 * u3 * t + u2,
            u4.powi(3) * t + u3,
            u4,
            0.0,
        ])
    });

    CatalogEntry {
        id: "example_i".into(),
        algebra,
        structure_entries: structure,
        metrics: vec![metric],
        invariants: vec![f1, f2, f3],
        splits: vec![split],
        systems: vec![SystemSpec {
            id: "h3_flow".into(),
            metric: "orthonormal".into(),
            hamiltonian: "f3".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: -1.0,
            zero_pattern: vec![4],
            default_initial: vec![r(0, 1), r(0, 1), r(0, 1), r(1, 1), r(0, 1)],
            closed_form: Some(closed),
        }],
        lax: None,
    }
}

/// Eight-dimensional 5-step nilpotent algebra with an indefinite metric;
/// flow of the quartic invariant on a four-dimensional orbit.
pub fn example_ii() -> CatalogEntry {
    let dim = 8;
    // [e1,e4]=-e6, [e1,e6]=-e7, [e1,e2]=e5, [e1,e3]=e2,
    // [e4,e2]=-e8=[e6,e3], [e2,e3]=e4, [e5,e2]=e7, [e5,e3]=-e6 (1-based)
    let structure = vec![
        (0, 3, 5, r(-1, 1)),
        (0, 5, 6, r(-1, 1)),
        (0, 1, 4, r(1, 1)),
        (0, 2, 1, r(1, 1)),
        (3, 1, 7, r(-1, 1)),
        (5, 2, 7, r(-1, 1)),
        (1, 2, 3, r(1, 1)),
        (4, 1, 6, r(1, 1)),
        (4, 2, 5, r(-1, 1)),
    ];
    let algebra = Arc::new(LieAlgebra::new("example_ii", dim, &structure).expect("valid table"));
    let gram_entries = vec![
        (0, 0, r(1, 1)),
        (1, 1, r(1, 1)),
        (5, 5, r(1, 1)),
        (7, 7, r(1, 1)),
        (2, 4, r(-1, 1)),
        (3, 6, r(-1, 1)),
    ];
    let metric = NamedMetric {
        name: "standard".into(),
        form: Arc::new(BilinearForm::from_entries(dim, &gram_entries).expect("valid")),
        entries: gram_entries,
    };

    let p1 = ScalarField::polynomial_field(
        "P1",
        Polynomial::from_terms(dim, &[(r(1, 1), &[0, 0, 0, 1, 0, 0, 0, 0])]),
    );
    let p2 = ScalarField::polynomial_field(
        "P2",
        Polynomial::from_terms(dim, &[(r(1, 1), &[0, 0, 0, 0, 0, 0, 0, 1])]),
    );
    let p3 = ScalarField::polynomial_field(
        "P3",
        Polynomial::from_terms(
            dim,
            &[
                (r(1, 1), &[0, 0, 0, 1, 0, 0, 1, 0]),
                (r(-1, 1), &[0, 0, 1, 0, 0, 0, 0, 1]),
                (r(-1, 2), &[0, 0, 0, 0, 0, 2, 0, 0]),
            ],
        ),
    );
    let p4 = ScalarField::polynomial_field(
        "P4",
        Polynomial::from_terms(
            dim,
            &[
                (r(1, 1), &[1, 0, 0, 0, 0, 0, 0, 1]),
                (r(1, 1), &[0, 0, 0, 1, 1, 0, 0, 0]),
                (r(1, 1), &[0, 1, 0, 0, 0, 1, 0, 0]),
                (r(1, 1), &[0, 0, 1, 0, 0, 0, 1, 0]),
            ],
        ),
    );

    let split = build_split(&algebra, &metric, &[1, 2, 3, 5, 6, 7], &[0, 4]);

    let closed: ClosedForm = Arc::new(|x0: &DVector<f64>, t: f64| {
        let (x2, x4, x5, x6, x7, x8) = (x0[1], x0[3], x0[4], x0[5], x0[6], x0[7]);
        DVector::from_vec(vec![
            0.0,
            x4 * x4 * x8 * x8 * t.powi(3) / 6.0
                + x6 * x8 * x4 * t * t / 2.0
                + x4 * x7 * t
                + x2,
            0.0,
            x4,
            -(x4 * x4 * x8.powi(3) * t.powi(4) / 6.0
                + 2.0 / 3.0 * x4 * x6 * x8 * x8 * t.powi(3)
                + (x4 * x7 * x8 + 0.5 * x6 * x6 * x8) * t * t
                + (x2 * x8 + x7 * x6) * t)
                + x5,
            x4 * x8 * t + x6,
            x4 * x8 * x8 * t * t / 2.0 + x6 * x8 * t + x7,
            x8,
        ])
    });

    CatalogEntry {
        id: "example_ii".into(),
        algebra,
        structure_entries: structure,
        metrics: vec![metric],
        invariants: vec![p1, p2, p3, p4],
        splits: vec![split],
        systems: vec![SystemSpec {
            id: "h4_flow".into(),
            metric: "standard".into(),
            hamiltonian: "P4".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: 1.0,
            zero_pattern: vec![0, 2],
            default_initial: vec![
                r(0, 1),
                r(1, 1),
                r(0, 1),
                r(1, 1),
                r(1, 1),
                r(1, 1),
                r(1, 1),
                r(1, 1),
            ],
            closed_form: Some(closed),
        }],
        lax: None,
    }
}

fn example_iii_rotation(
    x0: &DVector<f64>,
    omega_idx: usize,
    orientation: f64,
    t: f64,
) -> DVector<f64> {
    // Solves x1' = orientation·ω·x2, x2' = -orientation·ω·x1 with the
    // remaining coordinates constant.
    let w = orientation * x0[omega_idx];
    let (c, s) = ((w * t).cos(), (w * t).sin());
    let mut out = x0.clone();
    out[1] = x0[1] * c + x0[2] * s;
    out[2] = -x0[1] * s + x0[2] * c;
    out
}

/// Four-dimensional solvable oscillator algebra with four metrics
/// (orthonormal, ad-invariant, and two indefinite variants) and the four
/// rotation flows of the quadratic invariant.
pub fn example_iii() -> CatalogEntry {
    let dim = 4;
    // coordinates (e0, e1, e2, e3); [e3,e1]=e2, [e3,e2]=-e1, [e1,e2]=e0
    let structure = vec![
        (3, 1, 2, r(1, 1)),
        (3, 2, 1, r(-1, 1)),
        (1, 2, 0, r(1, 1)),
    ];
    let algebra = Arc::new(LieAlgebra::new("example_iii", dim, &structure).expect("valid table"));

    let metric_entries: Vec<(&str, Vec<(usize, usize, Rat)>)> = vec![
        (
            "orthonormal",
            (0..dim).map(|i| (i, i, r(1, 1))).collect(),
        ),
        (
            "ad_invariant",
            vec![(1, 1, r(1, 1)), (2, 2, r(1, 1)), (0, 3, r(1, 1))],
        ),
        (
            "indefinite_pairing",
            vec![(1, 1, r(1, 1)), (2, 2, r(1, 1)), (0, 3, r(-1, 1))],
        ),
        (
            "indefinite_spatial",
            vec![(1, 1, r(-1, 1)), (2, 2, r(1, 1)), (0, 3, r(1, 1))],
        ),
    ];
    let metrics: Vec<NamedMetric> = metric_entries
        .into_iter()
        .map(|(name, entries)| NamedMetric {
            name: name.into(),
            form: Arc::new(BilinearForm::from_entries(dim, &entries).expect("valid")),
            entries,
        })
        .collect();

    let p = ScalarField::polynomial_field(
        "P",
        Polynomial::from_terms(
            dim,
            &[
                (r(1, 2), &[0, 2, 0, 0]),
                (r(1, 2), &[0, 0, 2, 0]),
                (r(1, 1), &[1, 0, 0, 1]),
            ],
        ),
    );

    let splits: Vec<NamedSplit> = metrics
        .iter()
        .map(|m| build_split(&algebra, m, &[0, 1, 2], &[3]))
        .collect();

    // sis11 (orthonormal, frequency x0): x1' = x0 x2, x2' = -x0 x1
    let cf_sis11: ClosedForm = Arc::new(|x0, t| example_iii_rotation(x0, 0, 1.0, t));
    // sis22 (ad-invariant, frequency x3): x1' = -x3 x2, x2' = x3 x1
    let cf_sis22: ClosedForm = Arc::new(|x0, t| example_iii_rotation(x0, 3, -1.0, t));
    // indefinite-pairing variant: same orientation as sis11, frequency x3
    let cf_var1: ClosedForm = Arc::new(|x0, t| example_iii_rotation(x0, 3, 1.0, t));
    // indefinite-spatial variant: literally the sis22 equations
    let cf_var2: ClosedForm = Arc::new(|x0, t| example_iii_rotation(x0, 3, -1.0, t));

    let systems = vec![
        SystemSpec {
            id: "sis11".into(),
            metric: "orthonormal".into(),
            hamiltonian: "P".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: 1.0,
            zero_pattern: vec![3],
            default_initial: vec![r(1, 1), r(1, 1), r(0, 1), r(0, 1)],
            closed_form: Some(cf_sis11),
        },
        SystemSpec {
            id: "sis22".into(),
            metric: "ad_invariant".into(),
            hamiltonian: "P".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: -1.0,
            zero_pattern: vec![0],
            default_initial: vec![r(0, 1), r(1, 1), r(0, 1), r(1, 1)],
            closed_form: Some(cf_sis22),
        },
        SystemSpec {
            id: "sis11_variant".into(),
            metric: "indefinite_pairing".into(),
            hamiltonian: "P".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: -1.0,
            zero_pattern: vec![0],
            default_initial: vec![r(0, 1), r(1, 1), r(0, 1), r(1, 1)],
            closed_form: Some(cf_var1),
        },
        SystemSpec {
            id: "sis22_variant".into(),
            metric: "indefinite_spatial".into(),
            hamiltonian: "P".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: 1.0,
            zero_pattern: vec![0],
            default_initial: vec![r(0, 1), r(1, 1), r(0, 1), r(1, 1)],
            closed_form: Some(cf_var2),
        },
    ];

    let m_builder: MatrixBuilder = Arc::new(|x: &DVector<f64>| {
        let w = x[3];
        DMatrix::from_row_slice(3, 3, &[0.0, -w, 0.0, w, 0.0, 0.0, 0.0, 0.0, 0.0])
    });
    let l_builder: MatrixBuilder = Arc::new(|x: &DVector<f64>| {
        let w = x[3];
        DMatrix::from_row_slice(3, 3, &[0.0, -w, x[1], w, 0.0, x[2], 0.0, 0.0, 0.0])
    });

    CatalogEntry {
        id: "example_iii".into(),
        algebra,
        structure_entries: structure,
        metrics,
        invariants: vec![p],
        splits,
        systems,
        lax: Some(LaxPair {
            size: 3,
            m_builder,
            l_builder,
        }),
    }
}

/// The oscillator family on `2n+2` coordinates: center, `n` rotation planes
/// and the rotation generator, with its ad-invariant metric and the
/// `(2n+1)x(2n+1)` Lax realization of the sphere flow.
pub fn oscillator(n: usize) -> CatalogEntry {
    let dim = 2 * n + 2;
    let gen_idx = 2 * n + 1;
    // [X_{n+1}, X_i] = Y_i, [X_{n+1}, Y_i] = -X_i, [X_i, Y_i] = X_0
    let mut structure = Vec::new();
    for i in 0..n {
        let xi = 1 + 2 * i;
        let yi = 2 + 2 * i;
        structure.push((gen_idx, xi, yi, r(1, 1)));
        structure.push((gen_idx, yi, xi, r(-1, 1)));
        structure.push((xi, yi, 0, r(1, 1)));
    }
    let algebra = Arc::new(
        LieAlgebra::new(format!("oscillator_{n}"), dim, &structure).expect("valid table"),
    );

    let mut gram_entries: Vec<(usize, usize, Rat)> =
        (1..=2 * n).map(|i| (i, i, r(1, 1))).collect();
    gram_entries.push((0, gen_idx, r(1, 1)));
    let metric = NamedMetric {
        name: "ad_invariant".into(),
        form: Arc::new(BilinearForm::from_entries(dim, &gram_entries).expect("valid")),
        entries: gram_entries,
    };

    // q/2 = (1/2) Σ (x_i² + y_i²) + x_0 x_{n+1}
    let mut terms: Vec<(Rat, Vec<u32>)> = Vec::new();
    for i in 1..=2 * n {
        let mut e = vec![0u32; dim];
        e[i] = 2;
        terms.push((r(1, 2), e));
    }
    let mut e = vec![0u32; dim];
    e[0] = 1;
    e[gen_idx] = 1;
    terms.push((r(1, 1), e));
    let term_refs: Vec<(Rat, &[u32])> = terms.iter().map(|(c, e)| (c.clone(), e.as_slice())).collect();
    let p = ScalarField::polynomial_field("P", Polynomial::from_terms(dim, &term_refs));

    let plus: Vec<usize> = (0..=2 * n).collect();
    let split = build_split(&algebra, &metric, &plus, &[gen_idx]);

    let cf: ClosedForm = Arc::new(move |x0: &DVector<f64>, t: f64| {
        // x_i' = -ω y_i, y_i' = ω x_i with ω the generator coordinate
        let w = x0[2 * n + 1];
        let (c, s) = ((w * t).cos(), (w * t).sin());
        let mut out = x0.clone();
        for i in 0..n {
            let (xi, yi) = (x0[1 + 2 * i], x0[2 + 2 * i]);
            out[1 + 2 * i] = xi * c - yi * s;
            out[2 + 2 * i] = xi * s + yi * c;
        }
        out
    });

    let mut default_initial = vec![r(0, 1); dim];
    for i in 0..n {
        default_initial[1 + 2 * i] = r(1, 1);
    }
    default_initial[gen_idx] = r(1, 1);

    let size = 2 * n + 1;
    let m_builder: MatrixBuilder = Arc::new(move |x: &DVector<f64>| {
        let w = x[2 * n + 1];
        let mut m = DMatrix::zeros(size, size);
        for i in 0..n {
            m[(2 * i, 2 * i + 1)] = -w;
            m[(2 * i + 1, 2 * i)] = w;
        }
        m
    });
    let l_builder: MatrixBuilder = Arc::new(move |x: &DVector<f64>| {
        let w = x[2 * n + 1];
        let mut l = DMatrix::zeros(size, size);
        for i in 0..n {
            l[(2 * i, 2 * i + 1)] = -w;
            l[(2 * i + 1, 2 * i)] = w;
            l[(2 * i, size - 1)] = x[1 + 2 * i];
            l[(2 * i + 1, size - 1)] = x[2 + 2 * i];
        }
        l
    });

    CatalogEntry {
        id: format!("oscillator({n})"),
        algebra,
        structure_entries: structure,
        metrics: vec![metric],
        invariants: vec![p],
        splits: vec![split],
        systems: vec![SystemSpec {
            id: "sphere_flow".into(),
            metric: "ad_invariant".into(),
            hamiltonian: "P".into(),
            role: SplitRole::PlusActsOnMinusPerp,
            sign: -1.0,
            zero_pattern: vec![0],
            default_initial,
            closed_form: Some(cf),
        }],
        lax: Some(LaxPair {
            size,
            m_builder,
            l_builder,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_rejected() {
        assert!(matches!(entry("nope"), Err(Error::UnknownCatalogId(_))));
        assert!(matches!(entry("oscillator(0)"), Err(Error::UnknownCatalogId(_))));
    }

    #[test]
    fn all_entries_build() {
        for id in ["example_i", "example_ii", "example_iii", "oscillator(3)"] {
            let e = entry(id).unwrap();
            assert!(!e.systems.is_empty());
        }
    }

    #[test]
    fn closed_form_at_zero_is_initial() {
        let e = example_iii();
        let x0 = DVector::from_vec(vec![0.0, 1.0, 0.5, 2.0]);
        let v = e.closed_form("sis22", &x0, 0.0).unwrap();
        assert!((v - &x0).norm() < 1e-15);
    }

    #[test]
    fn pattern_violation_rejected() {
        let e = example_iii();
        let x0 = DVector::from_vec(vec![1.0, 1.0, 0.5, 2.0]);
        assert!(matches!(
            e.closed_form("sis22", &x0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn oscillator_one_matches_example_iii_table() {
        let osc = oscillator(1);
        let ex3 = example_iii();
        assert_eq!(osc.algebra.dim(), ex3.algebra.dim());
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(osc.algebra.constant(i, j, k), ex3.algebra.constant(i, j, k));
                }
            }
        }
    }

    #[test]
    fn lax_trace_zero() {
        let e = example_iii();
        let (_, l) = e
            .lax_matrices(&DVector::from_vec(vec![0.0, 2.0, -1.0, 3.0]))
            .unwrap();
        assert_eq!(l.trace(), 0.0);
    }
}
