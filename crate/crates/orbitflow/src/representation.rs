//! The transadjoint action, its orbits, tangent spaces, isotropy algebras,
//! the orbit symplectic form and the Poisson bracket.
//!
//! `τ(exp X) = exp(-ad^t_X)`; for nilpotent operators the exponential series
//! is a finite sum and is evaluated exactly.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::metric::{BilinearForm, ScalarField};
use crate::rat::{Rat, RatMat};
use crate::splitting::{SplitDecomposition, SplitRole};

/// Relative rank tolerance for orbit dimensions.
pub const RANK_TOL: f64 = 1e-9;

/// Matrix exponential by scaling and squaring with a Taylor series tail.
/// Small dense matrices only; the tail is summed to machine precision.
pub fn matrix_exp(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let norm = m.iter().map(|v| v.abs()).fold(0.0_f64, f64::max) * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..60 {
        term = (&term * &scaled) / k as f64;
        sum += &term;
        if term.iter().map(|v| v.abs()).fold(0.0_f64, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Exact exponential of a nilpotent rational matrix; `None` if the matrix is
/// not nilpotent within `dim` powers.
pub fn nilpotent_exp_rat(m: &RatMat) -> Option<RatMat> {
    let n = m.nrows();
    let mut sum = RatMat::identity(n);
    let mut term = RatMat::identity(n);
    let mut factorial = Rat::from_integer(1.into());
    for k in 1..=n {
        term = term.mul(m);
        if term.is_zero() {
            return Some(sum);
        }
        factorial *= Rat::from_integer(k.into());
        sum = sum.add(&term.scale(&factorial.recip()));
    }
    None
}

/// The matrix of `τ(exp X) = exp(-ad^t_X)`.
///
/// Nilpotent `ad^t_X` is detected exactly and summed as a finite series;
/// otherwise scaling-and-squaring is used.
pub fn tau_exp(algebra: &LieAlgebra, metric: &BilinearForm, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let adt = metric.ad_transpose_matrix(algebra, x)?;
    Ok(matrix_exp(&(-adt)))
}

/// Exact `τ(exp X)` for rational `X` when `ad^t_X` is nilpotent.
pub fn tau_exp_rat(algebra: &LieAlgebra, metric: &BilinearForm, x: &[Rat]) -> Result<Option<RatMat>> {
    let adt = metric.ad_transpose_matrix_rat(algebra, x)?;
    Ok(nilpotent_exp_rat(&adt.neg()))
}

/// Norm of `ad^t_{∇f(U)} U`; zero for τ-invariant `f`.
pub fn tau_invariance_residual(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    field: &ScalarField,
    u: &DVector<f64>,
) -> Result<f64> {
    let grad = metric.gradient(field, u)?;
    Ok(metric.ad_transpose(algebra, &grad, u)?.norm())
}

/// Second invariance mode: max of `|f(τ(exp tY) U) - f(U)|` over random
/// directions `Y` and small parameters `t`.
pub fn tau_invariance_flow_residual(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    field: &ScalarField,
    u: &DVector<f64>,
    directions: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let f0 = field.eval(u)?;
    let mut max = 0.0_f64;
    for _ in 0..directions {
        let y = DVector::from_fn(algebra.dim(), |_, _| rng.gen_range(-1.0..1.0));
        for t in [0.05, -0.1, 0.2] {
            let moved = tau_exp(algebra, metric, &(y.clone() * t))? * u;
            max = max.max((field.eval(&moved)? - f0).abs());
        }
    }
    Ok(max)
}

/// A point of a transadjoint orbit with its tangent data.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    pub base: DVector<f64>,
    /// Columns span the tangent space `T_U(orbit)`.
    pub tangent_basis: DMatrix<f64>,
    /// Numerical rank of the tangent basis at [`RANK_TOL`].
    pub dim: usize,
}

pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Tangent space of the orbit through `U`.
///
/// Full mode: columns are `-ad^t_{e_i} U` over the whole basis. Split mode:
/// generators range over the acting subalgebra and the result is projected
/// onto the acted perp; `U` must lie in that perp.
pub fn orbit_tangent(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    u: &DVector<f64>,
    split: Option<(&SplitDecomposition, SplitRole)>,
) -> Result<OrbitPoint> {
    let cols: Vec<DVector<f64>> = match split {
        None => algebra
            .basis_f64()
            .iter()
            .map(|b| metric.ad_transpose(algebra, b, u).map(|v| -v))
            .collect::<Result<_>>()?,
        Some((s, role)) => {
            if SplitDecomposition::membership_residual(s.acted_perp(role), u) > RANK_TOL {
                return Err(Error::Domain(
                    "orbit point does not lie in the acted perp".into(),
                ));
            }
            let b = s.acting(role).basis().to_f64();
            (0..b.ncols())
                .map(|j| {
                    let gen: DVector<f64> = b.column(j).into_owned();
                    metric
                        .ad_transpose(algebra, &gen, u)
                        .map(|v| s.project_acted_perp(role, &(-v)))
                })
                .collect::<Result<_>>()?
        }
    };
    let tangent_basis = DMatrix::from_columns(&cols);
    let dim = numerical_rank(&tangent_basis, RANK_TOL);
    Ok(OrbitPoint {
        base: u.clone(),
        tangent_basis,
        dim,
    })
}

/// Basis of the isotropy algebra `{Y : ad^t_Y U = 0}` (exact).
pub fn isotropy_algebra_rat(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    u: &[Rat],
) -> Result<RatMat> {
    // matrix K with K e_i = ad^t_{e_i} U
    let basis = algebra.basis_rat();
    let cols: Vec<Vec<Rat>> = basis
        .iter()
        .map(|b| metric.ad_transpose_rat(algebra, b, u))
        .collect::<Result<_>>()?;
    Ok(RatMat::from_columns(algebra.dim(), &cols).nullspace())
}

/// Floating-point isotropy basis via SVD null space.
pub fn isotropy_algebra(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    u: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let cols: Vec<DVector<f64>> = algebra
        .basis_f64()
        .iter()
        .map(|b| metric.ad_transpose(algebra, b, u))
        .collect::<Result<_>>()?;
    let k = DMatrix::from_columns(&cols);
    let svd = k.clone().svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let v_t = svd.v_t.expect("requested");
    let null_cols: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= RANK_TOL * smax.max(1e-300))
        .chain(svd.singular_values.len()..v_t.nrows())
        .map(|i| v_t.row(i).transpose())
        .collect();
    if null_cols.is_empty() {
        return Ok(DMatrix::zeros(algebra.dim(), 0));
    }
    Ok(DMatrix::from_columns(&null_cols))
}

/// The orbit symplectic form `ω_U(Ỹ, Z̃) = <U, [Y, Z]>`.
pub fn symplectic_form(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    u: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> Result<f64> {
    metric.pair(u, &algebra.bracket(y, z)?)
}

/// Poisson bracket `{f, g}(U)`.
///
/// Full mode evaluates `<U, [∇f(U), ∇g(U)]>`; split mode uses the `g-`
/// gradient components, `<U, [∇f-(U), ∇g-(U)]>`.
pub fn poisson_bracket(
    algebra: &LieAlgebra,
    metric: &BilinearForm,
    f: &ScalarField,
    g: &ScalarField,
    u: &DVector<f64>,
    split: Option<&SplitDecomposition>,
) -> Result<f64> {
    let gf = metric.gradient(f, u)?;
    let gg = metric.gradient(g, u)?;
    let (gf, gg) = match split {
        None => (gf, gg),
        Some(s) => (s.decompose(&gf).1, s.decompose(&gg).1),
    };
    metric.pair(u, &algebra.bracket(&gf, &gg)?)
}
