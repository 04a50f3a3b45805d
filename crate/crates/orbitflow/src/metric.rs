//! Non-degenerate symmetric bilinear forms on a Lie algebra, the transpose
//! operator `ad^t`, metric gradients of scalar fields, and ad-invariance
//! testing.
//!
//! Indefinite forms are first class: only `det G != 0` is required.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num::{Signed, Zero};

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::rat::{rat_to_f64, Rat, RatMat};

/// Default step for central finite differences.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A symmetric non-degenerate bilinear form given by its Gram matrix.
#[derive(Clone, Debug)]
pub struct BilinearForm {
    gram: RatMat,
    gram_f64: DMatrix<f64>,
    gram_inv: RatMat,
    gram_inv_f64: DMatrix<f64>,
}

impl BilinearForm {
    pub fn new(gram: RatMat) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::Structure("Gram matrix must be square".into()));
        }
        if gram != gram.transpose() {
            return Err(Error::Structure("Gram matrix must be symmetric".into()));
        }
        if gram.det().is_zero() {
            return Err(Error::DegeneratePairing(
                "Gram matrix is singular".into(),
            ));
        }
        let gram_inv = gram.inverse()?;
        Ok(BilinearForm {
            gram_f64: gram.to_f64(),
            gram_inv_f64: gram_inv.to_f64(),
            gram,
            gram_inv,
        })
    }

    /// Orthonormal form on `dim` coordinates (identity Gram matrix).
    pub fn orthonormal(dim: usize) -> Self {
        Self::new(RatMat::identity(dim)).expect("identity Gram matrix")
    }

    /// Build from symmetric `(i, j, value)` entries, 0-based; symmetric
    /// closure is applied, unlisted entries are zero.
    pub fn from_entries(dim: usize, entries: &[(usize, usize, Rat)]) -> Result<Self> {
        let mut gram = RatMat::zeros(dim, dim);
        for &(i, j, ref v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::Structure(format!(
                    "metric index out of range in ({i}, {j})"
                )));
            }
            for (a, b) in [(i, j), (j, i)] {
                if !gram[(a, b)].is_zero() && gram[(a, b)] != *v {
                    return Err(Error::Structure(format!(
                        "conflicting metric entries at ({a}, {b})"
                    )));
                }
                gram[(a, b)] = v.clone();
            }
        }
        Self::new(gram)
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &RatMat {
        &self.gram
    }

    pub fn gram_f64(&self) -> &DMatrix<f64> {
        &self.gram_f64
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    /// `<X, Y> = X^T G Y`.
    pub fn pair(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<f64> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        Ok((x.transpose() * &self.gram_f64 * y)[(0, 0)])
    }

    pub fn pair_rat(&self, x: &[Rat], y: &[Rat]) -> Result<Rat> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        let gy = self.gram.mul_vec(y);
        Ok(x.iter()
            .zip(&gy)
            .map(|(a, b)| a * b)
            .fold(Rat::zero(), |a, b| a + b))
    }

    /// Covector of `X`: the functional `Y -> <X, Y>` in the dual basis.
    pub fn flat(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        Ok(&self.gram_f64 * x)
    }

    /// Inverse of `flat`.
    pub fn sharp(&self, phi: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(phi.len())?;
        Ok(&self.gram_inv_f64 * phi)
    }

    /// The unique matrix `T` with `<T Y, Z> = <Y, [X, Z]>` for all `Y, Z`,
    /// i.e. `T = G^-1 (ad_X)^T G`.
    pub fn ad_transpose_matrix(&self, algebra: &LieAlgebra, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        let ad = algebra.ad_matrix(x)?;
        Ok(&self.gram_inv_f64 * ad.transpose() * &self.gram_f64)
    }

    pub fn ad_transpose_matrix_rat(&self, algebra: &LieAlgebra, x: &[Rat]) -> Result<RatMat> {
        let ad = algebra.ad_matrix_rat(x)?;
        Ok(self.gram_inv.mul(&ad.transpose()).mul(&self.gram))
    }

    /// `ad^t_X Y`.
    pub fn ad_transpose(
        &self,
        algebra: &LieAlgebra,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        Ok(self.ad_transpose_matrix(algebra, x)? * y)
    }

    pub fn ad_transpose_rat(&self, algebra: &LieAlgebra, x: &[Rat], y: &[Rat]) -> Result<Vec<Rat>> {
        Ok(self.ad_transpose_matrix_rat(algebra, x)?.mul_vec(y))
    }

    /// Metric gradient: the unique vector with `<grad f(U), Y> = df_U(Y)`.
    pub fn gradient(&self, field: &ScalarField, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(u.len())?;
        let df = field.differential(u)?;
        Ok(&self.gram_inv_f64 * df)
    }

    /// Exact gradient for fields with a polynomial representation.
    pub fn gradient_rat(&self, field: &ScalarField, u: &[Rat]) -> Result<Vec<Rat>> {
        self.check_dim(u.len())?;
        let poly = field
            .polynomial()
            .ok_or_else(|| Error::Unsupported("exact gradient needs a polynomial field".into()))?;
        let df = poly.differential_rat(u)?;
        Ok(self.gram_inv.mul_vec(&df))
    }

    /// Max over basis triples of `|<[e_i, e_j], e_k> + <e_j, [e_i, e_k]>|`;
    /// zero iff the form is ad-invariant. Exact.
    pub fn ad_invariance_residual(&self, algebra: &LieAlgebra) -> Rat {
        let basis = algebra.basis_rat();
        let mut max = Rat::zero();
        for i in 0..algebra.dim() {
            for j in 0..algebra.dim() {
                for k in 0..algebra.dim() {
                    let bij = algebra.bracket_rat(&basis[i], &basis[j]).unwrap();
                    let bik = algebra.bracket_rat(&basis[i], &basis[k]).unwrap();
                    let r = (self.pair_rat(&bij, &basis[k]).unwrap()
                        + self.pair_rat(&basis[j], &bik).unwrap())
                    .abs();
                    if r > max {
                        max = r;
                    }
                }
            }
        }
        max
    }

    pub fn is_ad_invariant(&self, algebra: &LieAlgebra) -> bool {
        self.ad_invariance_residual(algebra).is_zero()
    }
}

/// A monomial term: rational coefficient times a product of powers of the
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coefficient: Rat,
    pub exponents: Vec<u32>,
}

/// Polynomial on the algebra in basis coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Result<Self> {
        for t in &terms {
            if t.exponents.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: t.exponents.len(),
                });
            }
        }
        Ok(Polynomial { dim, terms })
    }

    /// Convenience constructor from `(coefficient, exponents)` pairs with
    /// small integer coefficients.
    pub fn from_terms(dim: usize, terms: &[(Rat, &[u32])]) -> Self {
        Self::new(
            dim,
            terms
                .iter()
                .map(|(c, e)| Monomial {
                    coefficient: c.clone(),
                    exponents: e.to_vec(),
                })
                .collect(),
        )
        .expect("consistent term dimensions")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                rat_to_f64(&t.coefficient)
                    * t.exponents
                        .iter()
                        .enumerate()
                        .map(|(i, &e)| x[i].powi(e as i32))
                        .product::<f64>()
            })
            .sum()
    }

    pub fn eval_rat(&self, x: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for t in &self.terms {
            let mut m = t.coefficient.clone();
            for (i, &e) in t.exponents.iter().enumerate() {
                for _ in 0..e {
                    m *= &x[i];
                }
            }
            acc += m;
        }
        acc
    }

    /// Partial derivative as a polynomial.
    pub fn partial(&self, coord: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.exponents[coord] > 0)
            .map(|t| {
                let mut e = t.exponents.clone();
                let k = e[coord];
                e[coord] -= 1;
                Monomial {
                    coefficient: &t.coefficient * Rat::from_integer(k.into()),
                    exponents: e,
                }
            })
            .collect();
        Polynomial {
            dim: self.dim,
            terms,
        }
    }

    pub fn differential(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim, (0..self.dim).map(|i| self.partial(i).eval(x)))
    }

    pub fn differential_rat(&self, x: &[Rat]) -> Result<Vec<Rat>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((0..self.dim).map(|i| self.partial(i).eval_rat(x)).collect())
    }
}

type EvalFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

/// A scalar function on the algebra with an analytic or numeric gradient.
#[derive(Clone)]
pub struct ScalarField {
    name: String,
    dim: usize,
    polynomial: Option<Polynomial>,
    evaluator: Option<EvalFn>,
    analytic_differential: Option<GradFn>,
    fd_step: f64,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("polynomial", &self.polynomial.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn polynomial_field(name: impl Into<String>, poly: Polynomial) -> Self {
        ScalarField {
            name: name.into(),
            dim: poly.dim(),
            polynomial: Some(poly),
            evaluator: None,
            analytic_differential: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// Field from a closure; the gradient falls back to central finite
    /// differences with step `fd_step` unless an analytic differential is
    /// attached via [`ScalarField::with_differential`].
    pub fn numeric_field(
        name: impl Into<String>,
        dim: usize,
        f: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            name: name.into(),
            dim,
            polynomial: None,
            evaluator: Some(Arc::new(f)),
            analytic_differential: None,
            fd_step: DEFAULT_FD_STEP,
        }
    }

    /// The linear field `V -> <Q, V>`.
    pub fn linear_pairing(name: impl Into<String>, metric: &BilinearForm, q: &DVector<f64>) -> Self {
        let phi = metric.flat(q).expect("dimension-checked");
        let phi2 = phi.clone();
        let dim = q.len();
        ScalarField {
            name: name.into(),
            dim,
            polynomial: None,
            evaluator: Some(Arc::new(move |v: &DVector<f64>| phi.dot(v))),
            analytic_differential: Some(Arc::new(move |_v: &DVector<f64>| phi2.clone())),
            fd_step: DEFAULT_FD_STEP,
        }
    }

    pub fn with_differential(
        mut self,
        g: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.analytic_differential = Some(Arc::new(g));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        assert!(h > 0.0, "finite-difference step must be positive");
        self.fd_step = h;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn polynomial(&self) -> Option<&Polynomial> {
        self.polynomial.as_ref()
    }

    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let v = match (&self.polynomial, &self.evaluator) {
            (Some(p), _) => p.eval(x),
            (None, Some(f)) => f(x),
            (None, None) => unreachable!("field without evaluator"),
        };
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("{}(x)", self.name)));
        }
        Ok(v)
    }

    /// Covector of directional derivatives at `u` (analytic when available,
    /// otherwise central differences).
    pub fn differential(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        if let Some(p) = &self.polynomial {
            return Ok(p.differential(u));
        }
        if let Some(g) = &self.analytic_differential {
            return Ok(g(u));
        }
        let h = self.fd_step;
        let mut df = DVector::zeros(self.dim);
        let mut x = u.clone();
        for i in 0..self.dim {
            x[i] = u[i] + h;
            let fp = self.eval(&x)?;
            x[i] = u[i] - h;
            let fm = self.eval(&x)?;
            x[i] = u[i];
            df[i] = (fp - fm) / (2.0 * h);
        }
        Ok(df)
    }
}
