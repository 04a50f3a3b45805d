//! Exact rational scalars and dense rational matrices.
//!
//! Structure constants, Gram matrices and split data are validated in exact
//! arithmetic, so identities like Jacobi or projector idempotence are
//! assertions rather than tolerance checks. Floating-point views are derived
//! on demand.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rat = BigRational;

/// Parse a rational from a string such as `"1"`, `"-3"` or `"-1/2"`.
pub fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Config(format!("invalid rational literal `{s}`")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Config(format!("invalid rational literal `{s}`")))?;
    if d.is_zero() {
        return Err(Error::Config(format!("zero denominator in `{s}`")));
    }
    Ok(Rat::new(n, d))
}

/// Render a rational in the canonical `p` / `p/q` form used by config files.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_from_i64(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Dense matrix over the rationals, column-major indexing by `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    nrows: usize,
    ncols: usize,
    data: Vec<Rat>, // row-major
}

impl RatMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        RatMat {
            nrows,
            ncols,
            data: vec![Rat::zero(); nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut m = Self::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from a list of columns.
    pub fn from_columns(nrows: usize, cols: &[Vec<Rat>]) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows);
            for i in 0..nrows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.nrows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Rat>> {
        (0..self.ncols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> RatMat {
        Self::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.ncols, rhs.nrows);
        let mut out = Self::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..rhs.ncols {
                    let p = &self[(i, k)] * &rhs[(k, j)];
                    out[(i, j)] += p;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.ncols, v.len());
        (0..self.nrows)
            .map(|i| {
                (0..self.ncols)
                    .map(|j| &self[(i, j)] * &v[j])
                    .fold(Rat::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn add(&self, rhs: &RatMat) -> RatMat {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self::from_fn(self.nrows, self.ncols, |i, j| &self[(i, j)] + &rhs[(i, j)])
    }

    pub fn sub(&self, rhs: &RatMat) -> RatMat {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        Self::from_fn(self.nrows, self.ncols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }

    pub fn scale(&self, s: &Rat) -> RatMat {
        Self::from_fn(self.nrows, self.ncols, |i, j| &self[(i, j)] * s)
    }

    pub fn neg(&self) -> RatMat {
        Self::from_fn(self.nrows, self.ncols, |i, j| -self[(i, j)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn max_abs(&self) -> Rat {
        self.data
            .iter()
            .map(Rat::abs)
            .max()
            .unwrap_or_else(Rat::zero)
    }

    pub fn hstack(&self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.nrows, rhs.nrows);
        Self::from_fn(self.nrows, self.ncols + rhs.ncols, |i, j| {
            if j < self.ncols {
                self[(i, j)].clone()
            } else {
                rhs[(i, j - self.ncols)].clone()
            }
        })
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.nrows, self.ncols, |i, j| rat_to_f64(&self[(i, j)]))
    }

    /// Reduced row echelon form together with the pivot column indices.
    pub fn rref(&self) -> (RatMat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.ncols {
            if row >= m.nrows {
                break;
            }
            // exact arithmetic: any nonzero pivot works
            let Some(p) = (row..m.nrows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m[(row, col)].recip();
            for j in col..m.ncols {
                let v = &m[(row, j)] * &inv;
                m[(row, j)] = v;
            }
            for r in 0..m.nrows {
                if r != row && !m[(r, col)].is_zero() {
                    let factor = m[(r, col)].clone();
                    for j in col..m.ncols {
                        let v = &m[(r, j)] - &(&factor * &m[(row, j)]);
                        m[(r, j)] = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical basis of the null space `{x : Mx = 0}`, as matrix columns.
    pub fn nullspace(&self) -> RatMat {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.ncols).filter(|c| !pivots.contains(c)).collect();
        let mut cols = Vec::new();
        for &f in &free {
            let mut v = vec![Rat::zero(); self.ncols];
            v[f] = Rat::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -r[(prow, f)].clone();
            }
            cols.push(v);
        }
        RatMat::from_columns(self.ncols, &cols)
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.nrows, self.ncols);
        let mut m = self.clone();
        let n = m.nrows;
        let mut det = Rat::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !m[(r, col)].is_zero()) else {
                return Rat::zero();
            };
            if p != col {
                m.swap_rows(col, p);
                det = -det;
            }
            det *= m[(col, col)].clone();
            let inv = m[(col, col)].recip();
            for r in col + 1..n {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for j in col..n {
                    let v = &m[(r, j)] - &(&factor * &m[(col, j)]);
                    m[(r, j)] = v;
                }
            }
        }
        det
    }

    /// Solve `self * X = rhs` for square non-singular `self`.
    pub fn solve(&self, rhs: &RatMat) -> Result<RatMat, Error> {
        assert_eq!(self.nrows, self.ncols);
        assert_eq!(self.nrows, rhs.nrows);
        let aug = self.hstack(rhs);
        let (r, pivots) = aug.rref();
        if pivots.len() < self.nrows || pivots.iter().any(|&p| p >= self.ncols) {
            return Err(Error::Singular("rational solve"));
        }
        Ok(RatMat::from_fn(self.nrows, rhs.ncols, |i, j| {
            r[(i, self.ncols + j)].clone()
        }))
    }

    pub fn inverse(&self) -> Result<RatMat, Error> {
        self.solve(&RatMat::identity(self.nrows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.ncols {
            let ai = a * self.ncols + j;
            let bi = b * self.ncols + j;
            self.data.swap(ai, bi);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.ncols + j]
    }
}

/// A linear subspace given by a column-span, kept in a canonical form so
/// subspace equality is decidable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    /// Canonical basis: columns of the RREF of the row space, transposed back.
    basis: RatMat,
}

impl Subspace {
    pub fn from_span(ambient_dim: usize, columns: &[Vec<Rat>]) -> Self {
        let m = RatMat::from_columns(ambient_dim, columns);
        Self::from_matrix(&m)
    }

    pub fn from_matrix(columns: &RatMat) -> Self {
        let (r, pivots) = columns.transpose().rref();
        let cols: Vec<Vec<Rat>> = (0..pivots.len())
            .map(|i| (0..columns.nrows()).map(|j| r[(i, j)].clone()).collect())
            .collect();
        Subspace {
            ambient_dim: columns.nrows(),
            basis: RatMat::from_columns(columns.nrows(), &cols),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Canonical basis matrix (columns span the subspace).
    pub fn basis(&self) -> &RatMat {
        &self.basis
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        let mut aug = self.basis.clone();
        aug = aug.hstack(&RatMat::from_columns(self.ambient_dim, &[v.to_vec()]));
        aug.rank() == self.dim()
    }

    /// Exact membership coordinates: solve `basis * c = v` if consistent.
    pub fn coordinates(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        let aug = self
            .basis
            .hstack(&RatMat::from_columns(self.ambient_dim, &[v.to_vec()]));
        let (r, pivots) = aug.rref();
        if pivots.iter().any(|&p| p == self.basis.ncols()) {
            return None;
        }
        let mut c = vec![Rat::zero(); self.basis.ncols()];
        for (row, &p) in pivots.iter().enumerate() {
            c[p] = r[(row, self.basis.ncols())].clone();
        }
        Some(c)
    }
}

pub fn rat_vec_to_f64(v: &[Rat]) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(v.len(), v.iter().map(rat_to_f64))
}
