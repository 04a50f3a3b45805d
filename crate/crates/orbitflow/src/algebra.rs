//! Finite-dimensional real Lie algebras given by structure constants.
//!
//! An algebra is defined by its dimension and the table `c[i][j][k]` with
//! `[e_i, e_j] = sum_k c[i][j][k] e_k`. Constants are stored as exact
//! rationals; antisymmetry and the Jacobi identity are validated exactly at
//! construction. Values are immutable afterwards.

use nalgebra::{DMatrix, DVector};
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rat::{rat_to_f64, Rat, RatMat, Subspace};

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    /// Flattened `c[i][j][k]` at index `(i * dim + j) * dim + k`.
    constants: Vec<Rat>,
    constants_f64: Vec<f64>,
}

impl LieAlgebra {
    /// Build and validate an algebra from `(i, j, k, value)` entries
    /// (0-based). Antisymmetric closure is applied: specifying `[i,j]`
    /// implies `[j,i]`. Conflicting duplicate entries are rejected.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        entries: &[(usize, usize, usize, Rat)],
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Structure("dimension must be at least 1".into()));
        }
        let mut constants = vec![Rat::zero(); dim * dim * dim];
        let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
        for &(i, j, k, ref v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Structure(format!(
                    "index out of range in entry ({i}, {j}, {k})"
                )));
            }
            if i == j && !v.is_zero() {
                return Err(Error::Structure(format!(
                    "nonzero [e{i}, e{i}] violates antisymmetry"
                )));
            }
            for (a, b, val) in [(i, j, v.clone()), (j, i, -v.clone())] {
                let slot = &mut constants[idx(a, b, k)];
                if !slot.is_zero() && *slot != val {
                    return Err(Error::Structure(format!(
                        "conflicting entries for c[{a}][{b}][{k}]"
                    )));
                }
                *slot = val;
            }
        }
        let constants_f64 = constants.iter().map(rat_to_f64).collect();
        let alg = LieAlgebra {
            name: name.into(),
            dim,
            constants,
            constants_f64,
        };
        alg.check_jacobi()?;
        Ok(alg)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self, i: usize, j: usize, k: usize) -> &Rat {
        &self.constants[(i * self.dim + j) * self.dim + k]
    }

    fn constant_f64(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants_f64[(i * self.dim + j) * self.dim + k]
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            });
        }
        Ok(())
    }

    /// `[X, Y]` for floating-point coordinate vectors.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        let mut out = DVector::zeros(self.dim);
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                if y[j] == 0.0 {
                    continue;
                }
                for k in 0..self.dim {
                    out[k] += x[i] * y[j] * self.constant_f64(i, j, k);
                }
            }
        }
        Ok(out)
    }

    /// `[X, Y]` in exact arithmetic.
    pub fn bracket_rat(&self, x: &[Rat], y: &[Rat]) -> Result<Vec<Rat>> {
        self.check_dim(x.len())?;
        self.check_dim(y.len())?;
        let mut out = vec![Rat::zero(); self.dim];
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if y[j].is_zero() {
                    continue;
                }
                let p = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        *o += &p * c;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad_X : Y -> [X, Y]` in the given basis.
    pub fn ad_matrix(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_dim(x.len())?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..self.dim {
                for k in 0..self.dim {
                    m[(k, j)] += x[i] * self.constant_f64(i, j, k);
                }
            }
        }
        Ok(m)
    }

    pub fn ad_matrix_rat(&self, x: &[Rat]) -> Result<RatMat> {
        self.check_dim(x.len())?;
        let mut m = RatMat::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        m[(k, j)] += &x[i] * c;
                    }
                }
            }
        }
        Ok(m)
    }

    fn check_jacobi(&self) -> Result<()> {
        let basis = self.basis_rat();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for l in j + 1..self.dim {
                    let mut s = self.bracket_rat(&self.bracket_rat(&basis[i], &basis[j])?, &basis[l])?;
                    let t = self.bracket_rat(&self.bracket_rat(&basis[j], &basis[l])?, &basis[i])?;
                    let u = self.bracket_rat(&self.bracket_rat(&basis[l], &basis[i])?, &basis[j])?;
                    for k in 0..self.dim {
                        s[k] += &t[k] + &u[k];
                        if !s[k].is_zero() {
                            return Err(Error::Jacobi { i, j, k: l });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Max absolute Jacobi defect over all basis triples. Zero iff the
    /// structure constants define a Lie algebra.
    pub fn jacobi_residual(&self) -> Rat {
        let basis = self.basis_rat();
        let mut max = Rat::zero();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for l in j + 1..self.dim {
                    let a = self
                        .bracket_rat(&self.bracket_rat(&basis[i], &basis[j]).unwrap(), &basis[l])
                        .unwrap();
                    let b = self
                        .bracket_rat(&self.bracket_rat(&basis[j], &basis[l]).unwrap(), &basis[i])
                        .unwrap();
                    let c = self
                        .bracket_rat(&self.bracket_rat(&basis[l], &basis[i]).unwrap(), &basis[j])
                        .unwrap();
                    for k in 0..self.dim {
                        let d = (&a[k] + &b[k] + &c[k]).abs();
                        if d > max {
                            max = d;
                        }
                    }
                }
            }
        }
        max
    }

    /// Max absolute antisymmetry defect `|c[i][j][k] + c[j][i][k]|`.
    pub fn antisymmetry_residual(&self) -> Rat {
        let mut max = Rat::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let d = (self.constant(i, j, k) + self.constant(j, i, k)).abs();
                    if d > max {
                        max = d;
                    }
                }
            }
        }
        max
    }

    pub fn basis_rat(&self) -> Vec<Vec<Rat>> {
        (0..self.dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); self.dim];
                v[i] = Rat::from_integer(1.into());
                v
            })
            .collect()
    }

    pub fn basis_f64(&self) -> Vec<DVector<f64>> {
        (0..self.dim)
            .map(|i| {
                let mut v = DVector::zeros(self.dim);
                v[i] = 1.0;
                v
            })
            .collect()
    }

    /// Span of all brackets `[A, B]` with columns of `a` and `b`.
    fn bracket_span(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let mut cols = Vec::new();
        for x in a.basis().columns() {
            for y in b.basis().columns() {
                let v = self.bracket_rat(&x, &y).unwrap();
                if v.iter().any(|r| !r.is_zero()) {
                    cols.push(v);
                }
            }
        }
        Subspace::from_span(self.dim, &cols)
    }

    fn full_space(&self) -> Subspace {
        Subspace::from_span(self.dim, &self.basis_rat())
    }

    /// Lower central series `g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ …` until it stabilizes.
    pub fn lower_central_series(&self) -> Vec<Subspace> {
        let g = self.full_space();
        let mut series = vec![g.clone()];
        loop {
            let next = self.bracket_span(&g, series.last().unwrap());
            if &next == series.last().unwrap() {
                break;
            }
            series.push(next);
            if series.last().unwrap().dim() == 0 {
                break;
            }
        }
        series
    }

    /// `Some(k)` iff the algebra is k-step nilpotent.
    pub fn nilpotency_step(&self) -> Option<usize> {
        let series = self.lower_central_series();
        if series.last().unwrap().dim() == 0 {
            Some(series.len() - 1)
        } else {
            None
        }
    }

    /// Derived series `g ⊇ [g,g] ⊇ [[g,g],[g,g]] ⊇ …` until it stabilizes.
    pub fn derived_series(&self) -> Vec<Subspace> {
        let mut series = vec![self.full_space()];
        loop {
            let last = series.last().unwrap();
            let next = self.bracket_span(last, last);
            if &next == last {
                break;
            }
            series.push(next);
            if series.last().unwrap().dim() == 0 {
                break;
            }
        }
        series
    }

    pub fn is_solvable(&self) -> bool {
        self.derived_series().last().unwrap().dim() == 0
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_step().is_some()
    }

    /// All nonzero structure entries `(i, j, k, value)` with `i < j`.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Rat)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let c = self.constant(i, j, k);
                    if !c.is_zero() {
                        out.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_from_i64;

    fn one() -> Rat {
        rat_from_i64(1, 1)
    }

    /// Heisenberg algebra: [e0, e1] = e2.
    fn heisenberg() -> LieAlgebra {
        LieAlgebra::new("heis", 3, &[(0, 1, 2, one())]).unwrap()
    }

    #[test]
    fn bracket_basics() {
        let h = heisenberg();
        let e0 = &h.basis_f64()[0];
        let e1 = &h.basis_f64()[1];
        let b = h.bracket(e0, e1).unwrap();
        assert_eq!(b[2], 1.0);
        // [X, X] = 0
        let x = DVector::from_vec(vec![1.0, 2.0, -3.0]);
        assert_eq!(h.bracket(&x, &x).unwrap().norm(), 0.0);
        // antisymmetry applied by closure
        assert_eq!(h.bracket(e1, e0).unwrap()[2], -1.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let h = heisenberg();
        let x = DVector::from_vec(vec![1.0, 0.0]);
        assert!(matches!(
            h.bracket(&x, &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn jacobi_violation_rejected() {
        // [e0,e1]=e2, [e0,e2]=e3 is the filiform table; adding [e1,e2]=e1
        // breaks Jacobi on (e0, e1, e2):
        // [[e0,e1],e2] + [[e1,e2],e0] + [[e2,e0],e1] = 0 - e2 + 0.
        let bad = LieAlgebra::new(
            "bad",
            4,
            &[(0, 1, 2, one()), (0, 2, 3, one()), (1, 2, 1, one())],
        );
        assert!(matches!(bad, Err(Error::Jacobi { .. })));
    }

    #[test]
    fn ad_is_zero_for_zero() {
        let h = heisenberg();
        let z = DVector::zeros(3);
        assert_eq!(h.ad_matrix(&z).unwrap().norm(), 0.0);
    }

    #[test]
    fn heisenberg_is_two_step() {
        assert_eq!(heisenberg().nilpotency_step(), Some(2));
    }

    #[test]
    fn abelian_series() {
        let a = LieAlgebra::new("abelian", 2, &[]).unwrap();
        assert_eq!(a.nilpotency_step(), Some(1));
        assert!(a.is_solvable());
    }
}
