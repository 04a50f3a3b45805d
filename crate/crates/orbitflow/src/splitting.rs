//! Double Lie algebra decompositions `g = g+ ⊕ g-` with perpendicular
//! complements `g = g+^⊥ ⊕ g-^⊥` and the projections between them.
//!
//! All structural data is validated and stored exactly; floating views are
//! derived for the integrators.

use nalgebra::{DMatrix, DVector};
use num::Zero;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::metric::{BilinearForm, ScalarField};
use crate::rat::{Rat, RatMat, Subspace};

/// Which factor group acts, and therefore which perp carries the orbits.
///
/// The standard setting has `G-` acting on `g+^⊥`; swapping the roles of the
/// two subalgebras gives the action of `G+` on `g-^⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitRole {
    MinusActsOnPlusPerp,
    PlusActsOnMinusPerp,
}

#[derive(Clone, Debug)]
pub struct SplitDecomposition {
    plus: Subspace,
    minus: Subspace,
    plus_perp: Subspace,
    minus_perp: Subspace,
    /// Projects onto `g+^⊥` along `g-^⊥`.
    projector_plus_perp: RatMat,
    projector_plus_perp_f64: DMatrix<f64>,
    /// Projects onto `g-^⊥` along `g+^⊥`.
    projector_minus_perp: RatMat,
    projector_minus_perp_f64: DMatrix<f64>,
    /// Basis change `[B+ | B-]^-1`, used to split gradients.
    sum_basis_inv: RatMat,
    sum_basis_inv_f64: DMatrix<f64>,
    plus_dim: usize,
}

fn check_subalgebra(
    algebra: &LieAlgebra,
    space: &Subspace,
    which: &'static str,
    original: &[Vec<Rat>],
) -> Result<()> {
    for (i, x) in original.iter().enumerate() {
        for (j, y) in original.iter().enumerate().skip(i + 1) {
            let b = algebra.bracket_rat(x, y)?;
            if !space.contains(&b) {
                return Err(Error::NotSubalgebra { which, i, j });
            }
        }
    }
    Ok(())
}

/// Perp of a span: null space of `B^T G`.
fn perp(metric: &BilinearForm, space: &Subspace) -> Subspace {
    let bt_g = space.basis().transpose().mul(metric.gram());
    Subspace::from_matrix(&bt_g.nullspace())
}

impl SplitDecomposition {
    pub fn build(
        algebra: &LieAlgebra,
        metric: &BilinearForm,
        plus_basis: &[Vec<Rat>],
        minus_basis: &[Vec<Rat>],
    ) -> Result<Self> {
        let dim = algebra.dim();
        let plus = Subspace::from_span(dim, plus_basis);
        let minus = Subspace::from_span(dim, minus_basis);
        if plus.dim() != plus_basis.len() || minus.dim() != minus_basis.len() {
            return Err(Error::DirectSum(
                "split basis vectors are linearly dependent".into(),
            ));
        }
        if plus.dim() + minus.dim() != dim {
            return Err(Error::DirectSum(format!(
                "dim g+ ({}) + dim g- ({}) != dim g ({dim})",
                plus.dim(),
                minus.dim()
            )));
        }
        let concat = plus.basis().hstack(minus.basis());
        if concat.rank() != dim {
            return Err(Error::DirectSum("g+ and g- overlap".into()));
        }
        check_subalgebra(algebra, &plus, "g+", plus_basis)?;
        check_subalgebra(algebra, &minus, "g-", minus_basis)?;

        let plus_perp = perp(metric, &plus);
        let minus_perp = perp(metric, &minus);
        let perp_concat = plus_perp.basis().hstack(minus_perp.basis());
        if plus_perp.dim() + minus_perp.dim() != dim || perp_concat.rank() != dim {
            return Err(Error::DegeneratePairing(
                "g+^⊥ ⊕ g-^⊥ is not a direct sum".into(),
            ));
        }

        // Projector onto g+^⊥ along g-^⊥: M diag(I, 0) M^-1 with
        // M = [B+^⊥ | B-^⊥].
        let m_inv = perp_concat.inverse()?;
        let k = plus_perp.dim();
        let selector_plus = RatMat::from_fn(dim, dim, |i, j| {
            if i == j && i < k {
                Rat::from_integer(1.into())
            } else {
                Rat::zero()
            }
        });
        let projector_plus_perp = perp_concat.mul(&selector_plus).mul(&m_inv);
        let identity = RatMat::identity(dim);
        let projector_minus_perp = identity.sub(&projector_plus_perp);

        let sum_basis_inv = concat.inverse()?;

        Ok(SplitDecomposition {
            projector_plus_perp_f64: projector_plus_perp.to_f64(),
            projector_minus_perp_f64: projector_minus_perp.to_f64(),
            sum_basis_inv_f64: sum_basis_inv.to_f64(),
            plus_dim: plus.dim(),
            plus,
            minus,
            plus_perp,
            minus_perp,
            projector_plus_perp,
            projector_minus_perp,
            sum_basis_inv,
        })
    }

    pub fn plus(&self) -> &Subspace {
        &self.plus
    }

    pub fn minus(&self) -> &Subspace {
        &self.minus
    }

    pub fn plus_perp(&self) -> &Subspace {
        &self.plus_perp
    }

    pub fn minus_perp(&self) -> &Subspace {
        &self.minus_perp
    }

    pub fn projector_plus_perp(&self) -> &RatMat {
        &self.projector_plus_perp
    }

    /// The subspace the configured role's orbits live in.
    pub fn acted_perp(&self, role: SplitRole) -> &Subspace {
        match role {
            SplitRole::MinusActsOnPlusPerp => &self.plus_perp,
            SplitRole::PlusActsOnMinusPerp => &self.minus_perp,
        }
    }

    /// The subalgebra whose group acts in the configured role.
    pub fn acting(&self, role: SplitRole) -> &Subspace {
        match role {
            SplitRole::MinusActsOnPlusPerp => &self.minus,
            SplitRole::PlusActsOnMinusPerp => &self.plus,
        }
    }

    pub fn project_plus_perp(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.projector_plus_perp_f64 * v
    }

    pub fn project_minus_perp(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.projector_minus_perp_f64 * v
    }

    pub fn project_acted_perp(&self, role: SplitRole, v: &DVector<f64>) -> DVector<f64> {
        match role {
            SplitRole::MinusActsOnPlusPerp => self.project_plus_perp(v),
            SplitRole::PlusActsOnMinusPerp => self.project_minus_perp(v),
        }
    }

    pub fn project_plus_perp_rat(&self, v: &[Rat]) -> Vec<Rat> {
        self.projector_plus_perp.mul_vec(v)
    }

    pub fn project_minus_perp_rat(&self, v: &[Rat]) -> Vec<Rat> {
        self.projector_minus_perp.mul_vec(v)
    }

    /// Decompose `v = v+ + v-` along `g = g+ ⊕ g-`.
    pub fn decompose(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let coeffs = &self.sum_basis_inv_f64 * v;
        let dim = v.len();
        let bp = self.plus.basis().to_f64();
        let bm = self.minus.basis().to_f64();
        let mut vp = DVector::zeros(dim);
        let mut vm = DVector::zeros(dim);
        for j in 0..self.plus_dim {
            vp += bp.column(j) * coeffs[j];
        }
        for j in 0..(dim - self.plus_dim) {
            vm += bm.column(j) * coeffs[self.plus_dim + j];
        }
        (vp, vm)
    }

    pub fn decompose_rat(&self, v: &[Rat]) -> (Vec<Rat>, Vec<Rat>) {
        let coeffs = self.sum_basis_inv.mul_vec(v);
        let dim = v.len();
        let mut vp = vec![Rat::zero(); dim];
        let mut vm = vec![Rat::zero(); dim];
        for j in 0..self.plus_dim {
            for i in 0..dim {
                vp[i] += &self.plus.basis()[(i, j)] * &coeffs[j];
            }
        }
        for j in 0..(dim - self.plus_dim) {
            for i in 0..dim {
                vm[i] += &self.minus.basis()[(i, j)] * &coeffs[self.plus_dim + j];
            }
        }
        (vp, vm)
    }

    /// Gradient components `(∇f+(U), ∇f-(U))` along `g = g+ ⊕ g-`.
    pub fn split_gradient(
        &self,
        metric: &BilinearForm,
        field: &ScalarField,
        u: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let grad = metric.gradient(field, u)?;
        Ok(self.decompose(&grad))
    }

    /// Membership residual `‖v - proj_subspace(v)‖ / max(1, ‖v‖)` in floats.
    pub fn membership_residual(space: &Subspace, v: &DVector<f64>) -> f64 {
        let b = space.basis().to_f64();
        if b.ncols() == 0 {
            return v.norm() / v.norm().max(1.0);
        }
        let coeffs = (b.transpose() * &b)
            .try_inverse()
            .map(|inv| inv * b.transpose() * v)
            .unwrap_or_else(|| DVector::zeros(b.ncols()));
        let res = v - b * coeffs;
        res.norm() / v.norm().max(1.0)
    }

    /// Infinitesimal action of the configured role at a point of the acted
    /// perp: `π(-ad^t_Y X)` for `Y` in the acting subalgebra.
    pub fn induced_action_field(
        &self,
        algebra: &LieAlgebra,
        metric: &BilinearForm,
        role: SplitRole,
        y: &DVector<f64>,
        x: &DVector<f64>,
    ) -> Result<DVector<f64>> {
        let tol = 1e-9;
        if Self::membership_residual(self.acting(role), y) > tol {
            return Err(Error::Domain(
                "generator is not in the acting subalgebra".into(),
            ));
        }
        if Self::membership_residual(self.acted_perp(role), x) > tol {
            return Err(Error::Domain("point is not in the acted perp".into()));
        }
        let v = -(metric.ad_transpose(algebra, y, x)?);
        Ok(self.project_acted_perp(role, &v))
    }
}
