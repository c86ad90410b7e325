use nalgebra::{DMatrix, DVector};

use crate::error::{DamError, Result};
use crate::scalar::Real;

/// `‖a^T U‖² / γ`, jointly convex in `(a, γ)` for `γ > 0`.
pub fn quadratic_over_linear<T: Real>(a: &DVector<T>, gamma: T, u: &DMatrix<T>) -> T {
    (u.transpose() * a).norm_squared() / gamma
}

/// First-order expansion of [`quadratic_over_linear`] at `(a^r, γ^r)`.
/// Convexity makes it a global under-estimator, tight at the expansion point.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorBound<T: Real> {
    pub point_a: DVector<T>,
    pub point_gamma: T,
    /// Function value at the expansion point.
    pub value: T,
    /// `(2/γ^r) U U^T a^r`.
    pub grad_a: DVector<T>,
    /// `-‖(a^r)^T U‖² / (γ^r)²`.
    pub grad_gamma: T,
}

impl<T: Real> TaylorBound<T> {
    pub fn eval(&self, a: &DVector<T>, gamma: T) -> T {
        self.value
            + self.grad_a.dot(&(a - &self.point_a))
            + self.grad_gamma * (gamma - self.point_gamma)
    }
}

pub fn sca_taylor_bound<T: Real>(
    a_r: &DVector<T>,
    gamma_r: T,
    u: &DMatrix<T>,
) -> Result<TaylorBound<T>> {
    if !(gamma_r > T::zero()) {
        return Err(DamError::NonPositiveSlack(gamma_r.as_f64()));
    }
    if a_r.len() != u.nrows() {
        return Err(DamError::DimensionMismatch("expansion point vs U".into()));
    }
    let ut_a = u.transpose() * a_r;
    let p = ut_a.norm_squared();
    Ok(TaylorBound {
        point_a: a_r.clone(),
        point_gamma: gamma_r,
        value: p / gamma_r,
        grad_a: (u * ut_a) * (T::lit(2.0) / gamma_r),
        grad_gamma: -p / (gamma_r * gamma_r),
    })
}
