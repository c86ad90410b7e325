//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All algorithms are written against [`Real`], which is satisfied by `f32`
//! and `f64`. Complex quantities use [`nalgebra::Complex`] over the same real
//! type.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by the simulator (`f32` or `f64`).
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal not representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Converts a count into this type.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Cplx<T> = Complex<T>;
pub type CVector<T> = DVector<Complex<T>>;
pub type CMatrix<T> = DMatrix<Complex<T>>;

/// Squared Euclidean norm of a complex vector.
#[inline]
pub fn norm_sqr<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
}

/// Hermitian inner product `a^H b`.
#[inline]
pub fn inner<T: Real>(a: &CVector<T>, b: &CVector<T>) -> Cplx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        })
}

/// Scales a complex vector by a real factor.
#[inline]
pub fn scale<T: Real>(v: &CVector<T>, s: T) -> CVector<T> {
    v.map(|z| z * s)
}

/// Watts from dBm.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// dBm from watts.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Linear factor from decibels.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
