//! Scalar abstraction shared by every numerical module.
//!
//! All floating-point code in the crate is generic over [`Real`], which is
//! implemented for `f32` and `f64`. Complex values are [`Cx<T>`].

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;

/// Complex number over a [`Real`] base field.
pub type Cx<T> = Complex<T>;

/// Dense complex matrix, used for the small `r x r` blocks at each grid node.
pub type CMat<T> = DMatrix<Cx<T>>;

/// Floating point base field: `f32` or `f64`.
///
/// Combines the nalgebra field traits (small dense linear algebra) with the
/// faer ones (sparse factorizations in the Dirichlet solver).
pub trait Real: RealField + Copy + faer::traits::RealField + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Machine epsilon.
    fn eps() -> Self;
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self as f64
    }
    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }
}

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Cx::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn creal<T: Real>(re: T) -> Cx<T> {
    Cx::new(re, T::zero())
}

/// Modulus of a complex number without going through the `ComplexField`
/// method resolution.
#[inline]
pub fn cabs<T: Real>(z: Cx<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
