//! Scalar abstraction: core math is generic over the real floating-point type.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Real scalar type underlying all state vectors and matrices.
///
/// Implemented by `f32` and `f64`. The bound combines nalgebra's field
/// operations (needed for decompositions) with `num_traits` casting.
/// `num_traits::Float` is deliberately left out: its methods shadow the
/// `RealField` ones and every call site would need disambiguation.
pub trait Real:
    nalgebra::RealField
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Copy
    + Default
    + std::fmt::LowerExp
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] type.
pub type C<T> = Complex<T>;
/// Dynamically sized complex matrix.
pub type CMatrix<T> = DMatrix<C<T>>;
/// Dynamically sized complex vector.
pub type CVector<T> = DVector<C<T>>;

/// Shorthand for converting an `f64` literal into the generic scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Complex number from real and imaginary `f64` literals.
#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(cast(re), cast(im))
}

/// The imaginary unit.
#[inline]
pub fn i<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Real number promoted to a complex one.
#[inline]
pub fn re<T: Real>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// Modulus `|z|` of a complex scalar.
///
/// `Complex::norm` requires `num_traits::Float`, which [`Real`] deliberately
/// does not include; this helper covers the generic case.
#[inline]
pub fn modulus<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Frobenius norm of a complex matrix.
pub fn frobenius_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .map(|z| z.norm_sqr())
        .fold(T::zero(), |a, b| a + b)
        .sqrt()
}

/// Max absolute difference between two matrices of equal shape.
pub fn max_abs_diff<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| modulus(*x - *y))
        .fold(T::zero(), |acc, v| if v > acc { v } else { acc })
}
