//! Scalar abstractions shared by every module.
//!
//! All numerical code is generic over a real scalar `T: Scalar` (`f32` or
//! `f64`). Matrix entries are either real (`T`) or complex (`Complex<T>`);
//! both implement [`Entry`], which lets the interior-point solver and the
//! dense spectral routines run over real symmetric and complex Hermitian
//! matrices with one implementation.

use nalgebra::{Complex, ComplexField, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type the library is generic over.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Entry<Self> {
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Matrix entry type over the real scalar `T`: either `T` itself or `Complex<T>`.
pub trait Entry<T: RealField + Copy + FromPrimitive>: ComplexField<RealField = T> + Copy {
    /// Whether the entry type carries an imaginary part.
    const IS_COMPLEX: bool;

    /// The imaginary unit, when the field has one.
    fn imaginary_unit() -> Option<Self>;

    #[inline]
    fn real_lit(x: f64) -> Self {
        Self::from_real(T::from_f64(x).expect("f64 literal representable"))
    }
}

impl Entry<f32> for f32 {
    const IS_COMPLEX: bool = false;
    fn imaginary_unit() -> Option<Self> {
        None
    }
}

impl Entry<f64> for f64 {
    const IS_COMPLEX: bool = false;
    fn imaginary_unit() -> Option<Self> {
        None
    }
}

impl<T: Scalar> Entry<T> for Complex<T> {
    const IS_COMPLEX: bool = true;
    fn imaginary_unit() -> Option<Self> {
        Some(Complex::new(T::zero(), T::one()))
    }
}

/// Shorthand for `T::lit`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}
