use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Number type that model and residual code is written against.
///
/// Implemented by `f64` for plain evaluation and by the forward-mode types
/// [`Dual`](super::Dual) and [`Dual2`](super::Dual2) for first and second
/// derivatives. Mixed arithmetic with `f64` constants is available on the
/// right-hand side only (`s * 2.0`, not `2.0 * s`).
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    /// Lifts a constant (all derivative parts zero).
    fn cst(v: f64) -> Self;
    /// The primal value.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    /// `1 / self`.
    fn recip(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }

    fn one() -> Self {
        Self::cst(1.0)
    }

    fn square(self) -> Self {
        self * self
    }

    /// Sine and cosine together; derivative types share the work.
    fn sin_cos(self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
}

/// Dot product of two equally long slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

/// Lifts a slice of constants.
pub fn lift<S: Scalar>(v: &[f64]) -> Vec<S> {
    v.iter().map(|&x| S::cst(x)).collect()
}

/// Primal values of a slice.
pub fn values<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::value).collect()
}
