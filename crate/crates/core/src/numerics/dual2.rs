//! Second-order forward-mode numbers.
//!
//! A `Dual2<N>` propagates a value, its gradient along `N` seed directions and
//! the symmetric matrix of second derivatives between those directions. Only
//! the upper triangle (`i <= j`) of `h` is maintained during arithmetic; call
//! [`Dual2::hessian`] to read the symmetric matrix.
//!
//! With all seeds zero the value field follows plain `f64` arithmetic exactly,
//! so the same generic code serves evaluation and differentiation.

use super::scalar::Scalar;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual2<const N: usize> {
    pub v: f64,
    pub g: [f64; N],
    pub h: [[f64; N]; N],
}

impl<const N: usize> Dual2<N> {
    pub fn constant(v: f64) -> Self {
        Dual2 {
            v,
            g: [0.0; N],
            h: [[0.0; N]; N],
        }
    }

    /// Independent variable seeded along direction `k` (no seed if `k >= N`).
    pub fn variable(v: f64, k: usize) -> Self {
        let mut x = Self::constant(v);
        if k < N {
            x.g[k] = 1.0;
        }
        x
    }

    /// Full symmetric second-derivative matrix.
    pub fn hessian(&self) -> [[f64; N]; N] {
        let mut out = self.h;
        for i in 0..N {
            for j in 0..i {
                out[i][j] = out[j][i];
            }
        }
        out
    }

    /// Applies a scalar function with derivatives `f, f', f''` at `self.v`.
    #[inline]
    fn chain(&self, f: f64, df: f64, ddf: f64) -> Self {
        let mut out = Self::constant(f);
        for i in 0..N {
            out.g[i] = df * self.g[i];
            let gi = ddf * self.g[i];
            for j in i..N {
                out.h[i][j] = df * self.h[i][j] + gi * self.g[j];
            }
        }
        out
    }
}

impl<const N: usize> Add for Dual2<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self += o;
        self
    }
}

impl<const N: usize> Sub for Dual2<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self -= o;
        self
    }
}

impl<const N: usize> Mul for Dual2<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, o: Self) -> Self {
        self *= o;
        self
    }
}

impl<const N: usize> Div for Dual2<N> {
    type Output = Self;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Neg for Dual2<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Add<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: f64) -> Self {
        self.v += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: f64) -> Self {
        self.v -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, o: f64) -> Self {
        self.v *= o;
        for i in 0..N {
            self.g[i] *= o;
            for j in i..N {
                self.h[i][j] *= o;
            }
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual2<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<const N: usize> AddAssign for Dual2<N> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        self.v += o.v;
        for i in 0..N {
            self.g[i] += o.g[i];
            for j in i..N {
                self.h[i][j] += o.h[i][j];
            }
        }
    }
}

impl<const N: usize> SubAssign for Dual2<N> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        self.v -= o.v;
        for i in 0..N {
            self.g[i] -= o.g[i];
            for j in i..N {
                self.h[i][j] -= o.h[i][j];
            }
        }
    }
}

impl<const N: usize> MulAssign for Dual2<N> {
    #[inline]
    fn mul_assign(&mut self, o: Self) {
        let (a, b) = (self.v, o.v);
        for i in 0..N {
            let (ga, gb) = (self.g[i], o.g[i]);
            for j in i..N {
                self.h[i][j] = self.h[i][j] * b + a * o.h[i][j] + ga * o.g[j] + self.g[j] * gb;
            }
        }
        for i in 0..N {
            self.g[i] = self.g[i] * b + a * o.g[i];
        }
        self.v = a * b;
    }
}

impl<const N: usize> Scalar for Dual2<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    #[inline]
    fn value(&self) -> f64 {
        self.v
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }
    #[inline]
    fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.v.sin_cos();
        (self.chain(s, c, -s), self.chain(c, -s, -c))
    }
}
