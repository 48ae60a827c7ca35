//! Truncated bivariate Taylor polynomials ("jets") of total order `N ≤ 4`.
//!
//! A jet stores the Taylor coefficients of a function at a point in the
//! displacements `(dx, dy)`. Arithmetic and elementary functions propagate
//! them exactly, so closed-form expressions yield their partial derivatives
//! to order `N` without hand expansion.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub const MAX_ORDER: usize = 4;
const LEN: usize = 15;

#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const FACT: [f64; 5] = [1.0, 1.0, 2.0, 6.0, 24.0];

/// Scalar type accepted by the closed-form case expressions.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Value at the expansion point.
    fn value(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn atan(self) -> Self;
    fn powf(self, a: f64) -> Self;
    fn powi(self, k: i32) -> Self;
    fn sqrt(self) -> Self {
        self.powf(0.5)
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn atan(self) -> Self {
        f64::atan(self)
    }
    fn powf(self, a: f64) -> Self {
        f64::powf(self, a)
    }
    fn powi(self, k: i32) -> Self {
        f64::powi(self, k)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Polar angle in `(−π/2, 3π/2)`, branch cut along the negative y-axis.
/// Expanded around the value point as `θ₀ + atan(cross/dot)` so that jets
/// stay smooth.
pub fn polar_angle<R: Real>(x: R, y: R) -> R {
    let (x0, y0) = (x.value(), y.value());
    let mut t0 = y0.atan2(x0);
    if t0 <= -std::f64::consts::FRAC_PI_2 {
        t0 += 2.0 * std::f64::consts::PI;
    }
    let cross = y * x0 - x * y0;
    let dot = x * x0 + y * y0;
    (cross / dot).atan() + t0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    c: [f64; LEN],
}

impl<const N: usize> Jet<N> {
    const CHECK: () = assert!(N <= MAX_ORDER, "jet order above 4");

    pub fn constant(v: f64) -> Self {
        let () = Self::CHECK;
        let mut c = [0.0; LEN];
        c[0] = v;
        Self { c }
    }

    /// The coordinate functions `x` and `y` expanded at `(x0, y0)`.
    pub fn variables(x0: f64, y0: f64) -> (Self, Self) {
        let mut x = Self::constant(x0);
        let mut y = Self::constant(y0);
        if N >= 1 {
            x.c[idx(1, 0)] = 1.0;
            y.c[idx(0, 1)] = 1.0;
        }
        (x, y)
    }

    /// Partial derivative `∂ₓⁱ ∂ᵧʲ` at the expansion point.
    pub fn derivative(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= N, "derivative order exceeds jet order");
        self.c[idx(i, j)] * FACT[i] * FACT[j]
    }

    /// Composition with a univariate function given its derivatives
    /// `f⁽ᵏ⁾(a)` at `a = self.value()`.
    fn compose(&self, d: [f64; 5]) -> Self {
        let mut h = *self;
        h.c[0] = 0.0;
        let mut out = Self::constant(d[0]);
        let mut hk = Self::constant(1.0);
        for (k, dk) in d.iter().enumerate().take(N + 1).skip(1) {
            hk = hk * h;
            let s = dk / FACT[k];
            for (o, v) in out.c.iter_mut().zip(&hk.c) {
                *o += s * v;
            }
        }
        out
    }

    fn recip(self) -> Self {
        let a = self.c[0];
        let r = 1.0 / a;
        self.compose([r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5)])
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.c.iter_mut().for_each(|a| *a = -*a);
        self
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = [0.0; LEN];
        for d1 in 0..=N {
            for j1 in 0..=d1 {
                let a = self.c[idx(d1 - j1, j1)];
                if a == 0.0 {
                    continue;
                }
                for d2 in 0..=(N - d1) {
                    for j2 in 0..=d2 {
                        r[idx(d1 - j1 + d2 - j2, j1 + j2)] += a * o.c[idx(d2 - j2, j2)];
                    }
                }
            }
        }
        Self { c: r }
    }
}

impl<const N: usize> Div for Jet<N> {
    type Output = Self;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<const N: usize> Add<f64> for Jet<N> {
    type Output = Self;
    fn add(mut self, o: f64) -> Self {
        self.c[0] += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Jet<N> {
    type Output = Self;
    fn sub(mut self, o: f64) -> Self {
        self.c[0] -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(mut self, o: f64) -> Self {
        self.c.iter_mut().for_each(|a| *a *= o);
        self
    }
}

impl<const N: usize> Real for Jet<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn sin(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    fn cos(self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    fn atan(self) -> Self {
        let x = self.c[0];
        let q = 1.0 + x * x;
        self.compose([
            x.atan(),
            1.0 / q,
            -2.0 * x / (q * q),
            (6.0 * x * x - 2.0) / q.powi(3),
            -24.0 * x * (x * x - 1.0) / q.powi(4),
        ])
    }

    fn powf(self, a: f64) -> Self {
        let x = self.c[0];
        let mut d = [0.0; 5];
        let mut coef = 1.0;
        for (k, dk) in d.iter_mut().enumerate() {
            *dk = coef * x.powf(a - k as f64);
            coef *= a - k as f64;
        }
        self.compose(d)
    }

    fn powi(self, k: i32) -> Self {
        match k {
            0 => Self::constant(1.0),
            k if k > 0 => {
                let mut r = self;
                for _ in 1..k {
                    r = r * self;
                }
                r
            }
            k => self.powi(-k).recip(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let (x, y) = Jet::<4>::variables(0.7, -0.3);
        // f = x³y + 2y² ⇒ fx = 3x²y, fxy = 3x², fxxy = 6x, fyy = 4
        let f = x.powi(3) * y + y * y * 2.0;
        assert!((f.derivative(1, 0) - 3.0 * 0.49 * -0.3).abs() < 1e-14);
        assert!((f.derivative(1, 1) - 3.0 * 0.49).abs() < 1e-14);
        assert!((f.derivative(2, 1) - 6.0 * 0.7).abs() < 1e-14);
        assert!((f.derivative(0, 2) - 4.0).abs() < 1e-14);
        assert!((f.derivative(3, 1) - 6.0).abs() < 1e-14);
        assert_eq!(f.derivative(0, 4), 0.0);
    }

    #[test]
    fn elementary_functions() {
        let (x, y) = Jet::<4>::variables(0.4, 0.9);
        let s = (x * y).sin();
        // ∂ₓ⁴ sin(xy) = y⁴ sin(xy)
        assert!((s.derivative(4, 0) - 0.9f64.powi(4) * (0.36f64).sin()).abs() < 1e-13);
        let q = x / y;
        // ∂ᵧ² (x/y) = 2x/y³
        assert!((q.derivative(0, 2) - 0.8 / 0.729).abs() < 1e-13);
        let r = (x * x + y * y).powf(0.75);
        let r0 = (0.16f64 + 0.81).powf(0.75);
        assert!((r.value() - r0).abs() < 1e-15);
        // ∂ₓ (x²+y²)^{3/4} = 1.5 x (x²+y²)^{-1/4}
        assert!((r.derivative(1, 0) - 1.5 * 0.4 * (0.97f64).powf(-0.25)).abs() < 1e-14);
    }

    #[test]
    fn polar_angle_matches_atan2_and_derivatives() {
        for &(x0, y0) in &[(0.3, 0.4), (-0.2, 0.5), (0.9, 0.01), (-0.5, -0.1)] {
            let (x, y) = Jet::<3>::variables(x0, y0);
            let t = polar_angle(x, y);
            let mut expect = f64::atan2(y0, x0);
            if expect <= -std::f64::consts::FRAC_PI_2 {
                expect += 2.0 * std::f64::consts::PI;
            }
            assert!((t.value() - expect).abs() < 1e-15);
            let r2 = x0 * x0 + y0 * y0;
            assert!((t.derivative(1, 0) + y0 / r2).abs() < 1e-14);
            assert!((t.derivative(0, 1) - x0 / r2).abs() < 1e-14);
            // θ is harmonic
            assert!((t.derivative(2, 0) + t.derivative(0, 2)).abs() < 1e-12);
        }
    }

    #[test]
    fn lower_order_jets_truncate() {
        let (x, y) = Jet::<1>::variables(2.0, 3.0);
        let f = x * y;
        assert_eq!(f.derivative(1, 0), 3.0);
        assert_eq!(f.c[idx(1, 1)], 0.0);
    }
}
