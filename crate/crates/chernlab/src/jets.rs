//! Forward-mode truncated Taylor arithmetic in several real variables.
//!
//! A [`Jet2`] carries a value, its gradient with respect to `n` real
//! coordinates, and the symmetric matrix of second partials (stored packed,
//! upper triangle). Arithmetic on jets propagates derivatives exactly via
//! the product/chain rule, so closed-form fields evaluated on seeded
//! coordinate jets give derivatives that are exact to roundoff — no spatial
//! finite differencing anywhere in the evaluation path.
//!
//! [`Jet1`] is the order-1 truncation; derived quantities that consume one
//! derivative of a 2-jet (Christoffel symbols, the Lee form, ...) live there,
//! which keeps the available differentiation order visible in the types.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar coefficient ring for jets: `f64` or `Complex64`.
pub trait Ring:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn inv(self) -> Self;
    /// Magnitude, used for pivot selection in jet-valued elimination.
    fn modulus(self) -> f64;
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn inv(self) -> Self {
        1.0 / self
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Ring for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn inv(self) -> Self {
        self.finv()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

#[inline]
fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Packed upper-triangle index for the pair `(a, b)` with `a <= b`.
#[inline]
fn tri_idx(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * (2 * n - a + 1) / 2 + (b - a)
}

/// Value plus first partials in `n` real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1<T: Ring> {
    n: usize,
    /// Layout: `[val, d1[0], ..., d1[n-1]]`.
    c: Vec<T>,
}

/// Value plus first and second partials in `n` real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2<T: Ring> {
    n: usize,
    /// Layout: `[val, d1[0..n], d2 packed upper triangle]`.
    c: Vec<T>,
}

pub type RJet1 = Jet1<f64>;
pub type RJet2 = Jet2<f64>;
pub type CJet1 = Jet1<Complex64>;
pub type CJet2 = Jet2<Complex64>;

impl<T: Ring> Jet1<T> {
    pub fn constant(n: usize, v: T) -> Self {
        let mut c = vec![T::zero(); 1 + n];
        c[0] = v;
        Jet1 { n, c }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn val(&self) -> T {
        self.c[0]
    }

    pub fn d1(&self, a: usize) -> T {
        self.c[1 + a]
    }

    pub fn set_d1(&mut self, a: usize, v: T) {
        self.c[1 + a] = v;
    }

    pub fn recip(&self) -> Self {
        let w = self.c[0].inv();
        let w2 = -(w * w);
        let mut r = Jet1::constant(self.n, w);
        for a in 0..self.n {
            r.c[1 + a] = w2 * self.c[1 + a];
        }
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = self.clone();
        for v in r.c.iter_mut() {
            *v = *v * s;
        }
        r
    }
}

impl<T: Ring> Jet2<T> {
    pub fn constant(n: usize, v: T) -> Self {
        let mut c = vec![T::zero(); 1 + n + tri_len(n)];
        c[0] = v;
        Jet2 { n, c }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn val(&self) -> T {
        self.c[0]
    }

    pub fn d1(&self, a: usize) -> T {
        self.c[1 + a]
    }

    pub fn d2(&self, a: usize, b: usize) -> T {
        self.c[1 + self.n + tri_idx(self.n, a, b)]
    }

    pub fn set_d1(&mut self, a: usize, v: T) {
        self.c[1 + a] = v;
    }

    pub fn set_d2(&mut self, a: usize, b: usize, v: T) {
        self.c[1 + self.n + tri_idx(self.n, a, b)] = v;
    }

    /// Drop second-order information.
    pub fn truncate(&self) -> Jet1<T> {
        Jet1 {
            n: self.n,
            c: self.c[..1 + self.n].to_vec(),
        }
    }

    /// The partial derivative along coordinate `a`, as an order-1 jet.
    pub fn deriv(&self, a: usize) -> Jet1<T> {
        let mut r = Jet1::constant(self.n, self.d1(a));
        for b in 0..self.n {
            r.c[1 + b] = self.d2(a, b);
        }
        r
    }

    pub fn recip(&self) -> Self {
        let n = self.n;
        let w = self.c[0].inv();
        let w2 = w * w;
        let w3 = w2 * w;
        let two = T::from_f64(2.0);
        let mut r = Jet2::constant(n, w);
        for a in 0..n {
            r.c[1 + a] = -(w2 * self.c[1 + a]);
        }
        for a in 0..n {
            for b in a..n {
                let v = two * w3 * self.d1(a) * self.d1(b) - w2 * self.d2(a, b);
                r.set_d2(a, b, v);
            }
        }
        r
    }

    pub fn scale(&self, s: T) -> Self {
        let mut r = self.clone();
        for v in r.c.iter_mut() {
            *v = *v * s;
        }
        r
    }
}

macro_rules! impl_jet_linear_ops {
    ($jet:ident) => {
        impl<T: Ring> Add for &$jet<T> {
            type Output = $jet<T>;
            fn add(self, rhs: &$jet<T>) -> $jet<T> {
                assert_eq!(self.n, rhs.n, "jet variable-count mismatch");
                let mut r = self.clone();
                for (x, y) in r.c.iter_mut().zip(rhs.c.iter()) {
                    *x = *x + *y;
                }
                r
            }
        }
        impl<T: Ring> Sub for &$jet<T> {
            type Output = $jet<T>;
            fn sub(self, rhs: &$jet<T>) -> $jet<T> {
                assert_eq!(self.n, rhs.n, "jet variable-count mismatch");
                let mut r = self.clone();
                for (x, y) in r.c.iter_mut().zip(rhs.c.iter()) {
                    *x = *x - *y;
                }
                r
            }
        }
        impl<T: Ring> Neg for &$jet<T> {
            type Output = $jet<T>;
            fn neg(self) -> $jet<T> {
                let mut r = self.clone();
                for x in r.c.iter_mut() {
                    *x = -*x;
                }
                r
            }
        }
    };
}

impl_jet_linear_ops!(Jet1);
impl_jet_linear_ops!(Jet2);

impl<T: Ring> Mul for &Jet1<T> {
    type Output = Jet1<T>;
    fn mul(self, rhs: &Jet1<T>) -> Jet1<T> {
        assert_eq!(self.n, rhs.n, "jet variable-count mismatch");
        let n = self.n;
        let (av, bv) = (self.c[0], rhs.c[0]);
        let mut r = Jet1::constant(n, av * bv);
        for a in 0..n {
            r.c[1 + a] = self.c[1 + a] * bv + av * rhs.c[1 + a];
        }
        r
    }
}

impl<T: Ring> Mul for &Jet2<T> {
    type Output = Jet2<T>;
    fn mul(self, rhs: &Jet2<T>) -> Jet2<T> {
        assert_eq!(self.n, rhs.n, "jet variable-count mismatch");
        let n = self.n;
        let (av, bv) = (self.c[0], rhs.c[0]);
        let mut r = Jet2::constant(n, av * bv);
        for a in 0..n {
            r.c[1 + a] = self.c[1 + a] * bv + av * rhs.c[1 + a];
        }
        let base = 1 + n;
        let mut k = 0;
        for a in 0..n {
            for b in a..n {
                r.c[base + k] = self.c[base + k] * bv
                    + av * rhs.c[base + k]
                    + self.c[1 + a] * rhs.c[1 + b]
                    + self.c[1 + b] * rhs.c[1 + a];
                k += 1;
            }
        }
        r
    }
}

impl<T: Ring> Div for &Jet1<T> {
    type Output = Jet1<T>;
    fn div(self, rhs: &Jet1<T>) -> Jet1<T> {
        self * &rhs.recip()
    }
}

impl<T: Ring> Div for &Jet2<T> {
    type Output = Jet2<T>;
    fn div(self, rhs: &Jet2<T>) -> Jet2<T> {
        self * &rhs.recip()
    }
}

impl RJet2 {
    /// Coordinate jet: value `v` for variable `a`, with `d x_a / d x_a = 1`.
    pub fn coordinate(n: usize, a: usize, v: f64) -> Self {
        let mut r = RJet2::constant(n, v);
        r.set_d1(a, 1.0);
        r
    }

    /// Chain rule through a univariate function with value/first/second
    /// derivative `(s0, s1, s2)` evaluated at `self.val()`.
    pub fn compose(&self, s0: f64, s1: f64, s2: f64) -> Self {
        let n = self.n;
        let mut r = RJet2::constant(n, s0);
        for a in 0..n {
            r.c[1 + a] = s1 * self.d1(a);
        }
        for a in 0..n {
            for b in a..n {
                r.set_d2(a, b, s2 * self.d1(a) * self.d1(b) + s1 * self.d2(a, b));
            }
        }
        r
    }

    pub fn exp(&self) -> Self {
        let e = self.val().exp();
        self.compose(e, e, e)
    }

    pub fn ln(&self) -> Self {
        let v = self.val();
        self.compose(v.ln(), 1.0 / v, -1.0 / (v * v))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.val().sin_cos();
        self.compose(s, c, -s)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.val().sin_cos();
        self.compose(c, -s, -c)
    }

    pub fn sqrt(&self) -> Self {
        let s = self.val().sqrt();
        self.compose(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn powi(&self, k: i32) -> Self {
        let v = self.val();
        self.compose(
            v.powi(k),
            f64::from(k) * v.powi(k - 1),
            f64::from(k) * f64::from(k - 1) * v.powi(k - 2),
        )
    }
}

impl RJet1 {
    pub fn sqrt(&self) -> Self {
        let s = self.val().sqrt();
        let mut r = RJet1::constant(self.nvars(), s);
        for a in 0..self.nvars() {
            r.set_d1(a, 0.5 / s * self.d1(a));
        }
        r
    }
}

impl CJet2 {
    pub fn from_real(re: &RJet2) -> Self {
        Jet2 {
            n: re.n,
            c: re.c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_re_im(re: &RJet2, im: &RJet2) -> Self {
        assert_eq!(re.n, im.n, "jet variable-count mismatch");
        Jet2 {
            n: re.n,
            c: re
                .c
                .iter()
                .zip(im.c.iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Jet2 {
            n: self.n,
            c: self.c.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn re(&self) -> RJet2 {
        Jet2 {
            n: self.n,
            c: self.c.iter().map(|v| v.re).collect(),
        }
    }

    pub fn im(&self) -> RJet2 {
        Jet2 {
            n: self.n,
            c: self.c.iter().map(|v| v.im).collect(),
        }
    }
}

impl CJet1 {
    pub fn from_real(re: &RJet1) -> Self {
        Jet1 {
            n: re.n,
            c: re.c.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Jet1 {
            n: self.n,
            c: self.c.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn re(&self) -> RJet1 {
        Jet1 {
            n: self.n,
            c: self.c.iter().map(|v| v.re).collect(),
        }
    }

    pub fn im(&self) -> RJet1 {
        Jet1 {
            n: self.n,
            c: self.c.iter().map(|v| v.im).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_jet(n: usize, seed: f64) -> RJet2 {
        // Arbitrary dense jet with nonzero entries everywhere.
        let mut j = RJet2::constant(n, 1.3 + seed);
        for a in 0..n {
            j.set_d1(a, 0.7 * (a as f64 + 1.0) - seed);
        }
        for a in 0..n {
            for b in a..n {
                j.set_d2(a, b, 0.1 * ((a + 2 * b) as f64) + 0.3 * seed);
            }
        }
        j
    }

    #[test]
    fn product_rule_is_exact() {
        let n = 4;
        let f = sample_jet(n, 0.2);
        let g = sample_jet(n, -0.5);
        let p = &f * &g;
        assert_relative_eq!(p.val(), f.val() * g.val(), max_relative = 1e-15);
        for a in 0..n {
            assert_relative_eq!(
                p.d1(a),
                f.d1(a) * g.val() + f.val() * g.d1(a),
                max_relative = 1e-15
            );
            for b in 0..n {
                let expect = f.d2(a, b) * g.val()
                    + f.val() * g.d2(a, b)
                    + f.d1(a) * g.d1(b)
                    + f.d1(b) * g.d1(a);
                assert_relative_eq!(p.d2(a, b), expect, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn reciprocal_inverts_product() {
        let f = sample_jet(3, 0.9);
        let r = &f * &f.recip();
        assert_relative_eq!(r.val(), 1.0, max_relative = 1e-15);
        for a in 0..3 {
            assert!(r.d1(a).abs() < 1e-14);
            for b in 0..3 {
                assert!(r.d2(a, b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn chain_rule_matches_closed_form() {
        // f(x, y) = exp(sin(x) * y) at a generic point, against analytic
        // partials derived by hand.
        let n = 2;
        let (x, y) = (0.4, 1.7);
        let jx = RJet2::coordinate(n, 0, x);
        let jy = RJet2::coordinate(n, 1, y);
        let f = (&jx.sin() * &jy).exp();
        let v = (x.sin() * y).exp();
        assert_relative_eq!(f.val(), v, max_relative = 1e-15);
        assert_relative_eq!(f.d1(0), v * y * x.cos(), max_relative = 1e-14);
        assert_relative_eq!(f.d1(1), v * x.sin(), max_relative = 1e-14);
        // fxx = v * (y cos x)^2 - v * y sin x
        assert_relative_eq!(
            f.d2(0, 0),
            v * (y * x.cos()).powi(2) - v * y * x.sin(),
            max_relative = 1e-13
        );
        // fxy = v * cos x * (1 + y sin x ... ) derive: d/dy [v y cos x] with v dep on y
        assert_relative_eq!(
            f.d2(0, 1),
            v * x.cos() + v * x.sin() * y * x.cos(),
            max_relative = 1e-13
        );
        assert_relative_eq!(f.d2(1, 1), v * x.sin() * x.sin(), max_relative = 1e-13);
    }

    #[test]
    fn deriv_extracts_consistent_order1() {
        let f = sample_jet(4, 0.1);
        let d0 = f.deriv(0);
        assert_eq!(d0.val(), f.d1(0));
        for b in 0..4 {
            assert_eq!(d0.d1(b), f.d2(0, b));
        }
    }

    #[test]
    fn complex_jets_conjugation_commutes_with_arithmetic() {
        let re = sample_jet(4, 0.3);
        let im = sample_jet(4, -0.8);
        let z = CJet2::from_re_im(&re, &im);
        let w = CJet2::from_re_im(&sample_jet(4, 1.1), &sample_jet(4, 0.05));
        let lhs = (&z * &w).conj();
        let rhs = &z.conj() * &w.conj();
        for (a, b) in lhs.c.iter().zip(rhs.c.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn mixed_partials_symmetric_by_construction() {
        let f = sample_jet(4, 0.6);
        let g = sample_jet(4, -0.2);
        let h = &(&f * &g).recip() * &f.exp();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(h.d2(a, b), h.d2(b, a));
            }
        }
    }
}
