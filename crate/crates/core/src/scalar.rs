//! Coefficient fields.
//!
//! Structural identities run over Gaussian rationals; evaluation at points of
//! the complex plane runs over `Complex64`. Both implement [`Scalar`], so the
//! graded containers are written once.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rational = Ratio<i128>;

/// Field operations needed by the graded containers.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    /// Embedding into floating point, used at the end of every exact pipeline.
    fn to_complex(&self) -> Complex64;
    /// Integer power; `None` for a negative power of zero.
    fn powi(&self, e: i32) -> Option<Self>;
    fn from_gauss(q: &GaussQ) -> Self;
    /// Magnitude used for residual norms.
    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
}

/// Gaussian rational `re + im·i` with `i128` numerators and denominators.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussQ {
    pub re: Rational,
    pub im: Rational,
}

impl GaussQ {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn real(re: Rational) -> Self {
        Self {
            re,
            im: Rational::zero(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::real(Rational::from_integer(n as i128))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Self::real(Rational::new(num as i128, den as i128))
    }

    pub fn i() -> Self {
        Self {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = self.re * self.re + self.im * self.im;
        if n.is_zero() {
            return None;
        }
        Some(Self {
            re: self.re / n,
            im: -self.im / n,
        })
    }

    fn pow_exact(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = GaussQ::int(1);
        for _ in 0..e.unsigned_abs() {
            acc = acc * base.clone();
        }
        Some(acc)
    }
}

impl fmt::Debug for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for GaussQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => write!(f, "({}+{}i)", self.re, self.im),
        }
    }
}

impl Add for GaussQ {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for GaussQ {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for GaussQ {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(self.re * o.re);
        }
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Neg for GaussQ {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign for GaussQ {
    fn add_assign(&mut self, o: Self) {
        self.re += o.re;
        self.im += o.im;
    }
}

fn ratio_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl Scalar for GaussQ {
    fn zero() -> Self {
        Self {
            re: Rational::zero(),
            im: Rational::zero(),
        }
    }
    fn one() -> Self {
        Self::int(1)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        Self::int(n)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(ratio_to_f64(&self.re), ratio_to_f64(&self.im))
    }
    fn powi(&self, e: i32) -> Option<Self> {
        self.pow_exact(e)
    }
    fn from_gauss(q: &GaussQ) -> Self {
        q.clone()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn powi(&self, e: i32) -> Option<Self> {
        cpowi(*self, e)
    }
    fn from_gauss(q: &GaussQ) -> Self {
        q.to_complex()
    }
}

/// Binomial coefficient `C(n, k)` for integer `n` (possibly negative) and `k ≥ 0`.
pub fn binomial(n: i64, k: i64) -> i128 {
    if k < 0 {
        return 0;
    }
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// Complex integer power with the convention `0^0 = 1`; `None` on a pole.
pub fn cpowi(z: Complex64, e: i32) -> Option<Complex64> {
    if e == 0 {
        return Some(Complex64::new(1.0, 0.0));
    }
    if z.norm() == 0.0 {
        return if e > 0 {
            Some(Complex64::new(0.0, 0.0))
        } else {
            None
        };
    }
    Some(z.powi(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_arithmetic() {
        let a = GaussQ::new(Rational::new(1, 2), Rational::new(1, 3));
        let inv = a.inv().unwrap();
        assert_eq!(a.clone() * inv, GaussQ::one());
        assert_eq!(GaussQ::i() * GaussQ::i(), GaussQ::int(-1));
        assert_eq!(GaussQ::int(2).powi(-3).unwrap(), GaussQ::frac(1, 8));
        assert!(GaussQ::zero().inv().is_none());
    }

    #[test]
    fn binomials_with_negative_upper_index() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(-1, 3), -1);
        assert_eq!(binomial(-2, 2), 3);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn complex_power_pole() {
        assert!(cpowi(Complex64::new(0.0, 0.0), -1).is_none());
        assert_eq!(
            cpowi(Complex64::new(0.0, 0.0), 0).unwrap(),
            Complex64::new(1.0, 0.0)
        );
    }
}
