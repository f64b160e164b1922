//! Complex scalars with two backends: exact Gaussian rationals and `f64` complex
//! floats. Mixing the two always coerces to the approximate backend.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `re + im·i` with both parts arbitrary-precision rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational { re, im: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }

    fn add(&self, o: &Self) -> Self {
        GaussRational { re: &self.re + &o.re, im: &self.im + &o.im }
    }

    fn sub(&self, o: &Self) -> Self {
        GaussRational { re: &self.re - &o.re, im: &self.im - &o.im }
    }

    fn mul(&self, o: &Self) -> Self {
        GaussRational {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    fn div(&self, o: &Self) -> Self {
        let d = o.norm_sqr();
        assert!(!d.is_zero(), "exact division by zero");
        GaussRational {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }
}

/// Nearest `f64` to a rational; stays accurate when numerator and
/// denominator individually overflow.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite `f64` to a rational.
pub fn f64_to_rational(v: f64) -> Option<BigRational> {
    BigRational::from_float(v)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(GaussRational),
    Approx(Complex64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    pub fn i() -> Self {
        Scalar::Exact(GaussRational::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(GaussRational::real(BigRational::from_integer(BigInt::from(n))))
    }

    pub fn from_ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(GaussRational::real(BigRational::new(BigInt::from(n), BigInt::from(d))))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::Exact(GaussRational::real(r))
    }

    pub fn gauss(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(GaussRational::new(re, im))
    }

    pub fn gauss_ratio(re: (i64, i64), im: (i64, i64)) -> Self {
        Scalar::Exact(GaussRational::new(
            BigRational::new(re.0.into(), re.1.into()),
            BigRational::new(im.0.into(), im.1.into()),
        ))
    }

    pub fn approx(re: f64, im: f64) -> Self {
        Scalar::Approx(Complex64::new(re, im))
    }

    pub fn from_c64(z: Complex64) -> Self {
        Scalar::Approx(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&GaussRational> {
        match self {
            Scalar::Exact(g) => Some(g),
            Scalar::Approx(_) => None,
        }
    }

    /// Exact real rational value, if this is an exact scalar with zero imaginary part.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(g) if g.im.is_zero() => Some(&g.re),
            _ => None,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(g) => g.to_c64(),
            Scalar::Approx(z) => *z,
        }
    }

    pub fn to_approx(&self) -> Scalar {
        Scalar::Approx(self.to_c64())
    }

    pub fn re_f64(&self) -> f64 {
        self.to_c64().re
    }

    pub fn im_f64(&self) -> f64 {
        self.to_c64().im
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// Literal zero: exact zero, or an approximate value equal to `0.0`.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.is_zero(),
            Scalar::Approx(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.re.is_one() && g.im.is_zero(),
            Scalar::Approx(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    /// Imaginary part literally zero.
    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.im.is_zero(),
            Scalar::Approx(z) => z.im == 0.0,
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(g.conj()),
            Scalar::Approx(z) => Scalar::Approx(z.conj()),
        }
    }

    pub fn re(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussRational::real(g.re.clone())),
            Scalar::Approx(z) => Scalar::approx(z.re, 0.0),
        }
    }

    pub fn im(&self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussRational::real(g.im.clone())),
            Scalar::Approx(z) => Scalar::approx(z.im, 0.0),
        }
    }

    pub fn recip(&self) -> Scalar {
        Scalar::one() / self
    }

    pub fn powi(&self, n: u32) -> Scalar {
        let mut acc = match self {
            Scalar::Exact(_) => Scalar::one(),
            Scalar::Approx(_) => Scalar::approx(1.0, 0.0),
        };
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Sign of the real part (exact scalars only compare exactly).
    pub fn re_is_negative(&self) -> bool {
        match self {
            Scalar::Exact(g) => g.re.is_negative(),
            Scalar::Approx(z) => z.re < 0.0,
        }
    }

    /// Total order on (Re, Im). Exact pairs compare exactly; anything else
    /// compares the `f64` projections.
    pub fn cmp_re_im(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im)),
            _ => {
                let (a, b) = (self.to_c64(), other.to_c64());
                a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
            }
        }
    }

    fn binary(
        &self,
        other: &Scalar,
        exact: impl Fn(&GaussRational, &GaussRational) -> GaussRational,
        approx: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            _ => Scalar::Approx(approx(self.to_c64(), other.to_c64())),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Approx(z)
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, o: &Scalar) -> Scalar {
        self.binary(o, GaussRational::add, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, o: &Scalar) -> Scalar {
        self.binary(o, GaussRational::sub, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, o: &Scalar) -> Scalar {
        self.binary(o, GaussRational::mul, |a, b| a * b)
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn div(self, o: &Scalar) -> Scalar {
        self.binary(o, GaussRational::div, |a, b| a / b)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: Scalar) -> Scalar {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, o: &Scalar) -> Scalar {
                (&self).$m(o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(g) => Scalar::Exact(GaussRational::new(-g.re.clone(), -g.im.clone())),
            Scalar::Approx(z) => Scalar::Approx(-z),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(g) if g.im.is_zero() => write!(f, "{}", g.re),
            Scalar::Exact(g) if g.re.is_zero() => write!(f, "{}i", g.im),
            Scalar::Exact(g) => {
                if g.im.is_negative() {
                    write!(f, "({} - {}i)", g.re, -g.im.clone())
                } else {
                    write!(f, "({} + {}i)", g.re, g.im)
                }
            }
            Scalar::Approx(z) if z.im == 0.0 => write!(f, "{}", z.re),
            Scalar::Approx(z) => write!(f, "({} + {}i)", z.re, z.im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_division_matches_hand_value() {
        // 1 / (4 - 2i) = (4 + 2i) / 20
        let z = Scalar::one() / Scalar::gauss_ratio((4, 1), (-2, 1));
        assert_eq!(z, Scalar::gauss_ratio((1, 5), (1, 10)));
    }

    #[test]
    fn mixing_backends_coerces_to_approx() {
        let s = Scalar::from_ratio(1, 2) + Scalar::approx(0.25, 0.0);
        assert!(!s.is_exact());
        assert_eq!(s.to_c64(), Complex64::new(0.75, 0.0));
    }

    #[test]
    fn ordering_is_lexicographic_on_re_then_im() {
        let a = Scalar::gauss_ratio((1, 1), (-2, 1));
        let b = Scalar::gauss_ratio((1, 1), (2, 1));
        let c = Scalar::from_int(-3);
        assert_eq!(a.cmp_re_im(&b), Ordering::Less);
        assert_eq!(c.cmp_re_im(&a), Ordering::Less);
    }

    #[test]
    fn huge_rationals_still_convert() {
        let big = BigRational::new(BigInt::from(10).pow(400), BigInt::from(10).pow(399));
        assert!((rational_to_f64(&big) - 10.0).abs() < 1e-12);
    }
}
