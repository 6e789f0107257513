//! Coefficient fields.
//!
//! Every algebraic container in the crate ([`TruncatedSeries`](crate::series::TruncatedSeries),
//! [`Matrix`](crate::linalg::Matrix), operator expressions) is generic over a
//! [`Coefficient`]. The exact identity checks run over [`Rational`] or
//! [`GaussianRational`]; the numeric paths reuse the same code over `f64`.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// `Rational + i·Rational`.
pub type GaussianRational = Complex<Rational>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse `{0}` as an exact rational")]
pub struct ParseRationalError(pub String);

/// A field (or a numeric stand-in for one) usable as a coefficient.
pub trait Coefficient:
    Num + Clone + Debug + Send + Sync + std::ops::Neg<Output = Self> + 'static
{
    fn from_rational(q: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(n)))
    }
}

impl Coefficient for Rational {
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
}

impl Coefficient for GaussianRational {
    fn from_rational(q: &Rational) -> Self {
        Complex::new(q.clone(), Rational::zero())
    }
}

impl Coefficient for f64 {
    fn from_rational(q: &Rational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
}

impl Coefficient for f32 {
    fn from_rational(q: &Rational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }
}

/// Coefficients that can be written out exactly as a (re, im) pair of rationals.
pub trait ExactCoefficient: Coefficient {
    fn to_parts(&self) -> (Rational, Rational);
    fn from_parts(re: Rational, im: Rational) -> Option<Self>;
}

impl ExactCoefficient for Rational {
    fn to_parts(&self) -> (Rational, Rational) {
        (self.clone(), Rational::zero())
    }

    fn from_parts(re: Rational, im: Rational) -> Option<Self> {
        im.is_zero().then_some(re)
    }
}

impl ExactCoefficient for GaussianRational {
    fn to_parts(&self) -> (Rational, Rational) {
        (self.re.clone(), self.im.clone())
    }

    fn from_parts(re: Rational, im: Rational) -> Option<Self> {
        Some(Complex::new(re, im))
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn gauss(re: Rational, im: Rational) -> GaussianRational {
    Complex::new(re, im)
}

/// `"p/q"`, with `q` omitted when it is 1.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(err());
    }
    match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => {
            if let Some((whole, frac)) = t.split_once('.') {
                // finite decimal literal, e.g. "0.25"
                let neg = whole.trim_start().starts_with('-');
                let whole_abs = whole.trim_start_matches(['-', '+']);
                let digits = format!("{whole_abs}{frac}");
                let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits })
                    .map_err(|_| err())?;
                let den = num_traits::pow(BigInt::from(10), frac.len());
                let q = Rational::new(num, den);
                return Ok(if neg { -q } else { q });
            }
            BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err())
        }
    }
}

/// Double factorial of an odd number `2d-1`, with `(-1)!! = 1`.
pub fn odd_double_factorial(d: u32) -> BigInt {
    (1..=d).fold(BigInt::one(), |acc, k| acc * BigInt::from(2 * k - 1))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `"a"`, `"bi"` or `"a+bi"` with rational parts.
pub fn format_gaussian(z: &GaussianRational) -> String {
    match (z.re.is_zero(), z.im.is_zero()) {
        (_, true) => format_rational(&z.re),
        (true, false) => format!("{}i", format_rational(&z.im)),
        _ if z.im.is_negative() => format!("{}-{}i", format_rational(&z.re), format_rational(&-z.im.clone())),
        _ => format!("{}+{}i", format_rational(&z.re), format_rational(&z.im)),
    }
}

/// Decimal rendering with 17 significant digits, used by the numeric reports.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

pub fn rational_abs(q: &Rational) -> Rational {
    q.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_reduced() {
        let q = Rational::new(BigInt::from(6), BigInt::from(-4));
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&int(0)), "0");
        assert!(q.denom() > &BigInt::zero());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["1", "-7", "3/2", "-5/12", "0"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn double_factorial_convention() {
        assert_eq!(odd_double_factorial(0), BigInt::from(1));
        assert_eq!(odd_double_factorial(1), BigInt::from(1));
        assert_eq!(odd_double_factorial(3), BigInt::from(15));
    }

    #[test]
    fn gaussian_conjugation_is_involution() {
        let z = gauss(rat(1, 3), rat(-2, 5));
        assert_eq!(z.conj().conj(), z);
        let w = gauss(rat(2, 1), rat(1, 7));
        assert_eq!((z.clone() * w.clone()) / w, z);
    }
}
