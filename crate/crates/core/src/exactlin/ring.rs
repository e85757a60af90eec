//! Coefficient rings.
//!
//! Every matrix in the crate is generic over [`Ring`]. Elements that need
//! context to build a zero (truncated series carry their variable list) are
//! handled through `zero_like` / `one_like` on a prototype element.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parse `"p"` or `"p/q"`; rejects zero denominators instead of panicking.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
        Some((n, d)) => {
            let n = n.trim().parse::<BigInt>().ok()?;
            let d = d.trim().parse::<BigInt>().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
    }
}

pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn scale(&self, q: &Rational) -> Self;
    /// Canonical text form used in reports.
    fn render(&self) -> String;
    fn from_rational_like(&self, q: &Rational) -> Self {
        self.one_like().scale(q)
    }
}

/// A ring in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;
}

/// A field with context-free constants; used as series coefficients.
pub trait Scalar: Field + fmt::Display {
    fn zero_s() -> Self;
    fn one_s() -> Self;
    fn from_q(q: &Rational) -> Self;
}

impl Scalar for Rational {
    fn zero_s() -> Self {
        <Rational as Zero>::zero()
    }
    fn one_s() -> Self {
        <Rational as One>::one()
    }
    fn from_q(q: &Rational) -> Self {
        q.clone()
    }
}

impl Scalar for GaussRational {
    fn zero_s() -> Self {
        GaussRational::from_rational(<Rational as Zero>::zero())
    }
    fn one_s() -> Self {
        GaussRational::from_rational(<Rational as One>::one())
    }
    fn from_q(q: &Rational) -> Self {
        GaussRational::from_rational(q.clone())
    }
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn scale(&self, q: &Rational) -> Self {
        self * q
    }
    fn render(&self) -> String {
        format_rational(self)
    }
}

impl Field for Rational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Gaussian rational `a + b i` with `a, b` rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussRational(pub Complex<Rational>);

impl GaussRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussRational(Complex::new(re, im))
    }
    pub fn i() -> Self {
        GaussRational::new(Rational::zero(), Rational::one())
    }
    pub fn from_rational(q: Rational) -> Self {
        GaussRational::new(q, Rational::zero())
    }
    pub fn re(&self) -> &Rational {
        &self.0.re
    }
    pub fn im(&self) -> &Rational {
        &self.0.im
    }

    /// Parses `"a"`, `"bi"`, `"a+bi"`, `"a-bi"` where `a`, `b` are `p/q` rationals.
    pub fn parse(s: &str) -> Option<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !s.ends_with('i') {
            return parse_rational(&s).map(Self::from_rational);
        }
        let body = &s[..s.len() - 1];
        // split at the last sign that is not leading
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (parse_rational(&body[..i])?, &body[i..]),
            None => (Rational::zero(), body),
        };
        let im = match im {
            "" | "+" => Rational::one(),
            "-" => -Rational::one(),
            other => parse_rational(other.trim_start_matches('+'))?,
        };
        Some(GaussRational::new(re, im))
    }
}

impl Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

impl Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.0.im) {
            return write!(f, "{}", format_rational(&self.0.re));
        }
        let im = if self.0.im.is_negative() {
            format!("-{}", format_rational(&-self.0.im.clone()))
        } else {
            format!("+{}", format_rational(&self.0.im))
        };
        if Zero::is_zero(&self.0.re) {
            write!(f, "{}i", im.trim_start_matches('+'))
        } else {
            write!(f, "{}{}i", format_rational(&self.0.re), im)
        }
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussRational(self.0 + o.0)
    }
}
impl Sub for GaussRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussRational(self.0 - o.0)
    }
}
impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussRational(self.0 * o.0)
    }
}
impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRational(-self.0)
    }
}

impl Ring for GaussRational {
    fn zero_like(&self) -> Self {
        GaussRational::from_rational(Rational::zero())
    }
    fn one_like(&self) -> Self {
        GaussRational::from_rational(Rational::one())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.0.re) && Zero::is_zero(&self.0.im)
    }
    fn scale(&self, q: &Rational) -> Self {
        GaussRational::new(&self.0.re * q, &self.0.im * q)
    }
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Field for GaussRational {
    fn inv(&self) -> Option<Self> {
        if Ring::is_zero(self) {
            return None;
        }
        let norm = &self.0.re * &self.0.re + &self.0.im * &self.0.im;
        Some(GaussRational::new(&self.0.re / &norm, -(&self.0.im / &norm)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_zero_denominator() {
        assert!(parse_rational("1/0").is_none());
        assert_eq!(parse_rational(" -6/4 ").unwrap(), rat(-3, 2));
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn gaussian_parse_and_invert() {
        let z = GaussRational::parse("1/2-3i").unwrap();
        assert_eq!(z, GaussRational::new(rat(1, 2), int(-3)));
        assert_eq!(GaussRational::parse("i").unwrap(), GaussRational::i());
        assert_eq!(GaussRational::parse("-2/3i").unwrap().im(), &rat(-2, 3));
        let w = z.inv().unwrap();
        assert_eq!(z * w, GaussRational::from_rational(int(1)));
        assert_eq!(GaussRational::i() * GaussRational::i(), GaussRational::from_rational(int(-1)));
    }
}
