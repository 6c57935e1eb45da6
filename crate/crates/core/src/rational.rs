//! Exact rational numbers shared by the formula language and the subject
//! language interpreter.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseRationalError(String);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    /// Rounds to `digits` decimal places, halves away from zero.
    pub fn round_to(&self, digits: u32) -> Self {
        let scale = BigRational::from_integer(BigInt::from(10u32).pow(digits));
        let scaled = &self.0 * &scale;
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let rounded = if scaled.is_negative() { -((-scaled) + half).floor() } else { (scaled + half).floor() };
        Rational(rounded / scale)
    }

    /// Whether the value has a finite decimal expansion.
    pub fn is_decimal(&self) -> bool {
        let mut d = self.0.denom().clone();
        for p in [2u32, 5] {
            let p = BigInt::from(p);
            while (&d % &p).is_zero() {
                d /= &p;
            }
        }
        d.is_one()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `[-]digits[.digits]` and `[-]digits/digits`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if body.is_empty() {
            return Err(err());
        }
        let value = if let Some((n, d)) = body.split_once('/') {
            let n: BigInt = parse_digits(n).ok_or_else(err)?;
            let d: BigInt = parse_digits(d).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            BigRational::new(n, d)
        } else if let Some((int, frac)) = body.split_once('.') {
            let i = parse_digits(int).ok_or_else(err)?;
            let f = parse_digits(frac).ok_or_else(err)?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            BigRational::new(i * &scale + f, scale)
        } else {
            BigRational::from_integer(parse_digits(body).ok_or_else(err)?)
        };
        Ok(Rational(if neg { -value } else { value }))
    }
}

fn parse_digits(s: &str) -> Option<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Rational {
    /// Integers print bare, terminating fractions as decimals, anything
    /// else as `n/d`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            return write!(f, "{}", self.0.numer());
        }
        if !self.is_decimal() {
            return write!(f, "{}/{}", self.0.numer(), self.0.denom());
        }
        let neg = self.0.is_negative();
        let abs = self.0.abs();
        let int = abs.trunc().to_integer();
        let mut frac = abs.fract();
        let ten = BigRational::from_integer(BigInt::from(10));
        let mut digits = String::new();
        while !frac.is_zero() {
            frac *= &ten;
            let d = frac.trunc().to_integer();
            digits.push_str(&d.to_string());
            frac = frac.fract();
        }
        write!(f, "{}{}.{}", if neg { "-" } else { "" }, int, digits)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}
