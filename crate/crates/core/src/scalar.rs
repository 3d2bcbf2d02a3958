//! Scalar field abstraction over exact rationals and binary floats.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{HsbError, Result};

/// Arithmetic mode of a matrix. Fixed at construction and carried through
/// every operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    Rational,
    Float,
}

impl Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarMode::Rational => f.write_str("rational"),
            ScalarMode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for ScalarMode {
    type Err = HsbError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" | "exact" => Ok(ScalarMode::Rational),
            "float" => Ok(ScalarMode::Float),
            other => Err(HsbError::Parse(format!("unknown mode '{other}'"))),
        }
    }
}

pub type Rational = BigRational;

pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn from_ratio(num: i64, den: i64) -> Self;

    /// Exact for rationals (dyadic expansion of the float).
    fn from_double(value: f64) -> Self;

    fn as_f64(&self) -> f64;

    /// `eps` in float mode, zero in exact mode.
    fn tol(eps: f64) -> Self;

    fn from_usize(n: usize) -> Self {
        Self::from_ratio(n as i64, 1)
    }

    /// Strictly greater than zero (unlike `Signed::is_positive`, which
    /// treats `0.0` as positive).
    fn is_pos(&self) -> bool {
        *self > Self::zero()
    }

    fn is_neg(&self) -> bool {
        *self < Self::zero()
    }

    fn is_exact() -> bool {
        Self::MODE == ScalarMode::Rational
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    /// Textual form used by the JSON interchange format.
    fn to_text(&self) -> String {
        self.to_string()
    }

    fn parse_text(text: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_double(value: f64) -> Self {
        value
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn tol(eps: f64) -> Self {
        eps
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_number_text(text.trim())
    }
}

impl Scalar for BigRational {
    const MODE: ScalarMode = ScalarMode::Rational;

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_double(value: f64) -> Self {
        BigRational::from_f64(value).unwrap_or_else(BigRational::zero)
    }

    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn tol(_eps: f64) -> Self {
        BigRational::zero()
    }

    fn parse_text(text: &str) -> Result<Self> {
        parse_rational(text.trim())
    }
}

fn parse_number_text(text: &str) -> Result<f64> {
    if let Some((p, q)) = text.split_once('/') {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| HsbError::Parse(format!("bad number '{text}'")))?;
        let q: f64 = q
            .trim()
            .parse()
            .map_err(|_| HsbError::Parse(format!("bad number '{text}'")))?;
        if q == 0.0 {
            return Err(HsbError::Parse(format!("zero denominator in '{text}'")));
        }
        return Ok(p / q);
    }
    text.parse()
        .map_err(|_| HsbError::Parse(format!("bad number '{text}'")))
}

/// Parses `p/q`, an integer, or a finite decimal such as `1.5` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || HsbError::Parse(format!("bad rational '{text}'"));
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(p) = text.parse::<BigInt>() {
        return Ok(BigRational::from_integer(p));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (
            &text[..pos],
            text[pos + 1..].parse::<i32>().map_err(|_| bad())?,
        ),
        None => (text, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}
