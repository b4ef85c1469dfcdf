//! Exact rational numbers and their textual forms (`p/q`, integers, decimals).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn is_unit_interval(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `INT "/" POSINT`, `INT`, or `DECIMAL`, with an optional sign.
pub fn parse_rational(text: &str) -> Result<Rational, ParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseError::new(0, "empty rational"));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let value = if let Some((n, d)) = body.split_once('/') {
        let n = parse_digits(n, 0)?;
        let d = parse_digits(d, n.to_string().len() + 1)?;
        if d.is_zero() {
            return Err(ParseError::new(s.len(), "zero denominator"));
        }
        BigRational::new(n, d)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if whole.is_empty() && frac.is_empty() {
            return Err(ParseError::new(0, "malformed decimal"));
        }
        let w = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole, 0)?
        };
        let f = if frac.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(frac, whole.len() + 1)?
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        BigRational::new(w * &scale + f, scale)
    } else {
        BigRational::from_integer(parse_digits(body, 0)?)
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(s: &str, offset: usize) -> Result<BigInt, ParseError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseError::new(offset, format!("expected digits, found {s:?}")));
    }
    Ok(s.parse::<BigInt>().expect("digits parse"))
}

/// `p/q` in lowest terms, or the bare integer when `q = 1`.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}
