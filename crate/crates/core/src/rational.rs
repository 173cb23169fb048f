//! Exact rationals and the textual forms used in reports.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde_json::Value;

use crate::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Prints `num/den`, or just `num` for integers.
pub fn format(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `num/den` or a bare integer.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational numerator in `{s}`")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| Error::Parse(format!("bad rational denominator in `{s}`")))?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in `{s}`")));
    }
    Ok(Rational::new(num, den))
}

/// Integers become JSON numbers, everything else a `"num/den"` string.
pub fn to_json(r: &Rational) -> Value {
    if r.is_integer() {
        if let Some(v) = r.numer().to_i64() {
            return Value::from(v);
        }
    }
    Value::from(format(r))
}

pub fn from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(int(i)),
            None => Err(Error::Parse(format!("non-integer number {n}; write rationals as \"num/den\""))),
        },
        Value::String(s) => parse(s),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

/// `[index, num, den]` triple used by the constraint and witness formats.
pub fn term_to_json(index: usize, coeff: &Rational) -> Value {
    let part = |b: &BigInt| match b.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(b.to_string()),
    };
    Value::Array(vec![Value::from(index), part(coeff.numer()), part(coeff.denom())])
}

pub fn term_from_json(v: &Value) -> Result<(usize, Rational)> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::Parse(format!("expected [index, num, den], got {v}")))?;
    let index = arr[0]
        .as_u64()
        .ok_or_else(|| Error::Parse(format!("bad index in {v}")))? as usize;
    let big = |x: &Value| -> Result<BigInt> {
        match x {
            Value::Number(n) => n
                .as_i64()
                .map(BigInt::from)
                .ok_or_else(|| Error::Parse(format!("bad integer {n}"))),
            Value::String(s) => s.parse().map_err(|_| Error::Parse(format!("bad integer {s}"))),
            _ => Err(Error::Parse(format!("bad integer {x}"))),
        }
    };
    let num = big(&arr[1])?;
    let den = big(&arr[2])?;
    if den.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {v}")));
    }
    Ok((index, Rational::new(num, den)))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Float text with 12 significant digits, shortest form after rounding.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded}")
}
