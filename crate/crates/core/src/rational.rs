//! Exact rational arithmetic helpers. Every threshold comparison in the crate
//! goes through these; floats only appear when rendering.

use alloc::string::ToString;

use num_rational::Ratio;
use num_traits::Zero;

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Parses `"0.05"`, `"-1.5"`, `"7"`, `"1/20"` or `"1e-3"` exactly.
pub fn parse(text: &str) -> Result<Rational> {
    let bad = || Error::InvalidNumber(text.to_string());
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad())?;
        let d: i128 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(p) => (&t[..p], t[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let mut num: i128 = 0;
    for b in int_part.bytes().chain(frac_part.bytes()) {
        num = num
            .checked_mul(10)
            .and_then(|v| v.checked_add(i128::from(b - b'0')))
            .ok_or_else(bad)?;
    }
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 30 {
        return Err(bad());
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    let mut r = if scale >= 0 {
        Rational::from_integer(num.checked_mul(pow).ok_or_else(bad)?)
    } else {
        Rational::new(num, pow)
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `ceil(r)` for a non-negative rational.
pub fn ceil_nonneg(r: &Rational) -> i128 {
    debug_assert!(*r.numer() >= 0);
    let (n, d) = (*r.numer(), *r.denom());
    (n + d - 1) / d
}

pub fn is_positive(r: &Rational) -> bool {
    !r.is_zero() && *r.numer() > 0
}
