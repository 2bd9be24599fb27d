//! Exact-arithmetic helpers shared by the oracle and the closed forms.
//!
//! Probabilities entered as decimal text are converted to the exact ratio of
//! their decimal representation (`"0.25"` becomes 1/4, `"0.1"` becomes 1/10)
//! so that downstream identities can be checked without rounding noise.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Shorthand for small rational constants.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses a plain decimal string (`"0.25"`, `"1"`, `"-0.5"`) into the exact
/// rational it denotes. Scientific notation is not accepted.
pub fn from_decimal_str(s: &str) -> Result<BigRational> {
    let err = || Error::InvalidNumber {
        input: s.to_string(),
    };
    let trimmed = s.trim();
    let (negative, digits) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::zero()
    } else {
        int_part.parse().map_err(|_| err())?
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + (c as u8 - b'0');
        denom *= 10;
    }
    if negative {
        numer = -numer;
    }
    Ok(BigRational::new(numer, denom))
}

/// Converts a float through its shortest decimal representation, so 0.2
/// becomes exactly 2/10 rather than the nearest binary fraction.
pub fn from_f64_repr(x: f64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::InvalidNumber {
            input: format!("{x}"),
        });
    }
    from_decimal_str(&format!("{x}"))
}

/// Exact non-negative power with the 0^0 = 1 convention.
pub fn pow(base: &BigRational, exp: u64) -> BigRational {
    let mut result = BigRational::one();
    let mut acc = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= &acc;
        }
        e >>= 1;
        if e > 0 {
            acc = &acc * &acc;
        }
    }
    result
}

/// Nearest-f64 view of an exact value.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Absolute deviation between an exact value and another, as f64.
pub fn abs_diff_f64(a: &BigRational, b: &BigRational) -> f64 {
    to_f64(&(a - b).abs())
}
