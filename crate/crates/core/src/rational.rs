//! Exact rational numbers and their textual forms.
//!
//! Every mass, value, revenue and surplus in the crate is a [`Rational`]
//! (an arbitrary-precision fraction kept in lowest terms). Strings are read
//! either as `p/q`, as an integer, or as a finite decimal literal such as
//! `0.36`, which is parsed exactly to `9/25`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Builds `num/den` from machine integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let mantissa: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    let value = Rational::new(mantissa, scale);
    Ok(if negative { -value } else { value })
}

/// `p/q` in lowest terms, or just `p` for integers.
pub fn format_exact(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal rendering rounded half away from zero to `places` digits.
pub fn format_decimal(value: &Rational, places: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), places);
    let scaled = value.abs() * Rational::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let rest = scaled - Rational::from_integer(floor.clone());
    let rounded = if rest * int(2) >= Rational::one() {
        floor + BigInt::one()
    } else {
        floor
    };
    let (whole, frac) = rounded.div_rem(&scale);
    let sign = if value.is_negative() && !rounded_is_zero(&whole, &frac) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{:0>width$}", frac.to_string(), width = places)
    }
}

fn rounded_is_zero(whole: &BigInt, frac: &BigInt) -> bool {
    whole.is_zero() && frac.is_zero()
}

/// Exact and six-decimal renderings side by side, e.g. `43/50 (0.860000)`.
pub fn format_dual(value: &Rational) -> String {
    format!("{} ({})", format_exact(value), format_decimal(value, 6))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_rational("0.36").unwrap(), ratio(9, 25));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(" 100/152 ").unwrap(), ratio(25, 38));
    }

    #[test]
    fn malformed_strings_are_rejected() {
        for s in ["", "abc", "1/0", "1.2.3", "1e5", "/", "."] {
            assert!(parse_rational(s).is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn decimal_rendering_rounds_half_away_from_zero() {
        assert_eq!(format_decimal(&ratio(43, 50), 6), "0.860000");
        assert_eq!(format_decimal(&ratio(1, 3), 6), "0.333333");
        assert_eq!(format_decimal(&ratio(2, 3), 6), "0.666667");
        assert_eq!(format_decimal(&ratio(-1, 8), 2), "-0.13");
        assert_eq!(format_decimal(&ratio(-1, 1000), 2), "0.00");
        assert_eq!(format_decimal(&int(3), 0), "3");
    }

    #[test]
    fn exact_rendering_uses_lowest_terms() {
        assert_eq!(format_exact(&ratio(82, 50)), "41/25");
        assert_eq!(format_exact(&ratio(6, 3)), "2");
        assert_eq!(format_dual(&ratio(39, 50)), "39/50 (0.780000)");
    }
}
