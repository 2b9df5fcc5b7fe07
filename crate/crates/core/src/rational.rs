//! Exact rational numbers: parsing from model files and rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("not a rational literal: {0:?}")]
pub struct RationalError(pub String);

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.15"`.
/// Decimals are converted exactly.
pub fn parse_rational(text: &str) -> Result<Rational, RationalError> {
    let err = || RationalError(text.to_string());
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num = parse_int(num.trim()).ok_or_else(err)?;
        let den = parse_int(den.trim()).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.strip_prefix('-').unwrap_or(whole);
        let whole_ok = whole_digits.bytes().all(|b| b.is_ascii_digit());
        let frac_ok = !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit());
        if !whole_ok || !frac_ok || (whole_digits.is_empty() && frac.is_empty()) {
            return Err(err());
        }
        let digits: BigInt = format!("{whole_digits}{frac}").parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let value = Rational::new(digits, scale);
        return Ok(if negative { -value } else { value });
    }
    parse_int(s).map(Rational::from_integer).ok_or_else(err)
}

/// `"a/b"` in lowest terms, or just `"a"` for integers.
pub fn format_exact(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering rounded half-up to `significant` digits, trailing zeros
/// removed: 3/20 gives `"0.15"`, 123/520 gives `"0.236538"` at 6 digits.
pub fn format_decimal(r: &Rational, significant: usize) -> String {
    let significant = significant.max(1);
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let v = r.abs();
    let ten = BigInt::from(10);
    // Smallest e with v < 10^e, so the leading digit has weight 10^(e-1).
    let mut e: i64 = 0;
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while v >= pow10(e) {
        e += 1;
    }
    while v < pow10(e - 1) {
        e -= 1;
    }
    // Scale so the integer part holds exactly `significant` digits.
    let shift = significant as i64 - e;
    let scaled = &v * pow10(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if rem.clone() * 2 >= *scaled.denom() { q + 1 } else { q };
    let mut shift = shift;
    if digits == num_traits::pow(ten.clone(), significant) {
        digits /= &ten;
        shift -= 1;
    }
    let mut s = digits.to_string();
    let out = if shift <= 0 {
        s.extend(std::iter::repeat_n('0', (-shift) as usize));
        s
    } else {
        let shift = shift as usize;
        if s.len() <= shift {
            let pad = "0".repeat(shift - s.len());
            format!("0.{pad}{s}")
        } else {
            let (int_part, frac) = s.split_at(s.len() - shift);
            format!("{int_part}.{frac}")
        }
    };
    let out = if out.contains('.') {
        out.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        out
    };
    if negative {
        format!("-{out}")
    } else {
        out
    }
}

/// Nearest `f64`, used only where sampling needs a float threshold.
pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_decimals_and_integers() {
        assert_eq!(parse_rational("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("2/8").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1").unwrap(), int(1));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["0.3333x", "", "1/0", "a/b", "1.", ".", "1e-3", "0x10", "1/2/3", "--1"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exact_format() {
        assert_eq!(format_exact(&ratio(7, 16)), "7/16");
        assert_eq!(format_exact(&int(1)), "1");
        assert_eq!(format_exact(&int(0)), "0");
    }

    #[test]
    fn decimal_format() {
        assert_eq!(format_decimal(&ratio(3, 20), 6), "0.15");
        assert_eq!(format_decimal(&ratio(123, 520), 6), "0.236538");
        assert_eq!(format_decimal(&ratio(123, 520), 3), "0.237");
        assert_eq!(format_decimal(&ratio(7, 16), 6), "0.4375");
        assert_eq!(format_decimal(&int(1), 6), "1");
        assert_eq!(format_decimal(&ratio(9999995, 10000000), 6), "1");
        assert_eq!(format_decimal(&ratio(1, 3000), 2), "0.00033");
        assert_eq!(format_decimal(&ratio(2, 3), 6), "0.666667");
        assert_eq!(format_decimal(&ratio(1234567, 1), 3), "1230000");
        assert_eq!(format_decimal(&ratio(-1, 8), 6), "-0.125");
        assert_eq!(format_decimal(&int(0), 6), "0");
    }
}
