//! Exact rational numbers and the textual token format used by instance files
//! and reports.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number. Always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Builds `num/den` as an exact rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds an integer-valued rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational token `{0}`")]
pub struct TokenError(pub String);

/// Parses `a`, `-a`, `a/b` or a finite decimal such as `0.01` or `-1.5`.
/// Decimals convert exactly (`0.01` is `1/100`).
pub fn parse_rational(token: &str) -> Result<Rational, TokenError> {
    let err = || TokenError(token.to_string());
    let t = token.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num: BigInt = parse_int(num).ok_or_else(err)?;
        let den: BigInt = parse_int(den).ok_or_else(err)?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if (digits.is_empty() && frac.is_empty())
            || !digits.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let mut num = BigInt::zero();
        for c in digits.chars().chain(frac.chars()) {
            num = num * 10 + (c as u8 - b'0');
        }
        if negative {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(num, den));
    }
    let value = parse_int(t).ok_or_else(err)?;
    Ok(Rational::from_integer(value))
}

fn parse_int(s: &str) -> Option<BigInt> {
    let s = s.trim();
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

/// Canonical token: `a` for integers, `a/b` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

/// Decimal approximation with six significant digits, e.g. `3.87000`.
pub fn approx(value: &Rational) -> String {
    let x = to_f64(value);
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        let (q, _) = value.numer().div_rem(value.denom());
        q.to_f64().unwrap_or(f64::NAN)
    })
}

/// `rational (approx)` as printed in reports.
pub fn display_exact(value: &Rational) -> String {
    format!("{} ({})", format_rational(value), approx(value))
}

/// A makespan ratio. Division by a zero optimum with a positive numerator is
/// reported as `Unbounded` rather than failing, since all-zero columns are
/// legal inputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Ratio {
    Finite(Rational),
    Unbounded,
}

impl Ratio {
    /// `numer / denom`, with `0/0 = 1`.
    pub fn of(numer: &Rational, denom: &Rational) -> Ratio {
        if denom.is_zero() {
            if numer.is_zero() {
                Ratio::Finite(Rational::one())
            } else {
                Ratio::Unbounded
            }
        } else {
            Ratio::Finite(numer / denom)
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Ratio::Finite(r) => Some(r),
            Ratio::Unbounded => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Ratio::Finite(r) if r.is_one())
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Ratio::Finite(a), Ratio::Finite(b)) => a.cmp(b),
            (Ratio::Finite(_), Ratio::Unbounded) => Ordering::Less,
            (Ratio::Unbounded, Ratio::Finite(_)) => Ordering::Greater,
            (Ratio::Unbounded, Ratio::Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(r) => f.write_str(&format_rational(r)),
            Ratio::Unbounded => f.write_str("unbounded"),
        }
    }
}

pub(crate) fn is_nonnegative(value: &Rational) -> bool {
    !value.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_token_forms() {
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("2/3").unwrap(), rat(2, 3));
        assert_eq!(parse_rational("4/6").unwrap(), rat(2, 3));
        assert_eq!(parse_rational("0.01").unwrap(), rat(1, 100));
        assert_eq!(parse_rational("3.87").unwrap(), rat(387, 100));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rational("-2/4").unwrap(), rat(-1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in [
            "", "a", "1/0", "1/", "/2", "1.2.3", "1e5", "--1", ".", "1/2/3",
        ] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn formats_canonically() {
        assert_eq!(format_rational(&rat(387, 100)), "387/100");
        assert_eq!(format_rational(&int(4)), "4");
        assert_eq!(format_rational(&rat(-6, 4)), "-3/2");
        assert_eq!(display_exact(&rat(387, 100)), "387/100 (3.87000)");
        assert_eq!(approx(&rat(59, 40)), "1.47500");
        assert_eq!(approx(&int(100)), "100.000");
        assert_eq!(approx(&rat(1, 300)), "0.00333333");
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(Ratio::of(&int(0), &int(0)), Ratio::Finite(int(1)));
        assert_eq!(Ratio::of(&int(3), &int(0)), Ratio::Unbounded);
        assert_eq!(Ratio::of(&int(3), &int(2)), Ratio::Finite(rat(3, 2)));
        assert!(Ratio::Unbounded > Ratio::Finite(int(1000)));
    }

    proptest::proptest! {
        #[test]
        fn token_round_trip(num in -10_000i64..10_000, den in 1i64..10_000) {
            let value = rat(num, den);
            proptest::prop_assert_eq!(parse_rational(&format_rational(&value)).unwrap(), value);
        }
    }
}
