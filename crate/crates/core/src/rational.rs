//! Exact rational scalars and vectors.
//!
//! Everything geometric in this crate runs over [`Rational`]; floats only
//! appear once a statistic vector is handed to the likelihood code.

use std::fmt;
use std::ops::{Index, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3/2"`, `"-7"`, `"1.5"` or `"2.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, Error> {
    let s = text.trim();
    let bad = || Error::InvalidInput(format!("malformed rational {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        // Word-sized fast path: reduce in i128 (no overflow for i64 inputs) and
        // skip BigInt parsing and gcd, which dominate cache reloads.
        if let (Ok(n), Ok(d)) = (num.trim().parse::<i64>(), den.trim().parse::<i64>()) {
            if d == 0 {
                return Err(Error::InvalidInput(format!("zero denominator in {text:?}")));
            }
            let (n, d) = (i128::from(n), i128::from(d));
            let g = n.gcd(&d) * d.signum();
            return Ok(Rational::new_raw(BigInt::from(n / g), BigInt::from(d / g)));
        }
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    if exponent.unsigned_abs() > 4096 {
        return Err(bad());
    }
    let all_digits = format!("{whole}{frac}");
    let mut value = Rational::from_integer(BigInt::from_str(&all_digits).map_err(|_| bad())?);
    let scale = exponent - frac.len() as i32;
    let ten = Rational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if negative { -value } else { value })
}

/// Always `"numerator/denominator"`, including integers (`"3/1"`).
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // to_f64 only fails on overflow of either side.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// A statistic vector `z(g)` or a target `t`, in exact arithmetic.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![Rational::zero(); n])
    }

    pub fn from_integers(values: &[i64]) -> Self {
        RationalVector(values.iter().map(|&v| int(v)).collect())
    }

    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self, Error> {
        items
            .iter()
            .map(|s| parse_rational(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()
            .map(RationalVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn dot(&self, other: &RationalVector) -> Rational {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, factor: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }

    /// Clears denominators, divides by the gcd of the numerators and makes
    /// the first nonzero coordinate positive. Zero stays zero.
    pub fn primitive_integer(&self) -> RationalVector {
        let scaled = self.integer_multiple();
        match scaled.0.iter().find(|c| !c.is_zero()) {
            Some(first) if first.is_negative() => scaled.scale(&-Rational::one()),
            _ => scaled,
        }
    }

    /// Positive multiple with coprime integer coordinates; direction and
    /// orientation are preserved.
    pub fn integer_multiple(&self) -> RationalVector {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .0
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let nums: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let gcd = nums.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
        RationalVector(
            nums.into_iter()
                .map(|v| Rational::from_integer(v / &gcd))
                .collect(),
        )
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(format_rational).collect()
    }
}

impl Index<usize> for RationalVector {
    type Output = Rational;

    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl Sub for &RationalVector {
    type Output = RationalVector;

    fn sub(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        RationalVector::parse(&items).map_err(serde::de::Error::custom)
    }
}

pub(crate) mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        format_rational(r).serialize(s)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            r.as_ref().map(format_rational).serialize(s)
        }
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(
            r: &Option<Vec<Rational>>,
            s: S,
        ) -> Result<S::Ok, S::Error> {
            r.as_ref()
                .map(|v| v.iter().map(format_rational).collect::<Vec<_>>())
                .serialize(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals_to_the_same_value() {
        assert_eq!(parse_rational("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational(" -0.125 ").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("6/4").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("2.5e-3").unwrap(), ratio(1, 400));
        assert_eq!(parse_rational("4").unwrap(), int(4));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn word_sized_fractions_match_the_bigint_path() {
        let big = |n: &str, d: &str| {
            Rational::new(BigInt::from_str(n).unwrap(), BigInt::from_str(d).unwrap())
        };
        for (n, d) in [
            ("6", "-4"),
            ("-6", "-4"),
            ("0", "-7"),
            ("-9223372036854775808", "-1"),
            ("-9223372036854775808", "-9223372036854775808"),
            ("9223372036854775807", "2"),
        ] {
            let parsed = parse_rational(&format!("{n}/{d}")).unwrap();
            assert_eq!(parsed, big(n, d));
            assert_eq!(format_rational(&parsed), format_rational(&big(n, d)));
        }
        assert_eq!(
            parse_rational("99999999999999999999/3").unwrap(),
            big("33333333333333333333", "1")
        );
    }

    #[test]
    fn rejects_malformed_rationals() {
        for bad in ["", "1/0", "abc", "1..2", "1/2/3", "-", "1e", "0x10", "."] {
            assert!(parse_rational(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn formats_as_numerator_over_denominator() {
        assert_eq!(format_rational(&ratio(4, 6)), "2/3");
        assert_eq!(format_rational(&int(-3)), "-3/1");
        assert_eq!(format_rational(&int(0)), "0/1");
    }

    #[test]
    fn primitive_integer_normalizes_scale_and_sign() {
        let v = RationalVector(vec![int(0), ratio(-2, 3), int(1)]);
        assert_eq!(
            v.primitive_integer(),
            RationalVector::from_integers(&[0, 2, -3])
        );
        let w = RationalVector(vec![ratio(-1, 2), int(0)]);
        assert_eq!(
            w.integer_multiple(),
            RationalVector::from_integers(&[-1, 0])
        );
    }
}
