//! Exact rational money.
//!
//! Every valuation, price, transfer and probability in the crate is a
//! [`Money`]. Values are kept in canonical reduced form, so structural
//! equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational amount. Dimensionless ratios reuse the same type.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn one() -> Self {
        Money(BigRational::one())
    }

    pub fn from_integer(value: i64) -> Self {
        Money(BigRational::from_integer(BigInt::from(value)))
    }

    /// `numer / denom`, reduced. Panics if `denom` is zero.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Money(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Money(BigRational::new(numer, denom))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    /// Always positive.
    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Money(self.0.abs())
    }

    /// `(a + b) / 2`.
    pub fn midpoint(a: &Money, b: &Money) -> Self {
        (a + b) / Money::from_integer(2)
    }

    /// Lossy conversion for display and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Fixed-point decimal rendering with `places` fractional digits,
    /// rounding half away from zero. Deterministic for a given value.
    pub fn to_decimal_string(&self, places: u32) -> String {
        let scale = BigInt::from(10u32).pow(places);
        let scaled = self.numer() * &scale;
        let (q, r) = scaled.abs().div_rem(self.denom());
        let q = if r * 2 >= *self.denom() { q + 1 } else { q };
        let negative = self.is_negative() && !q.is_zero();
        let digits = q.to_string();
        let body = if places == 0 {
            digits
        } else {
            let width = places as usize + 1;
            let padded = format!("{digits:0>width$}");
            let (int, frac) = padded.split_at(padded.len() - places as usize);
            format!("{int}.{frac}")
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Exact decimal rendering if the value has a terminating expansion.
    pub fn to_exact_decimal(&self) -> Option<String> {
        let mut denom = self.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let (mut twos, mut fives) = (0u32, 0u32);
        while (&denom % &two).is_zero() {
            denom /= &two;
            twos += 1;
        }
        while (&denom % &five).is_zero() {
            denom /= &five;
            fives += 1;
        }
        if !denom.is_one() {
            return None;
        }
        Some(self.to_decimal_string(twos.max(fives)))
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Money {
    fn from(value: i64) -> Self {
        Money::from_integer(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid amount {input:?}: {reason}")]
pub struct ParseMoneyError {
    pub input: String,
    pub reason: &'static str,
}

impl FromStr for Money {
    type Err = ParseMoneyError;

    /// Accepts integers (`12`, `-3`), decimals (`12.50`, `.5`) and
    /// fractions (`3/4`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let fail = |reason| ParseMoneyError {
            input: s.to_string(),
            reason,
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(fail("empty"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| fail("bad numerator"))?;
            let d: BigInt = d.trim().parse().map_err(|_| fail("bad denominator"))?;
            if d.is_zero() {
                return Err(fail("zero denominator"));
            }
            return Ok(Money(BigRational::new(n, d)));
        }
        let (negative, body) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(fail("no digits"));
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(fail("not a decimal literal"));
        }
        let digits = format!("{int}{frac}");
        let numer: BigInt = digits.parse().map_err(|_| fail("not a decimal literal"))?;
        let denom = BigInt::from(10u32).pow(frac.len() as u32);
        let value = BigRational::new(numer, denom);
        Ok(Money(if negative { -value } else { value }))
    }
}

impl Serialize for Money {
    /// Integers that fit in `i64` serialize as JSON numbers, terminating
    /// decimals as decimal strings, anything else as `"p/q"`.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_integer() {
            if let Some(v) = self.numer().to_i64() {
                return serializer.serialize_i64(v);
            }
        }
        match self.to_exact_decimal() {
            Some(text) => serializer.serialize_str(&text),
            None => serializer.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Money;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or an exact decimal/fraction string")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Money, E> {
                Ok(Money::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Money, E> {
                Ok(Money(BigRational::from_integer(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Money, E> {
                Err(E::custom(format!(
                    "non-integer number {v} is not exact; write it as a decimal string"
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Money, E> {
                v.parse().map_err(E::custom)
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Money> for Money {
            type Output = Money;
            fn $method(self, rhs: Money) -> Money {
                Money(self.0.$method(rhs.0))
            }
        }
        impl $trait<&Money> for Money {
            type Output = Money;
            fn $method(self, rhs: &Money) -> Money {
                Money(self.0.$method(&rhs.0))
            }
        }
        impl $trait<Money> for &Money {
            type Output = Money;
            fn $method(self, rhs: Money) -> Money {
                Money((&self.0).$method(rhs.0))
            }
        }
        impl $trait<&Money> for &Money {
            type Output = Money;
            fn $method(self, rhs: &Money) -> Money {
                Money((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Neg for &Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-&self.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Money> for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Money> for Money {
    fn sub_assign(&mut self, rhs: &Money) {
        self.0 -= &rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Money> for Money {
    fn sum<I: Iterator<Item = &'a Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |acc, x| acc + x)
    }
}

/// A money value extended with `+∞`.
///
/// Only used for the "next seller" sentinel; infinity never enters
/// arithmetic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Extended {
    Finite(Money),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&Money> {
        match self {
            Extended::Finite(m) => Some(m),
            Extended::PosInfinity => None,
        }
    }

    /// `self <= other`.
    pub fn le_money(&self, other: &Money) -> bool {
        match self {
            Extended::Finite(m) => m <= other,
            Extended::PosInfinity => false,
        }
    }

    /// `min(self, other)`, which is always finite.
    pub fn min_money(&self, other: &Money) -> Money {
        match self {
            Extended::Finite(m) if m < other => m.clone(),
            _ => other.clone(),
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::PosInfinity) => Ordering::Less,
            (Extended::PosInfinity, Extended::Finite(_)) => Ordering::Greater,
            (Extended::PosInfinity, Extended::PosInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(m) => write!(f, "{m}"),
            Extended::PosInfinity => f.write_str("+inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;
    use proptest::prelude::*;

    fn m(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn parses_integers_decimals_and_fractions() {
        assert_eq!(m("12"), Money::from_integer(12));
        assert_eq!(m("-3"), Money::from_integer(-3));
        assert_eq!(m("12.50"), Money::ratio(25, 2));
        assert_eq!(m(".5"), Money::ratio(1, 2));
        assert_eq!(m("3/6"), Money::ratio(1, 2));
        assert_eq!(m("-0.125"), Money::ratio(-1, 8));
        assert!("".parse::<Money>().is_err());
        assert!("1e3".parse::<Money>().is_err());
        assert!("1/0".parse::<Money>().is_err());
        assert!("-".parse::<Money>().is_err());
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Money::ratio(2, 3).to_decimal_string(4), "0.6667");
        assert_eq!(Money::ratio(-2, 3).to_decimal_string(2), "-0.67");
        assert_eq!(Money::ratio(-1, 1000).to_decimal_string(2), "0.00");
        assert_eq!(Money::from_integer(7).to_decimal_string(0), "7");
        assert_eq!(Money::ratio(5, 8).to_exact_decimal().as_deref(), Some("0.625"));
        assert_eq!(Money::ratio(1, 3).to_exact_decimal(), None);
    }

    #[test]
    fn extended_ordering() {
        let five = Extended::Finite(Money::from_integer(5));
        assert!(five < Extended::PosInfinity);
        assert!(five.le_money(&Money::from_integer(5)));
        assert!(!Extended::PosInfinity.le_money(&Money::from_integer(1_000_000)));
        assert_eq!(
            Extended::PosInfinity.min_money(&Money::from_integer(9)),
            Money::from_integer(9)
        );
        assert_eq!(five.min_money(&Money::from_integer(9)), Money::from_integer(5));
    }

    fn canonical(x: &Money) -> bool {
        x.denom().is_positive() && x.numer().gcd(x.denom()) == BigInt::one()
            || (x.numer().is_zero() && x.denom().is_one())
    }

    proptest! {
        #[test]
        fn arithmetic_stays_canonical(
            a in -1000i64..1000, b in 1i64..200, c in -1000i64..1000, d in 1i64..200
        ) {
            let x = Money::ratio(a, b);
            let y = Money::ratio(c, d);
            for r in [&x + &y, &x - &y, &x * &y, -x.clone()] {
                prop_assert!(canonical(&r));
            }
            if !y.is_zero() {
                prop_assert!(canonical(&(&x / &y)));
            }
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
        }

        #[test]
        fn parse_display_round_trip(a in -100_000i64..100_000, b in 1i64..500) {
            let x = Money::ratio(a, b);
            prop_assert_eq!(x.to_string().parse::<Money>().unwrap(), x.clone());
            if let Some(dec) = x.to_exact_decimal() {
                prop_assert_eq!(dec.parse::<Money>().unwrap(), x);
            }
        }
    }
}
