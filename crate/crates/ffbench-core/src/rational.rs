//! Exact rational numbers.
//!
//! Every quantity that matters to a certificate (interval endpoints, depths,
//! heights, ratios, recurrence terms) is a `Rational`. There is no floating
//! point anywhere in a verification path. Values are kept in lowest terms
//! with a positive denominator, and serialize as `"p/q"` strings (`"p"` when
//! the denominator is 1).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary-precision rational, always normalized.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    /// Builds `numer/denom`, rejecting a zero denominator.
    pub fn ratio(numer: BigInt, denom: BigInt) -> Result<Self, String> {
        if denom.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// Largest integer `<= self`.
    pub fn floor_int(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "division by zero");
        Rational(self.0.recip())
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// Least common multiple of this value's denominator with `acc`.
    pub fn lcm_denom(&self, acc: &BigInt) -> BigInt {
        acc.lcm(self.denom())
    }

    /// A double at most a couple of ulps away from the true value; denormal
    /// or out-of-range magnitudes fall back to infinities of the right sign.
    pub fn approx_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        match self.0.to_f64() {
            Some(f) if f.is_finite() => f,
            _ => {
                if self.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// A double certainly `<=` the true value.
    pub fn approx_f64_down(&self) -> f64 {
        self.approx_f64().next_down().next_down()
    }

    /// A double certainly `>=` the true value.
    pub fn approx_f64_up(&self) -> f64 {
        self.approx_f64().next_up().next_up()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let numer = BigInt::from_str(num).map_err(|e| format!("bad numerator {num:?}: {e}"))?;
        let denom = match den {
            Some(d) => BigInt::from_str(d).map_err(|e| format!("bad denominator {d:?}: {e}"))?,
            None => BigInt::one(),
        };
        Rational::ratio(numer, denom)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_bigint(n)
    }
}

macro_rules! binop {
    ($Op:ident, $op:ident) => {
        impl $Op for Rational {
            type Output = Rational;
            fn $op(self, rhs: Rational) -> Rational {
                Rational((self.0).$op(rhs.0))
            }
        }
        impl $Op<&Rational> for &Rational {
            type Output = Rational;
            fn $op(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$op(&rhs.0))
            }
        }
        impl $Op<&Rational> for Rational {
            type Output = Rational;
            fn $op(self, rhs: &Rational) -> Rational {
                Rational((self.0).$op(&rhs.0))
            }
        }
        impl $Op<Rational> for &Rational {
            type Output = Rational;
            fn $op(self, rhs: Rational) -> Rational {
                Rational((&self.0).$op(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Shorthand used all over the tests and builders.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

/// Compares `a` with `b/c` style products without materializing divisions:
/// returns the ordering of `lhs_num/lhs_den` vs `rhs_num/rhs_den` assuming
/// positive denominators.
pub fn cmp_frac(lhs_num: &BigInt, lhs_den: &BigInt, rhs_num: &BigInt, rhs_den: &BigInt) -> Ordering {
    debug_assert!(lhs_den.is_positive() && rhs_den.is_positive());
    (lhs_num * rhs_den).cmp(&(rhs_num * lhs_den))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_sign() {
        let r = Rational::new(-4, -6);
        assert_eq!(r, Rational::new(2, 3));
        assert!(r.denom().is_positive());
        assert_eq!(r.to_string(), "2/3");
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("7/3".parse::<Rational>().unwrap(), Rational::new(7, 3));
        assert_eq!("-5".parse::<Rational>().unwrap(), Rational::from_int(-5));
        assert_eq!("10/5".parse::<Rational>().unwrap().to_string(), "2");
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(rat(7, 2).floor_int(), BigInt::from(3));
        assert_eq!(rat(7, 2).ceil_int(), BigInt::from(4));
        assert_eq!(rat(-7, 2).floor_int(), BigInt::from(-4));
        assert_eq!(rat(-7, 2).ceil_int(), BigInt::from(-3));
        assert_eq!(rat(6, 2).floor_int(), BigInt::from(3));
        assert_eq!(rat(6, 2).ceil_int(), BigInt::from(3));
    }

    #[test]
    fn json_round_trip() {
        let r = rat(-355, 113);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"-355/113\"");
        let back: Rational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn arithmetic() {
        let a = rat(1, 3);
        let b = rat(1, 6);
        assert_eq!(&a + &b, rat(1, 2));
        assert_eq!(&a - &b, rat(1, 6));
        assert_eq!(&a * &b, rat(1, 18));
        assert_eq!(&a / &b, rat(2, 1));
        assert_eq!(-&a, rat(-1, 3));
    }
}
