//! Exact rational rewards.
//!
//! Rewards never pass through floating point. They parse from `"p/q"`,
//! integer, or decimal literals (`"-1.25"`) and always print in lowest terms
//! as `"p/q"`, or `"p"` when the denominator is one.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid reward literal {literal:?}: {reason}")]
pub struct ParseRewardError {
    literal: String,
    reason: &'static str,
}

/// An exact rational reward.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Reward(BigRational);

/// Sign of a reward, the only reward information transducer agents read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardSign {
    Negative,
    Zero,
    Positive,
}

impl RewardSign {
    pub fn index(self) -> usize {
        match self {
            RewardSign::Negative => 0,
            RewardSign::Zero => 1,
            RewardSign::Positive => 2,
        }
    }
}

impl Reward {
    pub fn zero() -> Self {
        Reward(BigRational::zero())
    }

    pub fn one() -> Self {
        Reward(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Reward(BigRational::from_integer(BigInt::from(n)))
    }

    /// `numer / denom` in lowest terms. Panics if `denom` is zero.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "reward denominator must be nonzero");
        Reward(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Reward(r)
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
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

    pub fn sign(&self) -> RewardSign {
        if self.0.is_negative() {
            RewardSign::Negative
        } else if self.0.is_zero() {
            RewardSign::Zero
        } else {
            RewardSign::Positive
        }
    }
}

impl fmt::Display for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Reward {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Reward({self})")
    }
}

impl FromStr for Reward {
    type Err = ParseRewardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseRewardError {
            literal: s.to_string(),
            reason,
        };
        let t = s.trim();
        if t.is_empty() {
            return Err(err("empty literal"));
        }
        if let Some((n, d)) = t.split_once('/') {
            let numer: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
            let denom: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
            if denom.is_zero() {
                return Err(err("zero denominator"));
            }
            return Ok(Reward(BigRational::new(numer, denom)));
        }
        if let Some((int_part, frac_part)) = t.split_once('.') {
            let (negative, int_digits) = match int_part.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
            };
            let all_digits = |x: &str| x.chars().all(|c| c.is_ascii_digit());
            if !all_digits(int_digits) || !all_digits(frac_part) {
                return Err(err("bad decimal digits"));
            }
            if int_digits.is_empty() && frac_part.is_empty() {
                return Err(err("no digits"));
            }
            let digits = format!("{int_digits}{frac_part}");
            let numer: BigInt = if digits.is_empty() {
                BigInt::zero()
            } else {
                digits.parse().map_err(|_| err("bad decimal digits"))?
            };
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            let value = BigRational::new(numer, denom);
            return Ok(Reward(if negative { -value } else { value }));
        }
        let numer: BigInt = t.parse().map_err(|_| err("not a rational literal"))?;
        Ok(Reward(BigRational::from_integer(numer)))
    }
}

impl Serialize for Reward {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Reward {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RewardVisitor;

        impl Visitor<'_> for RewardVisitor {
            type Value = Reward;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational literal string such as \"5/2\" or \"-0.25\", or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Reward, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Reward, E> {
                Ok(Reward::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Reward, E> {
                Ok(Reward(BigRational::from_integer(BigInt::from(v))))
            }
        }

        deserializer.deserialize_any(RewardVisitor)
    }
}

impl Add for Reward {
    type Output = Reward;
    fn add(self, rhs: Reward) -> Reward {
        Reward(self.0 + rhs.0)
    }
}

impl<'a> Add<&'a Reward> for &'a Reward {
    type Output = Reward;
    fn add(self, rhs: &'a Reward) -> Reward {
        Reward(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Reward> for Reward {
    fn add_assign(&mut self, rhs: &Reward) {
        self.0 += &rhs.0;
    }
}

impl Sub for Reward {
    type Output = Reward;
    fn sub(self, rhs: Reward) -> Reward {
        Reward(self.0 - rhs.0)
    }
}

impl<'a> Mul<&'a Reward> for &'a Reward {
    type Output = Reward;
    fn mul(self, rhs: &'a Reward) -> Reward {
        Reward(&self.0 * &rhs.0)
    }
}

impl Neg for Reward {
    type Output = Reward;
    fn neg(self) -> Reward {
        Reward(-self.0)
    }
}

impl Sum for Reward {
    fn sum<I: Iterator<Item = Reward>>(iter: I) -> Reward {
        iter.fold(Reward::zero(), |acc, r| acc + r)
    }
}

impl<'a> Sum<&'a Reward> for Reward {
    fn sum<I: Iterator<Item = &'a Reward>>(iter: I) -> Reward {
        let mut acc = Reward::zero();
        for r in iter {
            acc += r;
        }
        acc
    }
}

impl From<i64> for Reward {
    fn from(n: i64) -> Self {
        Reward::from_integer(n)
    }
}
