//! Fixed-point currency in picodollars (1e-12).

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const SCALE: i128 = 1_000_000_000_000;
const DECIMALS: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(i128);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid amount {0:?}")]
pub struct ParseMoneyError(String);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_picos(p: i128) -> Self {
        Money(p)
    }

    pub fn picos(self) -> i128 {
        self.0
    }

    /// `self * num / den`, rounded half away from zero.
    pub fn mul_div(self, num: i128, den: i128) -> Money {
        assert!(den != 0, "division by zero");
        let n = self.0 * num;
        let q = n / den;
        let r = n % den;
        let bump = if 2 * r.abs() >= den.abs() { n.signum() * den.signum() } else { 0 };
        Money(q + bump)
    }

    /// Cost of `tokens` at `self` per 1,000 tokens.
    pub fn per_thousand(self, tokens: u64) -> Money {
        self.mul_div(tokens as i128, 1000)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::ZERO, Add::add)
    }
}

impl FromStr for Money {
    type Err = ParseMoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseMoneyError(s.to_string());
        let t = s.trim().trim_start_matches('$');
        let (neg, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if (int.is_empty() && frac.is_empty())
            || frac.len() > DECIMALS
            || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let int: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| err())? };
        let frac_val: i128 = if frac.is_empty() {
            0
        } else {
            frac.parse::<i128>().map_err(|_| err())? * 10i128.pow((DECIMALS - frac.len()) as u32)
        };
        let v = int.checked_mul(SCALE).and_then(|x| x.checked_add(frac_val)).ok_or_else(err)?;
        Ok(Money(if neg { -v } else { v }))
    }
}

impl fmt::Display for Money {
    /// Plain decimal with trailing zeros trimmed, e.g. `0.0098`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        let int = a / SCALE as u128;
        let frac = a % SCALE as u128;
        if frac == 0 {
            return write!(f, "{sign}{int}");
        }
        let digits = format!("{frac:012}");
        write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            F(f64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
            // shortest round-trip repr of the float, then exact decimal parse
            Raw::F(x) => x.to_string().parse().map_err(serde::de::Error::custom),
        }
    }
}
