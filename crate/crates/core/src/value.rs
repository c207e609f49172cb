//! Exact fixed-point values and extended distances.
//!
//! All inputs, outputs, thresholds and distances are carried as signed
//! integers counting millionths, so comparisons against κ thresholds are exact
//! and never depend on binary floating point rounding.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::Error;

/// Number of fractional digits a [`Value`] can represent.
pub const DECIMALS: u32 = 6;
const SCALE: i64 = 1_000_000;

/// A decimal number with six fractional digits of exact precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Value(i64);

impl Value {
    pub const ZERO: Value = Value(0);

    pub const fn from_micros(micros: i64) -> Self {
        Value(micros)
    }

    pub const fn from_int(v: i64) -> Self {
        Value(v * SCALE)
    }

    pub const fn micros(self) -> i64 {
        self.0
    }

    /// Rounds a float to the nearest representable value.
    pub fn from_f64(v: f64) -> Self {
        Value((v * SCALE as f64).round() as i64)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn abs_diff(self, other: Value) -> Value {
        Value((self.0 - other.0).abs())
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Count of significant fractional digits in the shortest decimal
    /// rendering, e.g. `1.123` has three and `2.50` has one.
    pub fn decimals(self) -> u32 {
        let mut frac = (self.0 % SCALE).abs();
        if frac == 0 {
            return 0;
        }
        let mut digits = DECIMALS;
        while frac % 10 == 0 {
            frac /= 10;
            digits -= 1;
        }
        digits
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        Value(self.0 + rhs.0)
    }
}

impl Sub for Value {
    type Output = Value;
    fn sub(self, rhs: Value) -> Value {
        Value(self.0 - rhs.0)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let int = abs / SCALE as u64;
        let frac = abs % SCALE as u64;
        if frac == 0 {
            return write!(f, "{sign}{int}");
        }
        let digits = format!("{frac:06}");
        write!(f, "{sign}{int}.{}", digits.trim_end_matches('0'))
    }
}

impl FromStr for Value {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::Parse(format!("invalid decimal `{s}`"));
        let t = s.trim();
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let frac_trimmed = frac_part.trim_end_matches('0');
        if frac_trimmed.len() > DECIMALS as usize {
            return Err(Error::Parse(format!(
                "decimal `{s}` has more than {DECIMALS} fractional digits"
            )));
        }
        let int: i64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let mut frac: i64 = 0;
        for (k, b) in frac_trimmed.bytes().enumerate() {
            frac += i64::from(b - b'0') * 10_i64.pow(DECIMALS - 1 - k as u32);
        }
        let micros = int
            .checked_mul(SCALE)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Ok(Value(if neg { -micros } else { micros }))
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A distance that may be infinite.
///
/// `Infinite` orders above every finite distance; it only ever arises from the
/// distance rules for mismatched symbol kinds, never from arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dist {
    Finite(Value),
    Infinite,
}

impl Dist {
    pub const ZERO: Dist = Dist::Finite(Value::ZERO);

    pub fn within(self, kappa: Value) -> bool {
        match self {
            Dist::Finite(d) => d <= kappa,
            Dist::Infinite => false,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dist::Infinite)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dist::Finite(v) => write!(f, "{v}"),
            Dist::Infinite => f.write_str("inf"),
        }
    }
}
