use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// An element of the extended non-negative rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Finite(Rat),
    Infinity,
}

impl Value {
    pub fn zero() -> Self {
        Value::Finite(Rat::zero())
    }

    pub fn one() -> Self {
        Value::Finite(Rat::one())
    }

    pub fn int(n: i64) -> Self {
        Value::Finite(rat(n))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Finite(r) if r.is_zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Value::Infinity)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Value::Finite(r) => Some(r),
            Value::Infinity => None,
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a + b),
            _ => Value::Infinity,
        }
    }

    /// Product with the convention `0 * inf = inf * 0 = 0`.
    pub fn mul(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Value::Finite(a * b),
            _ if self.is_zero() || other.is_zero() => Value::zero(),
            _ => Value::Infinity,
        }
    }

    pub fn minimum(&self, other: &Value) -> Value {
        std::cmp::min(self, other).clone()
    }

    pub fn maximum(&self, other: &Value) -> Value {
        std::cmp::max(self, other).clone()
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Finite(r) => r.to_f64().unwrap_or(f64::INFINITY),
            Value::Infinity => f64::INFINITY,
        }
    }

    /// Inverse of [`Value::to_f64`]; non-finite inputs map to infinity.
    pub fn from_f64(x: f64) -> Value {
        if x.is_finite() {
            Value::Finite(Rat::from_float(x.max(0.0)).unwrap_or_else(Rat::zero))
        } else {
            Value::Infinity
        }
    }

    /// `|self - other|` on finite values, infinite otherwise.
    pub fn abs_diff(&self, other: &Value) -> Option<Value> {
        match (self, other) {
            (Value::Finite(a), Value::Finite(b)) => Some(Value::Finite((a - b).abs())),
            (Value::Infinity, Value::Infinity) => None,
            _ => Some(Value::Infinity),
        }
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        match self {
            Value::Finite(a) => a.cmp(r),
            Value::Infinity => Ordering::Greater,
        }
    }
}

impl From<Rat> for Value {
    fn from(r: Rat) -> Self {
        Value::Finite(r)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(r) => f.write_str(&fmt_rat(r)),
            Value::Infinity => f.write_str("infinity"),
        }
    }
}

/// Serialized as its display text, e.g. `"2/3"` or `"infinity"`.
impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_annihilates_infinity() {
        assert_eq!(Value::zero().mul(&Value::Infinity), Value::zero());
        assert_eq!(Value::Infinity.mul(&Value::zero()), Value::zero());
        assert_eq!(Value::int(2).mul(&Value::Infinity), Value::Infinity);
    }

    #[test]
    fn ordering_puts_infinity_on_top() {
        assert!(Value::int(1_000_000) < Value::Infinity);
        assert_eq!(Value::Infinity.minimum(&Value::int(3)), Value::int(3));
    }

    #[test]
    fn display() {
        assert_eq!(Value::Finite(ratio(2, 4)).to_string(), "1/2");
        assert_eq!(Value::int(7).to_string(), "7");
        assert_eq!(Value::Infinity.to_string(), "infinity");
    }
}
