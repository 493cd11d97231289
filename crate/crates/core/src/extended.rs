//! Values in the extended real line ℝ ∪ {−∞, +∞}.
//!
//! Limit parameters such as `lim T·β_T` live here: a coefficient that shrinks
//! more slowly than the normalising rate has an infinite limit, and the
//! sign of that infinity still matters.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal<F> {
    Finite(F),
    PlusInf,
    MinusInf,
}

impl<F: Scalar> ExtendedReal<F> {
    pub fn zero() -> Self {
        ExtendedReal::Finite(F::zero())
    }

    /// Maps IEEE infinities onto the infinite variants. NaN is rejected.
    pub fn from_float(x: F) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == F::infinity() {
            Some(ExtendedReal::PlusInf)
        } else if x == F::neg_infinity() {
            Some(ExtendedReal::MinusInf)
        } else {
            Some(ExtendedReal::Finite(x))
        }
    }

    /// Signed infinity with the sign of `x`; zero stays zero.
    pub fn signed_infinity(x: F) -> Self {
        if x > F::zero() {
            ExtendedReal::PlusInf
        } else if x < F::zero() {
            ExtendedReal::MinusInf
        } else {
            ExtendedReal::zero()
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtendedReal::Finite(x) if *x == F::zero())
    }

    pub fn finite(&self) -> Option<F> {
        match *self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// −1, 0 or +1. Defined for every variant.
    pub fn sign(&self) -> i8 {
        match *self {
            ExtendedReal::PlusInf => 1,
            ExtendedReal::MinusInf => -1,
            ExtendedReal::Finite(x) if x > F::zero() => 1,
            ExtendedReal::Finite(x) if x < F::zero() => -1,
            ExtendedReal::Finite(_) => 0,
        }
    }

    pub fn neg(&self) -> Self {
        match *self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(-x),
            ExtendedReal::PlusInf => ExtendedReal::MinusInf,
            ExtendedReal::MinusInf => ExtendedReal::PlusInf,
        }
    }

    pub fn abs(&self) -> Self {
        match *self {
            ExtendedReal::Finite(x) => ExtendedReal::Finite(x.abs()),
            _ => ExtendedReal::PlusInf,
        }
    }

    /// IEEE representation (±∞ for the infinite variants).
    pub fn to_float(&self) -> F {
        match *self {
            ExtendedReal::Finite(x) => x,
            ExtendedReal::PlusInf => F::infinity(),
            ExtendedReal::MinusInf => F::neg_infinity(),
        }
    }

    /// `self + x` for finite `x`; always unambiguous.
    pub fn add_finite(&self, x: F) -> Self {
        match *self {
            ExtendedReal::Finite(a) => ExtendedReal::Finite(a + x),
            other => other,
        }
    }

    /// Reciprocal where unambiguous: `1/±∞ = 0`; `1/0` has no sign and is `None`.
    pub fn recip(&self) -> Option<F> {
        match *self {
            ExtendedReal::Finite(x) if x == F::zero() => None,
            ExtendedReal::Finite(x) => Some(F::one() / x),
            _ => Some(F::zero()),
        }
    }
}

impl<F: Scalar> PartialOrd for ExtendedReal<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_float().partial_cmp(&other.to_float())
    }
}

impl<F: Scalar> From<F> for ExtendedReal<F> {
    fn from(x: F) -> Self {
        ExtendedReal::from_float(x).expect("NaN is not an extended real")
    }
}

impl<F: Scalar> fmt::Display for ExtendedReal<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PlusInf => f.write_str("inf"),
            ExtendedReal::MinusInf => f.write_str("-inf"),
        }
    }
}

// JSON has no infinities: finite values are numbers, the others the strings
// "inf" / "+inf" / "-inf".
impl<F: Scalar> Serialize for ExtendedReal<F> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => x.serialize(s),
            ExtendedReal::PlusInf => s.serialize_str("inf"),
            ExtendedReal::MinusInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de, F: Scalar> Deserialize<'de> for ExtendedReal<F> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct ExtVisitor<F>(std::marker::PhantomData<F>);

        impl<'de, F: Scalar> Visitor<'de> for ExtVisitor<F> {
            type Value = ExtendedReal<F>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"+inf\", \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                ExtendedReal::from_float(F::of(v)).ok_or_else(|| E::custom("NaN"))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                match v.trim().to_ascii_lowercase().as_str() {
                    "inf" | "+inf" | "infinity" | "+infinity" => Ok(ExtendedReal::PlusInf),
                    "-inf" | "-infinity" => Ok(ExtendedReal::MinusInf),
                    other => other
                        .parse::<f64>()
                        .map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
                        .and_then(|x| self.visit_f64(x)),
                }
            }
        }

        d.deserialize_any(ExtVisitor(std::marker::PhantomData))
    }
}
