//! Scalar types for squared mask moduli: exact rationals or `f64`.

use std::fmt::Debug;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arithmetic used for λ-arrays and everything derived from them.
pub trait Weight:
    Clone + Debug + PartialEq + Zero + One + Add<Output = Self> + Mul<Output = Self> + Send + Sync + 'static
{
    /// Whether equality tests are exact.
    const EXACT: bool;

    fn from_ratio(num: u64, den: u64) -> Self;

    /// Converts a float weight; exact types keep the float's exact value.
    fn from_f64(x: f64) -> Self;

    fn from_rational(r: BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn is_one_within(&self, tol: f64) -> bool;

    fn is_zero_within(&self, tol: f64) -> bool;

    /// `0 <= self <= 1`, within `tol` for floats.
    fn in_unit_interval(&self, tol: f64) -> bool;

    /// Divides by a sum of weights (used to renormalize simplex points).
    fn div(&self, by: &Self) -> Self;

    /// Textual form used in JSON: `"num/den"` or a float.
    fn to_json(&self) -> serde_json::Value;
}

impl Weight for f64 {
    const EXACT: bool = false;

    fn from_ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn from_rational(r: BigRational) -> Self {
        Weight::to_f64(&r)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_one_within(&self, tol: f64) -> bool {
        (self - 1.0).abs() <= tol
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        self.abs() <= tol
    }

    fn in_unit_interval(&self, tol: f64) -> bool {
        *self >= -tol && *self <= 1.0 + tol
    }

    fn div(&self, by: &Self) -> Self {
        self / by
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

impl Weight for BigRational {
    const EXACT: bool = true;

    fn from_ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(x: f64) -> Self {
        BigRational::from_float(x).expect("finite weight")
    }

    fn from_rational(r: BigRational) -> Self {
        r
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_one_within(&self, _tol: f64) -> bool {
        self.is_one()
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_zero()
    }

    fn in_unit_interval(&self, _tol: f64) -> bool {
        !self.is_negative() && *self <= BigRational::one()
    }

    fn div(&self, by: &Self) -> Self {
        self / by
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()))
    }
}

/// Parses a JSON weight: `"num/den"`, an integer, or a float.
pub fn parse_weight<W: Weight>(value: &serde_json::Value) -> Option<W> {
    match value {
        serde_json::Value::String(s) => {
            let (num, den) = s.split_once('/').unwrap_or((s.as_str(), "1"));
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(W::from_rational(BigRational::new(num, den)))
        }
        serde_json::Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                Some(W::from_ratio(u, 1))
            } else {
                n.as_f64().map(W::from_f64)
            }
        }
        _ => None,
    }
}
