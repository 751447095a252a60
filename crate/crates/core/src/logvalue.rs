//! Nonnegative reals stored as natural-log magnitudes, for quantities such as
//! `(1+λ)^(2^(d-1))` that overflow `f64` long before the dimensions of
//! interest.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Div, Mul};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub zero_flag: bool,
    /// Natural log of the magnitude; ignored when `zero_flag` is set.
    pub log_magnitude: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        zero_flag: true,
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: LogValue = LogValue {
        zero_flag: false,
        log_magnitude: 0.0,
    };

    pub fn from_ln(ln: f64) -> Self {
        if ln == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                zero_flag: false,
                log_magnitude: ln,
            }
        }
    }

    /// # Panics
    /// If `x` is negative or NaN.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue needs a nonnegative value, got {x}");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(x.ln())
        }
    }

    pub fn infinity() -> Self {
        Self::from_ln(f64::INFINITY)
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        if n.is_zero() {
            Self::ZERO
        } else {
            Self::from_ln(ln_biguint(n))
        }
    }

    /// # Panics
    /// If `q` is negative.
    pub fn from_rational(q: &BigRational) -> Self {
        assert!(!q.is_negative(), "LogValue needs a nonnegative value");
        if q.is_zero() {
            return Self::ZERO;
        }
        let num = q.numer().magnitude();
        let den = q.denom().magnitude();
        Self::from_ln(ln_biguint(num) - ln_biguint(den))
    }

    pub fn is_zero(&self) -> bool {
        self.zero_flag
    }

    /// Natural log, `-inf` for zero.
    pub fn ln(&self) -> f64 {
        if self.zero_flag {
            f64::NEG_INFINITY
        } else {
            self.log_magnitude
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.ln().exp()
    }

    pub fn powf(&self, e: f64) -> Self {
        if self.zero_flag {
            if e > 0.0 {
                Self::ZERO
            } else {
                Self::ONE
            }
        } else {
            Self::from_ln(self.log_magnitude * e)
        }
    }

    pub fn add(&self, other: &LogValue) -> LogValue {
        log_sum_exp([*self, *other])
    }

    /// `self - other`, clamped at zero when `other >= self`.
    pub fn saturating_sub(&self, other: &LogValue) -> LogValue {
        if other.zero_flag {
            return *self;
        }
        if self.zero_flag || other.ln() >= self.ln() {
            return Self::ZERO;
        }
        let diff = other.ln() - self.ln();
        Self::from_ln(self.ln() + (-diff.exp()).ln_1p())
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.zero_flag {
            write!(f, "LogValue(0)")
        } else {
            write!(f, "LogValue(exp {})", self.log_magnitude)
        }
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.ln().partial_cmp(&other.ln())
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.zero_flag || rhs.zero_flag {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.log_magnitude + rhs.log_magnitude)
        }
    }
}

impl Div for LogValue {
    type Output = LogValue;

    /// # Panics
    /// On division by zero.
    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.zero_flag, "LogValue division by zero");
        if self.zero_flag {
            LogValue::ZERO
        } else {
            LogValue::from_ln(self.log_magnitude - rhs.log_magnitude)
        }
    }
}

/// Sum of many log-domain terms: shift by the maximum, then Neumaier-compensated
/// summation of the scaled terms.
pub fn log_sum_exp<I: IntoIterator<Item = LogValue>>(terms: I) -> LogValue {
    let terms: Vec<f64> = terms.into_iter().filter(|t| !t.zero_flag).map(|t| t.log_magnitude).collect();
    let Some(max) = terms.iter().copied().reduce(f64::max) else {
        return LogValue::ZERO;
    };
    if max.is_infinite() {
        return LogValue::from_ln(max);
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in &terms {
        let x = (t - max).exp();
        let s = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - s) + x;
        } else {
            comp += (x - s) + sum;
        }
        sum = s;
    }
    LogValue::from_ln(max + (sum + comp).ln())
}

/// Natural log of an arbitrary-precision integer via its top 64 bits.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        if let Some(f) = n.to_f64() {
            if f.is_finite() {
                return f.ln();
            }
        }
    }
    let shift = bits.saturating_sub(64);
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
