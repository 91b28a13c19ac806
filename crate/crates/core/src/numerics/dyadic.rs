//! Exact dyadic scalars m · 2^e with arbitrary-precision mantissa.
//!
//! The deep-level geometry of the convex-flat construction involves lengths
//! like 2^(−2048) that underflow binary64 but are plain dyadics; all region
//! bookkeeping for that construction is done in this type (or in rationals
//! derived from it) and converted to floating point only at evaluation
//! boundaries.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exact scalar `mantissa · 2^exponent`.
///
/// Canonical form: the mantissa is odd, or the value is zero with exponent 0.
/// Addition, multiplication and comparison are exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicScalar {
    mantissa: BigInt,
    exponent: i64,
}

impl DyadicScalar {
    /// Builds `mantissa · 2^exponent` and normalizes to canonical form.
    pub fn new(mantissa: impl Into<BigInt>, exponent: i64) -> Self {
        let mut s = DyadicScalar {
            mantissa: mantissa.into(),
            exponent,
        };
        s.normalize();
        s
    }

    /// Exact zero.
    pub fn zero() -> Self {
        DyadicScalar {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    /// Exact one.
    pub fn one() -> Self {
        DyadicScalar {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    /// The power 2^e.
    pub fn pow2(e: i64) -> Self {
        DyadicScalar {
            mantissa: BigInt::one(),
            exponent: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    fn normalize(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
    }

    /// Exact conversion to a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as u64,
            )
        }
    }

    /// Exact conversion from a dyadic rational; returns `None` if the
    /// denominator is not a power of two.
    pub fn from_rational(r: &BigRational) -> Option<Self> {
        let den = r.denom();
        if den.is_zero() || den.sign() == Sign::Minus {
            return None;
        }
        let bits = den.bits();
        // power of two iff exactly one set bit
        if den != &(BigInt::one() << (bits - 1)) {
            return None;
        }
        Some(DyadicScalar::new(r.numer().clone(), -((bits - 1) as i64)))
    }

    /// Nearest binary64 value; underflows to 0 and overflows to ±inf.
    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits() as i64;
        // Keep at most 64 significant bits of the mantissa and track the shift.
        let (m, shift) = if bits > 64 {
            ((&self.mantissa >> (bits - 64) as u64), bits - 64)
        } else {
            (self.mantissa.clone(), 0)
        };
        let m = m.to_f64().unwrap_or(f64::NAN);
        let e = self.exponent + shift;
        m * pow2_f64(e)
    }

    /// log2 of the absolute value (f64 approximation); `None` for zero.
    pub fn log2_abs(&self) -> Option<f64> {
        if self.mantissa.is_zero() {
            return None;
        }
        let bits = self.mantissa.bits() as i64;
        let (m, shift) = if bits > 64 {
            ((self.mantissa.abs() >> (bits - 64) as u64), bits - 64)
        } else {
            (self.mantissa.abs(), 0)
        };
        Some(m.to_f64().unwrap().log2() + (self.exponent + shift) as f64)
    }

    pub fn abs(&self) -> Self {
        DyadicScalar {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
        }
    }
}

/// 2^e in f64 without powi overflow surprises for |e| > 1023.
fn pow2_f64(e: i64) -> f64 {
    if e >= 1024 {
        f64::INFINITY
    } else if e < -1200 {
        0.0
    } else {
        (e as f64).exp2()
    }
}

impl Add for &DyadicScalar {
    type Output = DyadicScalar;
    fn add(self, rhs: &DyadicScalar) -> DyadicScalar {
        if self.mantissa.is_zero() {
            return rhs.clone();
        }
        if rhs.mantissa.is_zero() {
            return self.clone();
        }
        let e = self.exponent.min(rhs.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &rhs.mantissa << (rhs.exponent - e) as u64;
        DyadicScalar::new(a + b, e)
    }
}

impl Sub for &DyadicScalar {
    type Output = DyadicScalar;
    fn sub(self, rhs: &DyadicScalar) -> DyadicScalar {
        self + &(-rhs)
    }
}

impl Mul for &DyadicScalar {
    type Output = DyadicScalar;
    fn mul(self, rhs: &DyadicScalar) -> DyadicScalar {
        DyadicScalar::new(&self.mantissa * &rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Neg for &DyadicScalar {
    type Output = DyadicScalar;
    fn neg(self) -> DyadicScalar {
        DyadicScalar {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Add for DyadicScalar {
    type Output = DyadicScalar;
    fn add(self, rhs: DyadicScalar) -> DyadicScalar {
        &self + &rhs
    }
}

impl Sub for DyadicScalar {
    type Output = DyadicScalar;
    fn sub(self, rhs: DyadicScalar) -> DyadicScalar {
        &self - &rhs
    }
}

impl Mul for DyadicScalar {
    type Output = DyadicScalar;
    fn mul(self, rhs: DyadicScalar) -> DyadicScalar {
        &self * &rhs
    }
}

impl Neg for DyadicScalar {
    type Output = DyadicScalar;
    fn neg(self) -> DyadicScalar {
        -&self
    }
}

impl PartialOrd for DyadicScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DyadicScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).mantissa.sign().cmp(&Sign::NoSign)
    }
}

impl fmt::Display for DyadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*2^{}", self.mantissa, self.exponent)
    }
}
