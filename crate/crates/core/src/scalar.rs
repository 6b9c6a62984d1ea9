//! Scalar abstraction shared by the moment, closed-form and enumeration code.
//!
//! Everything that is pure arithmetic is written against [`Scalar`], so the
//! same formula can be evaluated in `f64` for everyday use, in `f32`, or in
//! exact rationals when a test needs equality rather than a tolerance.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Numeric type the estimators and formulas are generic over.
pub trait Scalar:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// False for NaN and infinities. Exact types are always finite.
    fn is_finite_value(&self) -> bool;

    /// `floor(self)` as an unsigned integer, `None` when negative or out of range.
    fn floor_u64(&self) -> Option<u64>;

    /// Lossless integer count to scalar.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("integer counts are representable in every scalar type")
    }

    fn from_usize_count(n: usize) -> Self {
        Self::from_count(n as u64)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn is_finite_value(&self) -> bool {
                self.is_finite()
            }

            fn floor_u64(&self) -> Option<u64> {
                if !self.is_finite() || *self < 0.0 {
                    return None;
                }
                self.floor().to_u64()
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for BigRational {
    fn is_finite_value(&self) -> bool {
        true
    }

    fn floor_u64(&self) -> Option<u64> {
        if self.is_negative() {
            return None;
        }
        self.floor().to_integer().to_u64()
    }

    fn from_count(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

/// `base^exp` by repeated multiplication, exact for rationals.
pub(crate) fn powi<T: Scalar>(base: &T, exp: u32) -> T {
    let mut acc = T::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

pub(crate) fn is_zero<T: Scalar>(x: &T) -> bool {
    x.is_zero()
}
