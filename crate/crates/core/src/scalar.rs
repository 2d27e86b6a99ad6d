//! Floating-point scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for model parameters, covariance blocks and statistics.
///
/// Implemented for `f32` and `f64`. Co-occurrence counts are always kept in
/// `f64`; parameters may be trained and analysed in either precision.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Bit pattern widened to 64 bits, used by the lock-free trainer.
    fn to_bits64(self) -> u64;
    fn from_bits64(bits: u64) -> Self;
    /// Short name used in metadata sidecars.
    const NAME: &'static str;
}

impl Real for f32 {
    const NAME: &'static str = "f32";

    #[inline]
    fn to_bits64(self) -> u64 {
        self.to_bits() as u64
    }

    #[inline]
    fn from_bits64(bits: u64) -> Self {
        f32::from_bits(bits as u32)
    }
}

impl Real for f64 {
    const NAME: &'static str = "f64";

    #[inline]
    fn to_bits64(self) -> u64 {
        self.to_bits()
    }

    #[inline]
    fn from_bits64(bits: u64) -> Self {
        f64::from_bits(bits)
    }
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub fn all_finite<T: Real>(xs: &[T]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_roundtrip() {
        for x in [0.0f64, -1.5, f64::MAX, 1e-300] {
            assert_eq!(f64::from_bits64(x.to_bits64()), x);
        }
        for x in [0.0f32, -1.5, f32::MAX, 1e-30] {
            assert_eq!(f32::from_bits64(x.to_bits64()), x);
        }
    }

    #[test]
    fn dot_and_norm() {
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(norm(&[3.0f32, 4.0]), 5.0);
    }
}
