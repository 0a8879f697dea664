//! Scalar abstraction shared by the geometry, kernels and samplers.
//!
//! Everything numeric in the crate is written against [`Scalar`], so the
//! same code runs on `f32` and `f64`. Random draws are taken in `f64` and
//! converted, which keeps a single RNG stream regardless of precision.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal or draw into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Scalar")
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln(sum(exp(xs)))` without overflow. Returns `-inf` for an empty or
/// all-`-inf` input.
pub fn log_sum_exp<T: Scalar>(xs: impl IntoIterator<Item = T> + Clone) -> T {
    let max = xs
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    if max == T::neg_infinity() {
        return max;
    }
    let s: T = xs.into_iter().map(|x| (x - max).exp()).sum();
    max + s.ln()
}

/// Streaming `ln(sum(exp(x)))`, rescaling whenever a new maximum arrives.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp<T> {
    max: T,
    sum: T,
}

impl<T: Scalar> Default for LogSumExp<T> {
    fn default() -> Self {
        LogSumExp {
            max: T::neg_infinity(),
            sum: T::zero(),
        }
    }
}

impl<T: Scalar> LogSumExp<T> {
    pub fn push(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x > self.max {
            self.sum = self.sum * (self.max - x).exp() + T::one();
            self.max = x;
        } else {
            self.sum = self.sum + (x - self.max).exp();
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            self.max
        } else {
            self.max + self.sum.ln()
        }
    }
}
