//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::sync::OnceLock;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar the model code is generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`.
    fn lit(x: f64) -> Self;

    /// `ln(n!)` through the log-gamma function.
    fn ln_factorial(n: u64) -> Self {
        Self::lit(ln_factorial_f64(n))
    }
}

impl Real for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }
}

impl Real for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }
}

const TABLE_LEN: usize = 1024;

fn table() -> &'static [f64; TABLE_LEN] {
    static TABLE: OnceLock<[f64; TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for (n, slot) in t.iter_mut().enumerate() {
            *slot = libm::lgamma(n as f64 + 1.0);
        }
        t
    })
}

/// `ln(n!)` in double precision. Small arguments are served from a table of
/// log-gamma values.
pub fn ln_factorial_f64(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        table()[n as usize]
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Numerically stable running `ln(sum(exp(x_i)))`.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp<T> {
    max: T,
    scaled: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn new() -> Self {
        LogSumExp {
            max: T::neg_infinity(),
            scaled: T::zero(),
        }
    }

    pub fn push(&mut self, x: T) {
        if x == T::neg_infinity() {
            return;
        }
        if x > self.max {
            self.scaled = self.scaled * (self.max - x).exp() + T::one();
            self.max = x;
        } else {
            self.scaled = self.scaled + (x - self.max).exp();
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.scaled.ln()
        }
    }
}
