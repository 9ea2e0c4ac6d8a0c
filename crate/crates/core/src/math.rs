//! Floating-point helpers usable without `std`.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub const LN_2: f64 = core::f64::consts::LN_2;

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn exp2(x: f64) -> f64 {
    libm::exp2(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// `log2(x!)` via the log-gamma function.
#[inline]
pub fn log2_factorial(x: u64) -> f64 {
    libm::lgamma(x as f64 + 1.0) / LN_2
}

/// `log2(2^a + 2^b)` without overflow.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(exp2(lo - hi)) / LN_2
}

/// `log2(Σ 2^v)` over a slice of base-2 logarithms.
pub fn log2_sum_exp2(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut acc = NeumaierSum::default();
    for &v in values {
        acc.add(exp2(v - max));
    }
    max + log2(acc.value())
}

/// Compensated (Neumaier) summation with a fixed left-to-right order.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Accurate `log2` of an arbitrary-size positive integer.
pub fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return log2(x.to_f64().unwrap());
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    log2(top.to_f64().unwrap()) + shift as f64
}

/// Accurate `log2` of a positive rational.
pub fn log2_rational(x: &BigRational) -> f64 {
    if !x.is_positive() {
        return f64::NEG_INFINITY;
    }
    log2_biguint(x.numer().magnitude()) - log2_biguint(x.denom().magnitude())
}

/// Nearest `f64` to a rational, robust against huge numerators/denominators.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    if let Some(v) = x.to_f64() {
        if v.is_finite() && v != 0.0 {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * exp2(log2_rational(&x.abs()))
}

/// Shannon entropy in bits of a (possibly unnormalised-by-rounding) probability vector.
pub fn entropy_bits(p: &[f64]) -> f64 {
    compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * log2(x)))
}
