use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::math::{entropy_bits, rational_to_f64};

/// Tolerance on the normalisation of floating spectra.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// Schmidt coefficients of a bipartite pure state, sorted non-increasing.
///
/// Rational spectra keep every downstream computation exact where the
/// algorithms allow it; floating spectra take the log-space routes.
#[derive(Clone, PartialEq)]
pub enum SchmidtSpectrum {
    Exact(Vec<BigRational>),
    Float(Vec<f64>),
}

impl SchmidtSpectrum {
    pub fn from_rationals(mut probs: Vec<BigRational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if probs.iter().any(|p| p.is_negative()) {
            return Err(Error::InvalidSpectrum("negative entry".into()));
        }
        let total: BigRational = probs.iter().cloned().sum();
        if !total.is_one() {
            return Err(Error::InvalidSpectrum(format!("entries sum to {} instead of 1", total)));
        }
        probs.sort_by(|a, b| b.cmp(a));
        Ok(Self::Exact(probs))
    }

    /// Convenience for `(numerator, denominator)` pairs.
    pub fn from_fractions(fracs: &[(i64, i64)]) -> Result<Self> {
        let mut probs = Vec::with_capacity(fracs.len());
        for &(a, b) in fracs {
            if b == 0 {
                return Err(Error::InvalidSpectrum("zero denominator".into()));
            }
            probs.push(BigRational::new(BigInt::from(a), BigInt::from(b)));
        }
        Self::from_rationals(probs)
    }

    pub fn from_floats(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidSpectrum("entries must be finite and non-negative".into()));
        }
        let total = crate::math::compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > FLOAT_SUM_TOLERANCE {
            return Err(Error::InvalidSpectrum(format!("entries sum to {} instead of 1", total)));
        }
        probs.sort_by(|a, b| b.total_cmp(a));
        Ok(Self::Float(probs))
    }

    /// The uniform spectrum on `d` levels, exact.
    pub fn uniform(d: usize) -> Self {
        let p = BigRational::new(BigInt::one(), BigInt::from(d));
        Self::Exact(alloc::vec![p; d])
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Exact(v) => v.len(),
            Self::Float(v) => v.len(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact(_))
    }

    pub fn as_rationals(&self) -> Option<&[BigRational]> {
        match self {
            Self::Exact(v) => Some(v),
            Self::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Self::Exact(v) => v.iter().map(rational_to_f64).collect(),
            Self::Float(v) => v.clone(),
        }
    }

    /// True if two entries coincide (the bialternant route is then unavailable).
    pub fn is_degenerate(&self) -> bool {
        match self {
            Self::Exact(v) => v.windows(2).any(|w| w[0] == w[1]),
            Self::Float(v) => v.windows(2).any(|w| w[0] == w[1]),
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        match self {
            Self::Exact(v) => v.iter().all(|x| x.is_positive()),
            Self::Float(v) => v.iter().all(|&x| x > 0.0),
        }
    }

    /// Entanglement entropy in bits.
    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.to_f64())
    }

    /// Drops exactness, keeping the nearest floats.
    pub fn to_float(&self) -> Self {
        Self::Float(self.to_f64())
    }

    pub fn zero_count(&self) -> usize {
        match self {
            Self::Exact(v) => v.iter().filter(|x| x.is_zero()).count(),
            Self::Float(v) => v.iter().filter(|&&x| x == 0.0).count(),
        }
    }
}

impl fmt::Debug for SchmidtSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SchmidtSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
            }
            Self::Float(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", x)?;
                }
            }
        }
        Ok(())
    }
}
