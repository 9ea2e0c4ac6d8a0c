//! The measured Young index as an estimate of the entropy of entanglement.

use alloc::vec::Vec;

use crate::error::{precondition, Result};
use crate::math::{self, compensated_sum, log2, log2_sum_exp2};
use crate::partitions::YoungIndex;
use crate::rates::{kl_divergence, rate_function_at, shannon_entropy};
use crate::schur::{pairwise_divergence, yield_distribution, YieldDistribution};
use crate::spectrum::SchmidtSpectrum;

/// Both entropy estimates read off one outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorSample {
    pub n: u32,
    pub index: YoungIndex,
    /// `log2(dim V_λ) / n`.
    pub primary: f64,
    /// `H(λ/n)`.
    pub type_entropy: f64,
}

impl EstimatorSample {
    pub fn new(index: YoungIndex, log2_dim_v: f64) -> Self {
        let n = index.n();
        Self { n, primary: log2_dim_v / n as f64, type_entropy: index.type_entropy(), index }
    }

    /// `(d² + 2d)/(2n) · log2(n + d)`.
    pub fn proximity_bound(&self) -> f64 {
        let d = self.index.d() as f64;
        let n = self.n as f64;
        (d * d + 2.0 * d) / (2.0 * n) * log2(n + d)
    }

    pub fn get(&self, kind: Estimator) -> f64 {
        match kind {
            Estimator::Primary => self.primary,
            Estimator::TypeEntropy => self.type_entropy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Primary,
    TypeEntropy,
}

/// Every outcome with its estimates and base-2 log probability.
pub fn estimator_samples(dist: &YieldDistribution) -> Vec<(EstimatorSample, f64)> {
    dist.entries
        .iter()
        .map(|e| (EstimatorSample::new(e.index.clone(), e.log2_dim_v), e.log2_probability))
        .collect()
}

/// Empirical tail exponents at one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub n: u32,
    /// `log2 Pr{Ĥ ≤ H - δ}`.
    pub log2_lower: f64,
    /// `log2 Pr{Ĥ ≥ H + δ}`.
    pub log2_upper: f64,
    pub lower_exponent: f64,
    pub upper_exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorExponentReport {
    pub entropy: f64,
    pub delta: f64,
    /// `min_{H(q) ≤ H - δ} D(q‖p)`, absent when `H - δ < 0`.
    pub lower_target: Option<f64>,
    /// `min_{H(q) ≥ H + δ} D(q‖p)`, absent when `H + δ > log2 d`.
    pub upper_target: Option<f64>,
    pub points: Vec<TailPoint>,
}

pub fn estimator_error_exponent(
    p: &SchmidtSpectrum,
    delta: f64,
    n_list: &[u32],
    kind: Estimator,
) -> Result<ErrorExponentReport> {
    precondition!(delta > 0.0, "need δ > 0");
    let floats = p.to_f64();
    let h = shannon_entropy(&floats);
    let top = log2(p.d() as f64);
    let lower_target = if h - delta >= 0.0 { Some(rate_function_at(&floats, h - delta)?) } else { None };
    let upper_target = if h + delta <= top { Some(rate_function_at(&floats, h + delta)?) } else { None };
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let samples = estimator_samples(&yield_distribution(n, p)?);
        let tail = |keep: &dyn Fn(f64) -> bool| {
            let logs: Vec<f64> = samples.iter().filter(|(s, _)| keep(s.get(kind))).map(|(_, l)| *l).collect();
            log2_sum_exp2(&logs)
        };
        let log2_lower = tail(&|x| x <= h - delta + 1e-12);
        let log2_upper = tail(&|x| x >= h + delta - 1e-12);
        points.push(TailPoint {
            n,
            log2_lower,
            log2_upper,
            lower_exponent: -log2_lower / n as f64,
            upper_exponent: -log2_upper / n as f64,
        });
    }
    Ok(ErrorExponentReport { entropy: h, delta, lower_target, upper_target, points })
}

/// `Var(-log2 p) = Σ p_i (-log2 p_i - H)²`.
pub fn cramer_rao_bound(p: &[f64]) -> f64 {
    let h = shannon_entropy(p);
    compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| {
        let dev = -log2(x) - h;
        x * dev * dev
    }))
}

/// `Σ p_i (log2 p_i - H)²`, the bound as literally printed; differs from
/// [`cramer_rao_bound`] because `log2 p_i` and `H` carry opposite signs.
pub fn cramer_rao_bound_literal(p: &[f64]) -> f64 {
    let h = shannon_entropy(p);
    compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| {
        let dev = log2(x) - h;
        x * dev * dev
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseReport {
    pub n: u32,
    /// `n · E[(Ĥ_primary - H)²]`.
    pub primary: f64,
    /// `n · E[(Ĥ_type - H)²]`.
    pub type_entropy: f64,
    pub bound: f64,
    pub bound_literal: f64,
}

impl MseReport {
    pub fn ratio(&self, kind: Estimator) -> f64 {
        let v = match kind {
            Estimator::Primary => self.primary,
            Estimator::TypeEntropy => self.type_entropy,
        };
        v / self.bound
    }
}

/// Exact scaled mean-square errors over the outcome law.
pub fn estimator_mse(p: &SchmidtSpectrum, n: u32) -> Result<MseReport> {
    let floats = p.to_f64();
    let h = shannon_entropy(&floats);
    let dist = yield_distribution(n, p)?;
    let samples = estimator_samples(&dist);
    let mse = |kind: Estimator| {
        compensated_sum(samples.iter().map(|(s, l)| {
            let e = s.get(kind) - h;
            math::exp2(*l) * e * e
        })) * n as f64
    };
    Ok(MseReport {
        n,
        primary: mse(Estimator::Primary),
        type_entropy: mse(Estimator::TypeEntropy),
        bound: cramer_rao_bound(&floats),
        bound_literal: cramer_rao_bound_literal(&floats),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeResidual {
    pub n: u32,
    /// `(1/n) D(Q^q_n ‖ Q^p_n)`.
    pub per_copy: f64,
    pub target: f64,
    pub residual: f64,
}

/// Per-copy divergence between the outcome laws of `q` and `p` against `D(q‖p)`.
pub fn divergence_slope_check(p: &SchmidtSpectrum, q: &SchmidtSpectrum, n_list: &[u32]) -> Result<Vec<SlopeResidual>> {
    precondition!(p.d() == q.d(), "spectra differ in dimension");
    precondition!(
        p.is_strictly_positive() && q.is_strictly_positive(),
        "need strictly positive spectra"
    );
    let target = kl_divergence(&q.to_f64(), &p.to_f64());
    n_list
        .iter()
        .map(|&n| {
            let per_copy = pairwise_divergence(n, p, q)? / n as f64;
            Ok(SlopeResidual { n, per_copy, target, residual: (per_copy - target).abs() })
        })
        .collect()
}
