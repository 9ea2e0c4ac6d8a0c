//! Entropy, relative entropy and the large-deviation rate function
//!
//! ```text
//! D(R‖p) = min { D(q‖p) : H(q) ≥ R }   if H(p) ≤ R
//!          min { D(q‖p) : H(q) ≤ R }   if H(p) > R
//! ```
//!
//! All logarithms are base 2.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{self, compensated_sum, entropy_bits, log2};
use crate::partitions::{log2_dim_v_accurate, YoungIndex};

/// Bisection tolerance on the tilting parameter.
pub const BETA_TOLERANCE: f64 = 1e-10;
const BETA_MAX: f64 = 1e12;

/// `H(p) = -Σ p_i log2 p_i` with `0 log 0 = 0`.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    entropy_bits(p)
}

/// `D(q‖p) = Σ q_i log2(q_i/p_i)`; `+∞` when `q` is not absolutely continuous w.r.t. `p`.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> f64 {
    assert_eq!(q.len(), p.len(), "distributions of different length");
    let mut terms = Vec::with_capacity(q.len());
    for (&qi, &pi) in q.iter().zip(p) {
        if qi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return f64::INFINITY;
        }
        terms.push(qi * (log2(qi) - log2(pi)));
    }
    compensated_sum(terms).max(0.0)
}

/// Which side of `H(p)` the queried rate lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateBranch {
    /// `H(p) ≤ R`: minimise over `H(q) ≥ R` (strong-converse side).
    Above,
    /// `H(p) > R`: minimise over `H(q) ≤ R` (failure side).
    Below,
}

/// A validated `(p, R)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RateQuery {
    p: Vec<f64>,
    rate: f64,
    branch: RateBranch,
}

impl RateQuery {
    pub fn new(p: &[f64], rate: f64) -> Result<Self> {
        if p.is_empty() || p.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidSpectrum("entries must be non-negative".into()));
        }
        if (compensated_sum(p.iter().copied()) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpectrum("entries must sum to 1".into()));
        }
        let max = log2(p.len() as f64);
        if !(0.0..=max + 1e-12).contains(&rate) {
            return Err(Error::Precondition(format!("rate {} outside [0, {}]", rate, max)));
        }
        let mut p = p.to_vec();
        p.sort_by(|a, b| b.total_cmp(a));
        let branch = if shannon_entropy(&p) <= rate { RateBranch::Above } else { RateBranch::Below };
        Ok(Self { p, rate: rate.min(max), branch })
    }

    pub fn branch(&self) -> RateBranch {
        self.branch
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.p
    }
}

/// `q(β)_i ∝ p_i^β` on the support of `p`.
pub fn tilted(p: &[f64], beta: f64) -> Vec<f64> {
    let logs: Vec<f64> = p.iter().map(|&x| if x > 0.0 { beta * math::ln(x) } else { f64::NEG_INFINITY }).collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|&l| math::exp(l - max)).collect();
    let total = compensated_sum(w.iter().copied());
    w.into_iter().map(|x| x / total).collect()
}

/// The rate function `D(R‖p)`, solved along the tilted family `p^β`.
///
/// The constraint set is taken closed. When the largest entry of `p` has
/// multiplicity `m` and `R < log2 m`, the infimum is `-R - log2 max(p)`,
/// attained by any `q` on the maximal entries with `H(q) = R`. Infeasible
/// upper-branch queries (`R` above `log2 |supp p|`) return `+∞`.
pub fn rate_function(query: &RateQuery) -> f64 {
    let p = &query.p;
    let r = query.rate;
    let h = shannon_entropy(p);
    if (r - h).abs() <= 1e-15 {
        return 0.0;
    }
    let support = p.iter().filter(|&&x| x > 0.0).count();
    let entropy_at = |beta: f64| shannon_entropy(&tilted(p, beta));
    let beta = match query.branch {
        RateBranch::Above => {
            let top = log2(support as f64);
            if r > top + 1e-12 {
                return f64::INFINITY;
            }
            if r >= top {
                0.0
            } else {
                // H(q(β)) decreases from log2|supp| at β = 0 to H(p) at β = 1
                bisect(0.0, 1.0, |b| entropy_at(b) > r)
            }
        }
        RateBranch::Below => {
            let pmax = p[0];
            let m = p.iter().filter(|&&x| x == pmax).count();
            if r <= log2(m as f64) {
                return (-r - log2(pmax)).max(0.0);
            }
            let mut hi = 2.0;
            while entropy_at(hi) > r && hi < BETA_MAX {
                hi *= 2.0;
            }
            if entropy_at(hi) > r {
                return (-r - log2(pmax)).max(0.0);
            }
            bisect(1.0, hi, |b| entropy_at(b) > r)
        }
    };
    kl_divergence(&tilted(p, beta), p)
}

/// `D(R‖p)` without building a [`RateQuery`] by hand.
pub fn rate_function_at(p: &[f64], rate: f64) -> Result<f64> {
    Ok(rate_function(&RateQuery::new(p, rate)?))
}

/// Bisection for the boundary of a monotone predicate true at `lo`, false at `hi`.
fn bisect(mut lo: f64, mut hi: f64, above: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > BETA_TOLERANCE * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense-grid minimisation of the constrained relative entropy, for `d ∈ {2, 3}`.
///
/// Independent of the tilted-family solver: it scans the simplex at `step`,
/// then repeatedly zooms into a window around the best feasible point with a
/// 25× finer grid.
pub fn rate_function_grid(p: &[f64], rate: f64, step: f64) -> Result<f64> {
    let query = RateQuery::new(p, rate)?;
    let feasible = |q: &[f64]| {
        let h = shannon_entropy(q);
        match query.branch {
            RateBranch::Above => h >= rate,
            RateBranch::Below => h <= rate,
        }
    };
    let p = query.spectrum();
    let objective = |q: &[f64]| kl_divergence(q, p);
    match p.len() {
        2 => {
            let mut best = (f64::INFINITY, 0.5);
            let (mut lo, mut hi, mut h) = (0.0f64, 1.0f64, step);
            for _ in 0..4 {
                let steps = libm::ceil((hi - lo) / h) as usize;
                for i in 0..=steps {
                    let x = (lo + i as f64 * h).min(hi);
                    let q = [x, 1.0 - x];
                    if feasible(&q) {
                        let v = objective(&q);
                        if v < best.0 {
                            best = (v, x);
                        }
                    }
                }
                if !best.0.is_finite() {
                    break;
                }
                lo = (best.1 - 2.0 * h).max(0.0);
                hi = (best.1 + 2.0 * h).min(1.0);
                h /= 25.0;
            }
            Ok(best.0)
        }
        3 => {
            let mut best = (f64::INFINITY, 1.0 / 3.0, 1.0 / 3.0);
            let mut window = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
            let mut h = step;
            for _ in 0..3 {
                let nx = libm::ceil((window.1 - window.0) / h) as usize;
                let ny = libm::ceil((window.3 - window.2) / h) as usize;
                for i in 0..=nx {
                    let x = (window.0 + i as f64 * h).min(window.1);
                    for j in 0..=ny {
                        let y = (window.2 + j as f64 * h).min(window.3);
                        let z = 1.0 - x - y;
                        if z < -1e-15 {
                            break;
                        }
                        let q = [x, y, z.max(0.0)];
                        if feasible(&q) {
                            let v = objective(&q);
                            if v < best.0 {
                                best = (v, x, y);
                            }
                        }
                    }
                }
                if !best.0.is_finite() {
                    break;
                }
                window = (
                    (best.1 - 2.0 * h).max(0.0),
                    (best.1 + 2.0 * h).min(1.0),
                    (best.2 - 2.0 * h).max(0.0),
                    (best.2 + 2.0 * h).min(1.0),
                );
                h /= 25.0;
            }
            Ok(best.0)
        }
        d => Err(Error::Precondition(format!("grid oracle supports d in {{2, 3}}, got {}", d))),
    }
}

/// Outcome of comparing `log2(dim V_λ)/n` against the type entropy `H(λ/n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionEntropyCheck {
    pub holds: bool,
    /// `|log2(dim V)/n - H(λ/n)|`.
    pub deviation: f64,
    /// `(d² + 2d)/(2n) · log2(n + d)`.
    pub bound: f64,
    /// `bound - deviation`; negative iff the bound is violated.
    pub margin: f64,
}

pub fn dimension_entropy_bound_check(lambda: &YoungIndex) -> Result<DimensionEntropyCheck> {
    let n = lambda.n();
    if n == 0 {
        return Err(Error::Precondition("need n >= 1".into()));
    }
    let d = lambda.d() as f64;
    let nf = n as f64;
    let deviation = (log2_dim_v_accurate(lambda) / nf - lambda.type_entropy()).abs();
    let bound = (d * d + 2.0 * d) / (2.0 * nf) * log2(nf + d);
    Ok(DimensionEntropyCheck { holds: deviation <= bound, deviation, bound, margin: bound - deviation })
}

/// Coefficients of the known-state type-projection yield expansion
/// `H(p) + A log2(n)/n + B/n + o(1/n)`.
pub fn expansion_coefficients_bbps(p: &[f64]) -> Result<(f64, f64)> {
    if p.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Precondition("expansion requires all entries strictly positive".into()));
    }
    let d = p.len() as f64;
    let a = -(d - 1.0) / 2.0;
    let two_pi_e = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    let b = -((d - 1.0) / 2.0 * log2(two_pi_e) + 0.5 * compensated_sum(p.iter().map(|&x| log2(x))));
    Ok((a, b))
}
