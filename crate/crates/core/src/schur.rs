//! The outcome law of the Young-index measurement on `n` copies.
//!
//! Outcome `λ` occurs with probability `a_λ = dim V_λ · s_λ(p)` and certifies a
//! maximally entangled state of Schmidt rank `dim V_λ`, i.e. a yield of
//! `log2(dim V_λ)/n` bits per copy.
//!
//! Schur polynomials are evaluated by one of three routes:
//!
//! * exact bialternant `det(p_i^{λ_j+δ_j}) / det(p_i^{δ_j})` for distinct rational entries;
//! * exact Jacobi–Trudi `det(h_{λ_i-i+j})` in complete homogeneous polynomials,
//!   which never divides by the Vandermonde and so handles repeated entries;
//! * floating log-space evaluation: the closed form for two levels and the
//!   positive branching rule `s_λ(x_1..x_d) = Σ_{μ≺λ} s_μ(x_1..x_{d-1}) x_d^{|λ|-|μ|}`
//!   for more, which has no cancellation.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::linalg::det_rational;
use crate::math::{self, log2, log2_rational, log2_sum_exp2, rational_to_f64, LN_2};
use crate::partitions::{
    count_young_indices, dim_v_product_with, enumerate_young_indices, log2_dim_v, FactorialTable,
    YoungIndex,
};
use crate::spectrum::SchmidtSpectrum;

/// Largest `n` for which dimensions are carried as exact integers.
pub const EXACT_DIMENSION_MAX_N: u32 = 400;

/// Tuning knobs for [`yield_distribution_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionOptions {
    /// Refuse to enumerate more outcomes than this.
    pub max_partitions: u64,
    /// Rational spectra use exact arithmetic up to this many copies.
    pub exact_max_n: u32,
}

impl Default for DistributionOptions {
    fn default() -> Self {
        Self { max_partitions: 2_000_000, exact_max_n: 30 }
    }
}

fn pow_rational(x: &BigRational, e: u64) -> BigRational {
    Pow::pow(x, BigUint::from(e))
}

/// Bialternant route; refuses repeated entries.
pub fn schur_bialternant(lambda: &YoungIndex, p: &[BigRational]) -> Result<BigRational> {
    check_len(lambda, p.len())?;
    if has_repeat(p) {
        return Err(Error::DegenerateSpectrum("bialternant needs pairwise distinct entries".into()));
    }
    let d = p.len();
    let shifted = lambda.shifted();
    let numer: Vec<Vec<BigRational>> =
        p.iter().map(|pi| shifted.iter().map(|&l| pow_rational(pi, l)).collect()).collect();
    let denom: Vec<Vec<BigRational>> = p
        .iter()
        .map(|pi| (0..d).map(|j| pow_rational(pi, (d - 1 - j) as u64)).collect())
        .collect();
    Ok(det_rational(numer) / det_rational(denom))
}

/// Complete homogeneous symmetric polynomials `h_0..=h_max` at `p`.
pub fn complete_homogeneous(p: &[BigRational], max: usize) -> Vec<BigRational> {
    let mut h = vec![BigRational::zero(); max + 1];
    h[0] = BigRational::one();
    for x in p {
        for k in 1..=max {
            let add = x * &h[k - 1];
            h[k] += add;
        }
    }
    h
}

/// Jacobi–Trudi route; valid for any spectrum.
pub fn schur_jacobi_trudi(lambda: &YoungIndex, p: &[BigRational]) -> Result<BigRational> {
    check_len(lambda, p.len())?;
    let parts = lambda.parts();
    let ell = lambda.length();
    if ell == 0 {
        return Ok(BigRational::one());
    }
    let max = parts[0] as usize + ell;
    let h = complete_homogeneous(p, max);
    let matrix: Vec<Vec<BigRational>> = (0..ell)
        .map(|i| {
            (0..ell)
                .map(|j| {
                    let k = parts[i] as i64 - i as i64 + j as i64;
                    if k < 0 {
                        BigRational::zero()
                    } else {
                        h[k as usize].clone()
                    }
                })
                .collect()
        })
        .collect();
    Ok(det_rational(matrix))
}

/// Exact `s_λ(p)`, choosing the bialternant when entries are distinct.
pub fn schur_polynomial_exact(lambda: &YoungIndex, p: &[BigRational]) -> Result<BigRational> {
    if has_repeat(p) {
        schur_jacobi_trudi(lambda, p)
    } else {
        schur_bialternant(lambda, p)
    }
}

/// `s_λ(p)` for either kind of spectrum.
pub fn schur_polynomial(lambda: &YoungIndex, p: &SchmidtSpectrum) -> Result<f64> {
    match p {
        SchmidtSpectrum::Exact(v) => Ok(rational_to_f64(&schur_polynomial_exact(lambda, v)?)),
        SchmidtSpectrum::Float(v) => {
            check_len(lambda, v.len())?;
            Ok(math::exp2(SchurLogEvaluator::new(v).log2_schur(lambda.parts())))
        }
    }
}

fn check_len(lambda: &YoungIndex, d: usize) -> Result<()> {
    if lambda.d() != d {
        return Err(Error::Precondition(format!(
            "partition {} has {} slots but the spectrum has {} entries",
            lambda,
            lambda.d(),
            d
        )));
    }
    Ok(())
}

fn has_repeat<T: PartialEq>(p: &[T]) -> bool {
    (0..p.len()).any(|i| (i + 1..p.len()).any(|j| p[i] == p[j]))
}

fn pow_log(exponent: u64, log_x: f64) -> f64 {
    if exponent == 0 {
        0.0
    } else {
        exponent as f64 * log_x
    }
}

/// Log-space Schur polynomial evaluation at a fixed floating spectrum, with
/// memoisation of the branching recursion.
#[derive(Debug, Clone)]
pub struct SchurLogEvaluator {
    /// Entries sorted non-increasing; the smallest is peeled off first.
    probs: Vec<f64>,
    logs: Vec<f64>,
    memo: BTreeMap<Vec<u32>, f64>,
}

impl SchurLogEvaluator {
    pub fn new(p: &[f64]) -> Self {
        let mut probs = p.to_vec();
        probs.sort_by(|a, b| b.total_cmp(a));
        let logs = probs.iter().map(|&x| log2(x)).collect();
        Self { probs, logs, memo: BTreeMap::new() }
    }

    /// `log2 s_λ(p)`; `-∞` when the polynomial vanishes.
    pub fn log2_schur(&mut self, parts: &[u32]) -> f64 {
        assert_eq!(parts.len(), self.probs.len());
        self.eval(parts)
    }

    fn eval(&mut self, parts: &[u32]) -> f64 {
        let k = parts.len();
        match k {
            0 => 0.0,
            1 => pow_log(parts[0] as u64, self.logs[0]),
            2 => two_level(parts[0], parts[1], self.probs[0], self.probs[1]),
            _ => {
                if let Some(&v) = self.memo.get(parts) {
                    return v;
                }
                let total: u64 = parts.iter().map(|&x| x as u64).sum();
                let log_last = self.logs[k - 1];
                let mut terms = Vec::new();
                let mut mu = vec![0u32; k - 1];
                self.interlace(parts, 0, &mut mu, total, log_last, &mut terms);
                let v = log2_sum_exp2(&terms);
                self.memo.insert(parts.to_vec(), v);
                v
            }
        }
    }

    fn interlace(
        &mut self,
        lambda: &[u32],
        i: usize,
        mu: &mut Vec<u32>,
        total: u64,
        log_last: f64,
        terms: &mut Vec<f64>,
    ) {
        if i == mu.len() {
            let size: u64 = mu.iter().map(|&x| x as u64).sum();
            let rest = pow_log(total - size, log_last);
            if rest == f64::NEG_INFINITY {
                return;
            }
            let inner = self.eval(&mu.clone());
            if inner > f64::NEG_INFINITY {
                terms.push(inner + rest);
            }
            return;
        }
        for v in lambda[i + 1]..=lambda[i] {
            mu[i] = v;
            self.interlace(lambda, i + 1, mu, total, log_last, terms);
        }
    }
}

/// `log2 s_{(a,b)}(p, q)` via `(pq)^b (p^{m+1} - q^{m+1})/(p - q)`, `m = a - b`.
fn two_level(a: u32, b: u32, x: f64, y: f64) -> f64 {
    let (p, q) = if x >= y { (x, y) } else { (y, x) };
    let m = (a - b) as u64;
    if q == 0.0 {
        return if b == 0 { pow_log(m, log2(p)) } else { f64::NEG_INFINITY };
    }
    let base = b as f64 * (log2(p) + log2(q)) + m as f64 * log2(p);
    if p == q {
        return base + log2((m + 1) as f64);
    }
    let ln_r = math::ln(q) - math::ln(p);
    // Σ_{i=0}^{m} r^i = (1 - r^{m+1}) / (1 - r)
    let num = -libm::expm1((m + 1) as f64 * ln_r);
    let den = -libm::expm1(ln_r);
    base + (math::ln(num) - math::ln(den)) / LN_2
}

/// Exact outcome probability `a_λ = dim V_λ · s_λ(p)`.
pub fn outcome_probability_exact(lambda: &YoungIndex, p: &[BigRational]) -> Result<BigRational> {
    let dim = BigInt::from(dim_v_product_with(lambda, None));
    Ok(schur_polynomial_exact(lambda, p)? * BigRational::from_integer(dim))
}

/// `a_λ` as a float, for either kind of spectrum.
pub fn outcome_probability(lambda: &YoungIndex, p: &SchmidtSpectrum) -> Result<f64> {
    match p {
        SchmidtSpectrum::Exact(v) => Ok(rational_to_f64(&outcome_probability_exact(lambda, v)?)),
        SchmidtSpectrum::Float(v) => {
            check_len(lambda, v.len())?;
            let log_s = SchurLogEvaluator::new(v).log2_schur(lambda.parts());
            Ok(math::exp2(log_s + log2_dim_v(lambda)))
        }
    }
}

/// One outcome of the Young-index measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldEntry {
    pub index: YoungIndex,
    pub probability: f64,
    /// `log2` of the probability; `-∞` for impossible outcomes.
    pub log2_probability: f64,
    /// Present when the spectrum was rational and the exact path was taken.
    pub exact_probability: Option<BigRational>,
    /// Present for `n ≤ EXACT_DIMENSION_MAX_N`.
    pub dim_v: Option<BigUint>,
    pub log2_dim_v: f64,
    /// `log2(dim V)/n`, bits per copy.
    pub yield_bits: f64,
}

/// The classical output law of the protocol: outcome → (probability, yield).
#[derive(Debug, Clone, PartialEq)]
pub struct YieldDistribution {
    pub n: u32,
    pub d: usize,
    /// In canonical (lexicographically descending) partition order.
    pub entries: Vec<YieldEntry>,
}

/// A distinct yield value with its aggregated probability.
#[derive(Debug, Clone, PartialEq)]
pub struct YieldPoint {
    pub yield_bits: f64,
    pub probability: f64,
    pub dim_v: Option<BigUint>,
}

impl YieldDistribution {
    pub fn total_probability(&self) -> f64 {
        math::compensated_sum(self.entries.iter().map(|e| e.probability))
    }

    /// Exact total when every entry carries an exact probability.
    pub fn exact_total(&self) -> Option<BigRational> {
        self.entries.iter().map(|e| e.exact_probability.clone()).sum()
    }

    pub fn is_exact(&self) -> bool {
        self.entries.iter().all(|e| e.exact_probability.is_some())
    }

    pub fn max_yield(&self) -> f64 {
        log2(self.d as f64)
    }

    /// Distinct yields in increasing order, merging outcomes with equal `dim V`.
    pub fn support(&self) -> Vec<YieldPoint> {
        let mut order: Vec<usize> = (0..self.entries.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (&self.entries[a], &self.entries[b]);
            match (&ea.dim_v, &eb.dim_v) {
                (Some(x), Some(y)) => x.cmp(y),
                _ => ea.log2_dim_v.total_cmp(&eb.log2_dim_v),
            }
        });
        let mut out: Vec<YieldPoint> = Vec::new();
        for i in order {
            let e = &self.entries[i];
            if let Some(last) = out.last_mut() {
                let same = match (&last.dim_v, &e.dim_v) {
                    (Some(x), Some(y)) => x == y,
                    _ => (last.yield_bits - e.yield_bits).abs() <= 1e-12,
                };
                if same {
                    last.probability += e.probability;
                    continue;
                }
            }
            out.push(YieldPoint { yield_bits: e.yield_bits, probability: e.probability, dim_v: e.dim_v.clone() });
        }
        out
    }

    pub fn get(&self, lambda: &YoungIndex) -> Option<&YieldEntry> {
        self.entries.iter().find(|e| &e.index == lambda)
    }
}

/// The full outcome law for `n` copies with default options.
pub fn yield_distribution(n: u32, p: &SchmidtSpectrum) -> Result<YieldDistribution> {
    yield_distribution_with(n, p, &DistributionOptions::default())
}

pub fn yield_distribution_with(
    n: u32,
    p: &SchmidtSpectrum,
    options: &DistributionOptions,
) -> Result<YieldDistribution> {
    if n == 0 {
        return Err(Error::Precondition("need at least one copy".into()));
    }
    let d = p.d();
    let count = count_young_indices(n, d);
    if count > options.max_partitions {
        return Err(Error::ResourceCap(format!(
            "{} outcomes for n = {}, d = {} exceeds the cap of {}",
            count, n, d, options.max_partitions
        )));
    }
    let nf = n as f64;
    let table = (n <= EXACT_DIMENSION_MAX_N).then(|| FactorialTable::new(n as u64 + d as u64));
    let exact = match p {
        SchmidtSpectrum::Exact(v) if n <= options.exact_max_n => Some(v.as_slice()),
        _ => None,
    };
    let floats = p.to_f64();
    let mut evaluator = SchurLogEvaluator::new(&floats);
    let mut entries = Vec::with_capacity(count as usize);
    for lambda in enumerate_young_indices(n, d) {
        let dim_v = table.as_ref().map(|t| dim_v_product_with(&lambda, Some(t)));
        let log2_dim = match &dim_v {
            Some(x) => math::log2_biguint(x),
            None => log2_dim_v(&lambda),
        };
        let (exact_probability, log2_probability) = match exact {
            Some(v) => {
                let s = schur_polynomial_exact(&lambda, v)?;
                let a = s * BigRational::from_integer(BigInt::from(dim_v.clone().expect("small n")));
                let l = log2_rational(&a);
                (Some(a), l)
            }
            None => (None, evaluator.log2_schur(lambda.parts()) + log2_dim),
        };
        let probability = match &exact_probability {
            Some(a) => rational_to_f64(a),
            None => math::exp2(log2_probability),
        };
        entries.push(YieldEntry {
            index: lambda,
            probability,
            log2_probability,
            exact_probability,
            dim_v,
            log2_dim_v: log2_dim,
            yield_bits: log2_dim / nf,
        });
    }
    Ok(YieldDistribution { n, d, entries })
}

/// `D(Q^q_n ‖ Q^p_n)` in bits: the divergence of the outcome law under `q`
/// from the law under the reference spectrum `p`.
///
/// Returns `+∞` if `q` puts mass on an outcome that `p` forbids.
pub fn pairwise_divergence(n: u32, p: &SchmidtSpectrum, q: &SchmidtSpectrum) -> Result<f64> {
    if p.d() != q.d() {
        return Err(Error::Precondition("spectra of different dimension".into()));
    }
    let options = DistributionOptions { exact_max_n: 0, ..Default::default() };
    let law_p = yield_distribution_with(n, &p.to_float(), &options)?;
    let law_q = yield_distribution_with(n, &q.to_float(), &options)?;
    let mut acc = math::NeumaierSum::default();
    for (ep, eq) in law_p.entries.iter().zip(&law_q.entries) {
        if eq.probability == 0.0 || eq.log2_probability == f64::NEG_INFINITY {
            continue;
        }
        if ep.log2_probability == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        acc.add(eq.probability * (eq.log2_probability - ep.log2_probability));
    }
    Ok(acc.value().max(0.0))
}
