//! Performance of the universal protocol and of the comparison protocols.
//!
//! Everything is reported per copy (bits/copy) except [`hardy_average_yield`],
//! which returns total ebits as the formula is stated for a single state.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{self, compensated_sum, log2, log2_factorial, log2_sum_exp2, NeumaierSum, LN_2};
use crate::partitions::StaircaseDelta;
use crate::perm::signed_permutations;
use crate::rates::{expansion_coefficients_bbps, shannon_entropy};
use crate::schur::{yield_distribution, YieldDistribution};
use crate::spectrum::SchmidtSpectrum;

/// Slack used when comparing lattice yields against a threshold.
pub const YIELD_TOLERANCE: f64 = 1e-12;

/// A classical law over claimed yields.
pub trait YieldLaw {
    fn copies(&self) -> u32;
    fn local_dimension(&self) -> usize;
    fn outcome_count(&self) -> usize;
    /// `(yield in bits/copy, probability, log2 probability)` of outcome `i`.
    fn outcome(&self, i: usize) -> (f64, f64, f64);

    fn max_yield(&self) -> f64 {
        log2(self.local_dimension() as f64)
    }
}

impl YieldLaw for YieldDistribution {
    fn copies(&self) -> u32 {
        self.n
    }
    fn local_dimension(&self) -> usize {
        self.d
    }
    fn outcome_count(&self) -> usize {
        self.entries.len()
    }
    fn outcome(&self, i: usize) -> (f64, f64, f64) {
        let e = &self.entries[i];
        (e.yield_bits, e.probability, e.log2_probability)
    }
}

/// The type-class law of the known-basis protocol: a type `k` yields
/// `log2(n!/k!)/n` with multinomial probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClassLaw {
    pub n: u32,
    pub d: usize,
    /// `(yield, probability, log2 probability)` per type, in enumeration order.
    pub outcomes: Vec<(f64, f64, f64)>,
}

impl YieldLaw for TypeClassLaw {
    fn copies(&self) -> u32 {
        self.n
    }
    fn local_dimension(&self) -> usize {
        self.d
    }
    fn outcome_count(&self) -> usize {
        self.outcomes.len()
    }
    fn outcome(&self, i: usize) -> (f64, f64, f64) {
        self.outcomes[i]
    }
}

fn check_rate<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<()> {
    if !(0.0..=law.max_yield() + YIELD_TOLERANCE).contains(&rate) {
        return Err(Error::Precondition(alloc::format!(
            "rate {} outside [0, {}]",
            rate,
            law.max_yield()
        )));
    }
    Ok(())
}

fn log2_tail<L: YieldLaw + ?Sized>(law: &L, keep: impl Fn(f64) -> bool) -> f64 {
    let logs: Vec<f64> = (0..law.outcome_count())
        .map(|i| law.outcome(i))
        .filter(|&(x, _, _)| keep(x))
        .map(|(_, _, l)| l)
        .collect();
    log2_sum_exp2(&logs)
}

/// `log2 Pr{X ≤ R}`.
pub fn log2_failure_probability<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    check_rate(law, rate)?;
    Ok(log2_tail(law, |x| x <= rate + YIELD_TOLERANCE))
}

/// `Pr{X ≤ R}`: the yield does not exceed `R`.
pub fn failure_probability<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    Ok(math::exp2(log2_failure_probability(law, rate)?).min(1.0))
}

/// `log2 Pr{X ≥ R}`.
pub fn log2_strong_converse_probability<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    check_rate(law, rate)?;
    Ok(log2_tail(law, |x| x >= rate - YIELD_TOLERANCE))
}

/// `Pr{X ≥ R}`: the claimed yield reaches `R`.
pub fn strong_converse_probability<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    Ok(math::exp2(log2_strong_converse_probability(law, rate)?).min(1.0))
}

/// `log2(1 - F(R))` with `1 - F = Σ_{x<R} (1 - 2^{-n(R-x)}) Q(x)`, free of cancellation.
pub fn log2_total_infidelity<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    check_rate(law, rate)?;
    let n = law.copies() as f64;
    let mut logs = Vec::new();
    for i in 0..law.outcome_count() {
        let (x, _, l) = law.outcome(i);
        if x < rate - YIELD_TOLERANCE && l > f64::NEG_INFINITY {
            let miss = -libm::expm1(-n * (rate - x) * LN_2);
            logs.push(l + log2(miss));
        }
    }
    Ok(log2_sum_exp2(&logs))
}

/// `F(R) = Σ_x min{1, 2^{-n(R-x)}} Q(x)`.
pub fn total_fidelity<L: YieldLaw + ?Sized>(law: &L, rate: f64) -> Result<f64> {
    check_rate(law, rate)?;
    let n = law.copies() as f64;
    let mut acc = NeumaierSum::default();
    for i in 0..law.outcome_count() {
        let (x, q, _) = law.outcome(i);
        let overlap = if x >= rate - YIELD_TOLERANCE { 1.0 } else { math::exp2(-n * (rate - x)) };
        acc.add(overlap * q);
    }
    Ok(acc.value().clamp(0.0, 1.0))
}

/// `E[X]` in bits per copy.
pub fn average_yield<L: YieldLaw + ?Sized>(law: &L) -> f64 {
    compensated_sum((0..law.outcome_count()).map(|i| {
        let (x, q, _) = law.outcome(i);
        x * q
    }))
}

/// `-(1/n) log2` of a probability given by its base-2 logarithm.
pub fn exponent(log2_probability: f64, n: u32) -> f64 {
    -log2_probability / n as f64
}

/// Enumerates compositions of `n` into `d` non-negative parts.
fn for_each_type(n: u32, d: usize, f: &mut dyn FnMut(&[u32])) {
    fn rec(left: u32, slot: usize, cur: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if slot + 1 == cur.len() {
            cur[slot] = left;
            f(cur);
            return;
        }
        for k in (0..=left).rev() {
            cur[slot] = k;
            rec(left - k, slot + 1, cur, f);
        }
    }
    let mut cur = alloc::vec![0u32; d];
    rec(n, 0, &mut cur, f);
}

/// Type-class law of the known-basis protocol.
pub fn bbps_law(n: u32, p: &[f64]) -> Result<TypeClassLaw> {
    if n == 0 {
        return Err(Error::Precondition("need at least one copy".into()));
    }
    let logs: Vec<f64> = p.iter().map(|&x| log2(x)).collect();
    let lf_n = log2_factorial(n as u64);
    let mut outcomes = Vec::new();
    for_each_type(n, p.len(), &mut |k| {
        let mut log_coeff = lf_n;
        let mut log_prob = 0.0;
        for (i, &ki) in k.iter().enumerate() {
            log_coeff -= log2_factorial(ki as u64);
            if ki > 0 {
                log_prob += ki as f64 * logs[i];
            }
        }
        let log_coeff = log_coeff.max(0.0);
        let l = log_prob + log_coeff;
        outcomes.push((log_coeff / n as f64, math::exp2(l), l));
    });
    Ok(TypeClassLaw { n, d: p.len(), outcomes })
}

/// `E_p[(1/n) log2(n!/k!)]` summed exactly over all types.
pub fn bbps_average_yield_exact(n: u32, p: &[f64]) -> Result<f64> {
    Ok(average_yield(&bbps_law(n, p)?))
}

/// Gap between the known-basis and universal average yields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldGap {
    pub n: u32,
    /// `bbps - universal`, bits per copy.
    pub gap: f64,
    /// The analytic constant `C` with `gap ≈ C/n`.
    pub analytic_c: f64,
}

/// The `1/n` constant separating the universal yield from the known-basis yield:
/// `C = -(1/V) Σ_π sgn(π) ∏_i p_i^{δ_{π(i)}} · log2(V ∏_k p_k^{-δ_{π(k)}})`,
/// `V = ∏_{i<j} (p_i - p_j) > 0` for strictly decreasing `p`.
pub fn yield_gap_constant(p: &[f64]) -> Result<f64> {
    let mut p = p.to_vec();
    p.sort_by(|a, b| b.total_cmp(a));
    if p.iter().any(|&x| !(x > 0.0)) || p.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSpectrum("need distinct, strictly positive entries".into()));
    }
    let d = p.len();
    let delta = StaircaseDelta::new(d);
    let delta = delta.as_slice();
    let mut vdm = 1.0;
    for i in 0..d {
        for j in i + 1..d {
            vdm *= p[i] - p[j];
        }
    }
    let mut acc = NeumaierSum::default();
    for (perm, sign) in signed_permutations(d) {
        let mut weight = 1.0;
        let mut log_inner = log2(vdm);
        for i in 0..d {
            let e = delta[perm[i]] as f64;
            weight *= libm::pow(p[i], e);
            log_inner -= e * log2(p[i]);
        }
        acc.add(sign as f64 * weight * log_inner);
    }
    Ok(-acc.value() / vdm)
}

pub fn cstar_bbps_gap(n: u32, p: &SchmidtSpectrum) -> Result<YieldGap> {
    let floats = p.to_f64();
    let analytic_c = yield_gap_constant(&floats)?;
    let universal = average_yield(&yield_distribution(n, p)?);
    let bbps = bbps_average_yield_exact(n, &floats)?;
    Ok(YieldGap { n, gap: bbps - universal, analytic_c })
}

/// A block of equal Schmidt coefficients, in log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtBlock {
    pub log2_value: f64,
    pub log2_multiplicity: f64,
}

/// Expected ebits (total) of the optimal known-state concentration,
/// `Σ_i (α_i - α_{i+1}) T_i log2 T_i` over distinct coefficients, `α_{m+1} = 0`.
pub fn hardy_average_yield_blocks(blocks: &[SchmidtBlock]) -> f64 {
    let mut blocks: Vec<SchmidtBlock> =
        blocks.iter().copied().filter(|b| b.log2_value > f64::NEG_INFINITY).collect();
    blocks.sort_by(|a, b| b.log2_value.total_cmp(&a.log2_value));
    let mut acc = NeumaierSum::default();
    let mut log_t = f64::NEG_INFINITY;
    for (i, b) in blocks.iter().enumerate() {
        log_t = math::log2_add(log_t, b.log2_multiplicity);
        if log_t <= 0.0 {
            continue;
        }
        // log2(α_i - α_{i+1})
        let log_gap = match blocks.get(i + 1) {
            Some(next) => {
                let ratio_ln = (next.log2_value - b.log2_value) * LN_2;
                if ratio_ln == 0.0 {
                    continue;
                }
                b.log2_value + log2(-libm::expm1(ratio_ln))
            }
            None => b.log2_value,
        };
        acc.add(math::exp2(log_gap + log_t) * log_t);
    }
    acc.value()
}

/// [`hardy_average_yield_blocks`] for an explicit coefficient list.
pub fn hardy_average_yield(coefficients: &[f64]) -> f64 {
    let mut sorted: Vec<f64> = coefficients.iter().copied().filter(|&x| x > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut blocks: Vec<SchmidtBlock> = Vec::new();
    for x in sorted {
        match blocks.last_mut() {
            Some(b) if b.log2_value == log2(x) => {
                b.log2_multiplicity = math::log2_add(b.log2_multiplicity, 0.0)
            }
            _ => blocks.push(SchmidtBlock { log2_value: log2(x), log2_multiplicity: 0.0 }),
        }
    }
    hardy_average_yield_blocks(&blocks)
}

/// Per-copy Hardy yield of `|φ⟩^{⊗n}`, grouping coefficients by type class.
pub fn hardy_n_copy_average_yield(n: u32, p: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("need at least one copy".into()));
    }
    let logs: Vec<f64> = p.iter().map(|&x| log2(x)).collect();
    let lf_n = log2_factorial(n as u64);
    let mut blocks = Vec::new();
    for_each_type(n, p.len(), &mut |k| {
        let mut value = 0.0;
        let mut mult = lf_n;
        for (i, &ki) in k.iter().enumerate() {
            if ki > 0 {
                value += ki as f64 * logs[i];
            }
            mult -= log2_factorial(ki as u64);
        }
        blocks.push(SchmidtBlock { log2_value: value, log2_multiplicity: mult.max(0.0) });
    });
    // merge numerically equal coefficients (distinct types with the same value)
    blocks.sort_by(|a, b| b.log2_value.total_cmp(&a.log2_value));
    let mut merged: Vec<SchmidtBlock> = Vec::new();
    for b in blocks {
        match merged.last_mut() {
            Some(m) if (m.log2_value - b.log2_value).abs() <= 1e-12 * (1.0 + b.log2_value.abs()) => {
                m.log2_multiplicity = math::log2_add(m.log2_multiplicity, b.log2_multiplicity)
            }
            _ => merged.push(b),
        }
    }
    Ok(hardy_average_yield_blocks(&merged) / n as f64)
}

/// Second-order expansion of the qubit Hardy yield per copy,
/// `h(p) - log2(n)/(2n) + K/n` with
/// `K = -½ log2(2πe·pq) + r/(1-r)·log2(1/r) + log2(1/(1-r))`, `r = min/max < 1`.
pub fn hardy_qubit_expansion(n: u32, p: &[f64]) -> Result<f64> {
    if p.len() != 2 || !(p[0] > 0.0 && p[1] > 0.0) || p[0] == p[1] {
        return Err(Error::Precondition("qubit expansion needs two distinct positive entries".into()));
    }
    let (hi, lo) = if p[0] > p[1] { (p[0], p[1]) } else { (p[1], p[0]) };
    let r = lo / hi;
    let two_pi_e = 2.0 * core::f64::consts::PI * core::f64::consts::E;
    let k = -0.5 * log2(two_pi_e * hi * lo) + r / (1.0 - r) * log2(1.0 / r) + log2(1.0 / (1.0 - r));
    let nf = n as f64;
    Ok(shannon_entropy(&[hi, lo]) - log2(nf) / (2.0 * nf) + k / nf)
}

/// Upper bound on measure-then-concentrate schemes that spend `c_n` copies on
/// estimation: `((n-c)/n) H(p) + A log2(n-c)/(n-c)`.
pub fn estimation_based_bound(n: u32, c_n: u32, p: &[f64]) -> Result<f64> {
    if c_n >= n {
        return Err(Error::Precondition("need 0 <= c_n < n".into()));
    }
    let a = -(p.len() as f64 - 1.0) / 2.0;
    let m = (n - c_n) as f64;
    Ok(m / n as f64 * shannon_entropy(p) + a * log2(m) / m)
}

/// The `H + A log2(n)/n + B/n` head of the known-basis yield.
pub fn bbps_expansion(n: u32, p: &[f64]) -> Result<f64> {
    let (a, b) = expansion_coefficients_bbps(p)?;
    let nf = n as f64;
    Ok(shannon_entropy(p) + a * log2(nf) / nf + b / nf)
}

/// Which protocol a [`ProtocolReport`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolId {
    Universal,
    Bbps,
    EstimationBased,
    Hardy,
}

impl ProtocolId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Universal => "universal",
            Self::Bbps => "bbps",
            Self::EstimationBased => "estimation-based",
            Self::Hardy => "hardy",
        }
    }
}

/// Yield/distortion figures of one protocol at one `(n, p, R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub protocol: ProtocolId,
    pub n: u32,
    pub rate: f64,
    pub failure_probability: Option<f64>,
    pub strong_converse_probability: Option<f64>,
    pub total_fidelity: Option<f64>,
    pub average_yield: f64,
    pub failure_exponent: Option<f64>,
    pub strong_converse_exponent: Option<f64>,
    pub infidelity_exponent: Option<f64>,
}

/// Full report for any law (universal or type-class).
pub fn law_report<L: YieldLaw + ?Sized>(protocol: ProtocolId, law: &L, rate: f64) -> Result<ProtocolReport> {
    let n = law.copies();
    let lf = log2_failure_probability(law, rate)?;
    let ls = log2_strong_converse_probability(law, rate)?;
    let li = log2_total_infidelity(law, rate)?;
    Ok(ProtocolReport {
        protocol,
        n,
        rate,
        failure_probability: Some(math::exp2(lf).min(1.0)),
        strong_converse_probability: Some(math::exp2(ls).min(1.0)),
        total_fidelity: Some(total_fidelity(law, rate)?),
        average_yield: average_yield(law),
        failure_exponent: Some(exponent(lf, n)),
        strong_converse_exponent: Some(exponent(ls, n)),
        infidelity_exponent: Some(exponent(li, n)),
    })
}

/// Monte Carlo estimate of a probability, with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub samples: u64,
    pub hits: u64,
    pub estimate: f64,
    pub std_error: f64,
}

/// Draws an outcome index by inversion of the cumulative law.
pub fn sample_outcome<L: YieldLaw + ?Sized, R: Rng + ?Sized>(law: &L, cumulative: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * cumulative.last().copied().unwrap_or(1.0);
    let idx = cumulative.partition_point(|&c| c <= u);
    idx.min(law.outcome_count() - 1)
}

pub fn cumulative_probabilities<L: YieldLaw + ?Sized>(law: &L) -> Vec<f64> {
    let mut acc = NeumaierSum::default();
    (0..law.outcome_count())
        .map(|i| {
            acc.add(law.outcome(i).1);
            acc.value()
        })
        .collect()
}

/// Sampled `Pr{X ≤ R}`.
pub fn monte_carlo_failure<L: YieldLaw + ?Sized, R: Rng + ?Sized>(
    law: &L,
    rate: f64,
    samples: u64,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    check_rate(law, rate)?;
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let cumulative = cumulative_probabilities(law);
    let mut hits = 0u64;
    for _ in 0..samples {
        let i = sample_outcome(law, &cumulative, rng);
        if law.outcome(i).0 <= rate + YIELD_TOLERANCE {
            hits += 1;
        }
    }
    let estimate = hits as f64 / samples as f64;
    let std_error = math::sqrt(estimate * (1.0 - estimate) / samples as f64);
    Ok(MonteCarloEstimate { samples, hits, estimate, std_error })
}

/// Dimension of the n-copy space as a float, `d^n`.
pub fn log2_space_dimension(n: u32, d: usize) -> f64 {
    n as f64 * log2(d as f64)
}
