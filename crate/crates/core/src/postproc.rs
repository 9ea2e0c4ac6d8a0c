//! Classical relabeling of the claimed yield after the measurement.
//!
//! A kernel `Q(y|x)` replaces a true yield `x` by a claimed yield `y`. Claiming
//! `y > x` costs fidelity `1 - 2^{-n(y-x)}`; claiming less is free.

use alloc::string::String;
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::error::{precondition, Error, Result};
use crate::lp::{self, LinearProgram, Relation};
use crate::math::{self, compensated_sum, log2, NeumaierSum};
use crate::protocols::{YieldLaw, YIELD_TOLERANCE};
use crate::schur::YieldDistribution;

/// Slack allowed on row sums of a kernel.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// Largest support handed to the exact LP oracle.
pub const LP_SUPPORT_MAX: usize = 12;

fn same_yield(a: f64, b: f64) -> bool {
    (a - b).abs() <= YIELD_TOLERANCE
}

/// Fidelity loss of claiming `y` when `x` was obtained.
pub fn shift_distortion(n: u32, x: f64, y: f64) -> f64 {
    let delta = y - x;
    if delta <= YIELD_TOLERANCE {
        0.0
    } else {
        -libm::expm1(-(n as f64) * delta * math::LN_2)
    }
}

/// Yield law on an explicit sorted support. Built from a [`YieldDistribution`]
/// it is the lattice `{log2 dim V / n}` plus the point `log2 d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportLaw {
    pub n: u32,
    pub d: usize,
    pub support: Vec<f64>,
    pub probabilities: Vec<f64>,
}

impl SupportLaw {
    pub fn new(n: u32, d: usize, support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        precondition!(n > 0, "need at least one copy");
        precondition!(support.len() == probabilities.len(), "support and probabilities differ in length");
        precondition!(
            support.windows(2).all(|w| w[0] < w[1]),
            "support must be strictly increasing"
        );
        precondition!(probabilities.iter().all(|&q| q >= 0.0), "negative probability");
        let total = compensated_sum(probabilities.iter().copied());
        precondition!((total - 1.0).abs() <= ROW_SUM_TOLERANCE, "probabilities sum to {}", total);
        Ok(Self { n, d, support, probabilities })
    }

    pub fn from_distribution(dist: &YieldDistribution) -> Self {
        let top = log2(dist.d as f64);
        let mut support = Vec::new();
        let mut probabilities = Vec::new();
        for pt in dist.support() {
            support.push(pt.yield_bits);
            probabilities.push(pt.probability);
        }
        match support.last() {
            Some(&last) if same_yield(last, top) => {
                let k = support.len() - 1;
                support[k] = top;
            }
            _ => {
                support.push(top);
                probabilities.push(0.0);
            }
        }
        Self { n: dist.n, d: dist.d, support, probabilities }
    }

    pub fn position(&self, y: f64) -> Option<usize> {
        position(&self.support, y)
    }
}

fn position(sorted: &[f64], y: f64) -> Option<usize> {
    let i = sorted.partition_point(|&s| s < y - YIELD_TOLERANCE);
    (i < sorted.len() && same_yield(sorted[i], y)).then_some(i)
}

impl YieldLaw for SupportLaw {
    fn copies(&self) -> u32 {
        self.n
    }
    fn local_dimension(&self) -> usize {
        self.d
    }
    fn outcome_count(&self) -> usize {
        self.support.len()
    }
    fn outcome(&self, i: usize) -> (f64, f64, f64) {
        let q = self.probabilities[i];
        (self.support[i], q, log2(q))
    }
}

/// `Q(y|x)` with rows indexed by `inputs` and columns by `outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    pub n: u32,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl TransitionKernel {
    pub fn new(n: u32, inputs: Vec<f64>, outputs: Vec<f64>, rows: Vec<Vec<f64>>) -> Result<Self> {
        precondition!(n > 0, "need at least one copy");
        for s in [&inputs, &outputs] {
            precondition!(s.windows(2).all(|w| w[0] < w[1]), "kernel support must be strictly increasing");
        }
        precondition!(rows.len() == inputs.len(), "one row per input yield");
        for (i, row) in rows.iter().enumerate() {
            precondition!(row.len() == outputs.len(), "row {} has the wrong width", i);
            let sum = compensated_sum(row.iter().copied());
            if row.iter().any(|&q| !(q >= 0.0)) || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::NonStochasticKernel(alloc::format!("row {} sums to {}", i, sum)));
            }
        }
        Ok(Self { n, inputs, outputs, rows })
    }

    pub fn identity(n: u32, support: &[f64]) -> Self {
        let rows = (0..support.len())
            .map(|i| (0..support.len()).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { n, inputs: support.to_vec(), outputs: support.to_vec(), rows }
    }

    /// Deterministic kernel sending input `i` to `targets[i]`.
    pub fn deterministic(n: u32, inputs: &[f64], targets: &[f64]) -> Self {
        let outputs = merged_support(inputs.iter().chain(targets).copied());
        let rows = targets
            .iter()
            .map(|&y| {
                let mut row = alloc::vec![0.0; outputs.len()];
                row[position(&outputs, y).expect("target in merged support")] = 1.0;
                row
            })
            .collect();
        Self { n, inputs: inputs.to_vec(), outputs, rows }
    }

    /// Every yield claims `min(x + shift, top)`.
    pub fn uniform_uplift(n: u32, inputs: &[f64], shift: f64, top: f64) -> Self {
        let targets: Vec<f64> = inputs.iter().map(|&x| (x + shift).min(top).max(x)).collect();
        Self::deterministic(n, inputs, &targets)
    }

    /// Each yield below `top` claims `top` with probability `r` and stays otherwise.
    pub fn uplift_to_max(n: u32, inputs: &[f64], r: f64, top: f64) -> Self {
        let outputs = merged_support(inputs.iter().copied().chain(core::iter::once(top)));
        let t = outputs.len() - 1;
        let rows = inputs
            .iter()
            .map(|&x| {
                let mut row = alloc::vec![0.0; outputs.len()];
                let j = position(&outputs, x).expect("input in merged support");
                if j == t {
                    row[t] = 1.0;
                } else {
                    row[j] = 1.0 - r;
                    row[t] = r;
                }
                row
            })
            .collect();
        Self { n, inputs: inputs.to_vec(), outputs, rows }
    }

    /// `Q(y|x) = 0` whenever `y < x`.
    pub fn is_upper_triangular(&self) -> bool {
        self.rows.iter().zip(&self.inputs).all(|(row, &x)| {
            row.iter().zip(&self.outputs).all(|(&q, &y)| q == 0.0 || y >= x - YIELD_TOLERANCE)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().zip(&self.inputs).all(|(row, &x)| {
            row.iter().zip(&self.outputs).all(|(&q, &y)| if same_yield(x, y) { q == 1.0 } else { q == 0.0 })
        })
    }

    /// Index of the output each row sends all its mass to, if deterministic.
    pub fn targets(&self) -> Option<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| row.iter().position(|&q| q == 1.0).map(|j| self.outputs[j]))
            .collect()
    }
}

fn merged_support(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| same_yield(*a, *b));
    v
}

/// Worst-case and average fidelity loss of a relabeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub worst: f64,
    pub average: f64,
}

/// Result of pushing a law through a kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelOutcome {
    /// Law of the claimed yield.
    pub claimed: SupportLaw,
    /// `(true yield, claimed yield, probability)` with positive mass.
    pub joint: Vec<(f64, f64, f64)>,
    pub distortion: DistortionReport,
}

impl KernelOutcome {
    /// Law of the true yield recovered from the joint law.
    pub fn true_marginal(&self, support: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; support.len()];
        for &(x, _, q) in &self.joint {
            if let Some(i) = position(support, x) {
                out[i] += q;
            }
        }
        out
    }
}

pub fn apply_kernel(law: &SupportLaw, kernel: &TransitionKernel) -> Result<KernelOutcome> {
    precondition!(kernel.n == law.n, "kernel is for n = {}, law for n = {}", kernel.n, law.n);
    let mut claimed = alloc::vec![0.0; kernel.outputs.len()];
    let mut joint = Vec::new();
    let mut worst = 0.0f64;
    let mut average = NeumaierSum::default();
    for (&x, &px) in law.support.iter().zip(&law.probabilities) {
        if px == 0.0 {
            continue;
        }
        let Some(i) = position(&kernel.inputs, x) else {
            return Err(Error::Precondition(alloc::format!("kernel does not cover yield {}", x)));
        };
        for (j, (&q, &y)) in kernel.rows[i].iter().zip(&kernel.outputs).enumerate() {
            if q == 0.0 {
                continue;
            }
            let mass = px * q;
            claimed[j] += mass;
            joint.push((x, y, mass));
            let loss = shift_distortion(law.n, x, y);
            worst = worst.max(loss);
            average.add(mass * loss);
        }
    }
    let claimed = SupportLaw {
        n: law.n,
        d: law.d,
        support: kernel.outputs.clone(),
        probabilities: claimed,
    };
    Ok(KernelOutcome {
        claimed,
        joint,
        distortion: DistortionReport { worst, average: average.value().min(worst) },
    })
}

/// A monotone figure of merit `f: [0, log2 d] → [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum YieldMeasure {
    /// `Θ(x - R)` with `Θ(0) = 1`: success probability at rate `R`.
    Step { threshold: f64 },
    /// `x / log2 d`: normalised average yield.
    Linear,
    /// Piecewise-linear through `(x, f(x))` knots, constant beyond the ends.
    Table(Vec<(f64, f64)>),
}

impl YieldMeasure {
    pub fn eval(&self, x: f64, top: f64) -> f64 {
        match self {
            Self::Step { threshold } => {
                if x >= threshold - YIELD_TOLERANCE {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Linear => (x / top).clamp(0.0, 1.0),
            Self::Table(knots) => {
                let i = knots.partition_point(|k| k.0 <= x);
                if i == 0 {
                    knots[0].1
                } else if i == knots.len() {
                    knots[i - 1].1
                } else {
                    let (x0, y0) = knots[i - 1];
                    let (x1, y1) = knots[i];
                    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
                }
            }
        }
    }

    /// Checks monotonicity and range on `grid` (and table knots), plus the end conditions.
    pub fn validate(&self, grid: &[f64], top: f64) -> Result<()> {
        if let Self::Table(knots) = self {
            precondition!(!knots.is_empty(), "empty table");
            precondition!(knots.windows(2).all(|w| w[0].0 < w[1].0), "table abscissae must increase");
            precondition!(self.eval(0.0, top).abs() <= YIELD_TOLERANCE, "table must have f(0) = 0");
        }
        let knots: Vec<f64> = match self {
            Self::Table(k) => k.iter().map(|k| k.0).filter(|x| (0.0..=top).contains(x)).collect(),
            _ => Vec::new(),
        };
        let mut points: Vec<f64> = grid.iter().copied().chain(knots).chain(core::iter::once(top)).collect();
        points.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for &x in &points {
            let v = self.eval(x, top);
            precondition!((0.0..=1.0).contains(&v), "f({}) = {} outside [0, 1]", x, v);
            precondition!(v >= prev - YIELD_TOLERANCE, "f is not monotone at {}", x);
            prev = prev.max(v);
        }
        precondition!((self.eval(top, top) - 1.0).abs() <= YIELD_TOLERANCE, "need f(log2 d) = 1");
        Ok(())
    }
}

/// `E[f(X)]`.
pub fn generalized_yield<L: YieldLaw + ?Sized>(law: &L, f: &YieldMeasure) -> Result<f64> {
    let top = law.max_yield();
    let grid: Vec<f64> = (0..law.outcome_count()).map(|i| law.outcome(i).0).collect();
    f.validate(&grid, top)?;
    Ok(compensated_sum((0..law.outcome_count()).map(|i| {
        let (x, q, _) = law.outcome(i);
        q * f.eval(x, top)
    })))
}

/// A kernel together with the objective it attains.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelChoice {
    pub kernel: TransitionKernel,
    pub value: f64,
}

fn row_objective(n: u32, f: &YieldMeasure, top: f64, lambda: f64, x: f64, y: f64) -> f64 {
    f.eval(y, top) - lambda * shift_distortion(n, x, y)
}

/// Maximises `E[f(Y)] - λ ε̄` over upper-triangular kernels on the law's support.
/// Rows are independent; each takes the smallest best target.
pub fn optimize_weighted_sum(law: &SupportLaw, f: &YieldMeasure, lambda: f64) -> Result<KernelChoice> {
    precondition!(lambda > 1.0, "weight must exceed 1, got {}", lambda);
    let top = law.max_yield();
    f.validate(&law.support, top)?;
    let mut targets = Vec::with_capacity(law.support.len());
    let mut value = NeumaierSum::default();
    for (i, &x) in law.support.iter().enumerate() {
        let mut best = (x, row_objective(law.n, f, top, lambda, x, x));
        for &y in &law.support[i + 1..] {
            let v = row_objective(law.n, f, top, lambda, x, y);
            if v > best.1 + YIELD_TOLERANCE {
                best = (y, v);
            }
        }
        targets.push(best.0);
        value.add(law.probabilities[i] * best.1);
    }
    let kernel = TransitionKernel::deterministic(law.n, &law.support, &targets);
    Ok(KernelChoice { kernel, value: value.value() })
}

/// Smallest `n` for which the identity is optimal at weight `λ` and linear `f`,
/// from `d^{-n} ≤ 1 - 1/λ`.
pub fn identity_threshold(lambda: f64, d: usize) -> Result<f64> {
    precondition!(lambda > 1.0, "weight must exceed 1, got {}", lambda);
    Ok(-log2(1.0 - 1.0 / lambda) / log2(d as f64))
}

/// Best value under `ε ≤ r`: every yield is raised by `Δ' = -log2(1 - r)/n`, capped at `log2 d`.
pub fn optimal_under_worst_constraint(law: &SupportLaw, f: &YieldMeasure, r: f64) -> Result<ConstrainedChoice> {
    precondition!((0.0..1.0).contains(&r), "need 0 <= r < 1, got {}", r);
    let shift = -log2(1.0 - r) / law.n as f64;
    let kernel = if r == 0.0 {
        TransitionKernel::identity(law.n, &law.support)
    } else {
        TransitionKernel::uniform_uplift(law.n, &law.support, shift, law.max_yield())
    };
    constrained_choice(law, f, kernel)
}

/// The uplift-to-`log2 d` kernel with row mass `r`, whose average distortion is at most `r`.
pub fn optimal_under_average_constraint(law: &SupportLaw, f: &YieldMeasure, r: f64) -> Result<ConstrainedChoice> {
    precondition!((0.0..1.0).contains(&r), "need 0 <= r < 1, got {}", r);
    let kernel = if r == 0.0 {
        TransitionKernel::identity(law.n, &law.support)
    } else {
        TransitionKernel::uplift_to_max(law.n, &law.support, r, law.max_yield())
    };
    let choice = constrained_choice(law, f, kernel)?;
    // f ≤ 1 caps the gain at r, which is the λ → 1 end of the Lagrangian bound λ·r
    if choice.improvement > r + 1e-12 || choice.distortion.average > r + 1e-12 {
        return Err(Error::Invariant(alloc::format!(
            "uplift gained {} with distortion {} at r = {}",
            choice.improvement,
            choice.distortion.average,
            r
        )));
    }
    Ok(choice)
}

/// Outcome of a constrained optimisation, with the identity baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedChoice {
    pub kernel: TransitionKernel,
    pub value: f64,
    pub identity_value: f64,
    pub improvement: f64,
    pub distortion: DistortionReport,
}

fn constrained_choice(law: &SupportLaw, f: &YieldMeasure, kernel: TransitionKernel) -> Result<ConstrainedChoice> {
    let identity_value = generalized_yield(law, f)?;
    let outcome = apply_kernel(law, &kernel)?;
    let value = generalized_yield(&outcome.claimed, f)?;
    Ok(ConstrainedChoice {
        kernel,
        value,
        identity_value,
        improvement: value - identity_value,
        distortion: outcome.distortion,
    })
}

/// Guaranteed gain of the average-constrained uplift:
/// `r (1 - f(t)) Pr{X ≤ t}`, returned with `-(1/n) log2 Pr{X > t}`.
pub fn average_constraint_lower_bound(law: &SupportLaw, f: &YieldMeasure, r: f64, t: f64) -> Result<(f64, f64)> {
    let top = law.max_yield();
    precondition!((0.0..=top).contains(&t), "threshold {} outside [0, {}]", t, top);
    let below = compensated_sum(
        law.support.iter().zip(&law.probabilities).filter(|(x, _)| **x <= t + YIELD_TOLERANCE).map(|(_, q)| *q),
    );
    let above = compensated_sum(
        law.support.iter().zip(&law.probabilities).filter(|(x, _)| **x > t + YIELD_TOLERANCE).map(|(_, q)| *q),
    );
    let rate = -log2(above) / law.n as f64;
    Ok((r * (1.0 - f.eval(t, top)) * below.min(1.0), rate))
}

/// `Pr{Δ ≥ c/n}` against `r / (1 - 2^{-c})` for a kernel with `ε̄ ≤ r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftTailCheck {
    pub probability: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn shift_tail_bound_check(law: &SupportLaw, kernel: &TransitionKernel, c: f64, r: f64) -> Result<ShiftTailCheck> {
    precondition!(c > 0.0, "need c > 0");
    let outcome = apply_kernel(law, kernel)?;
    precondition!(
        outcome.distortion.average <= r + 1e-12,
        "kernel distortion {} exceeds r = {}",
        outcome.distortion.average,
        r
    );
    let cut = c / law.n as f64;
    let probability = compensated_sum(
        outcome.joint.iter().filter(|(x, y, _)| y - x >= cut - YIELD_TOLERANCE).map(|(_, _, q)| *q),
    );
    let bound = r / -libm::expm1(-c * math::LN_2);
    Ok(ShiftTailCheck { probability, bound, holds: probability <= bound + 1e-12 })
}

/// Upper-triangular kernel variables `(row, column)` on a square support.
fn triangular_cells(s: usize) -> Vec<(usize, usize)> {
    (0..s).flat_map(|i| (i..s).map(move |j| (i, j))).collect()
}

fn lp_base(law: &SupportLaw) -> Result<(Vec<(usize, usize)>, LinearProgram)> {
    let s = law.support.len();
    if s > LP_SUPPORT_MAX {
        return Err(Error::ResourceCap(alloc::format!(
            "LP oracle supports at most {} yields, got {}",
            LP_SUPPORT_MAX,
            s
        )));
    }
    let cells = triangular_cells(s);
    let mut lp = LinearProgram::new(alloc::vec![BigRational::zero(); cells.len()]);
    for i in 0..s {
        let row = cells.iter().map(|&(a, _)| if a == i { lp::int(1) } else { lp::int(0) }).collect();
        lp.add(row, Relation::Eq, lp::int(1));
    }
    Ok((cells, lp))
}

fn lp_kernel(law: &SupportLaw, cells: &[(usize, usize)], x: &[BigRational]) -> Result<TransitionKernel> {
    let s = law.support.len();
    let mut rows = alloc::vec![alloc::vec![0.0; s]; s];
    for (&(i, j), v) in cells.iter().zip(x) {
        rows[i][j] = v.to_f64().unwrap_or(0.0);
    }
    TransitionKernel::new(law.n, law.support.clone(), law.support.clone(), rows)
}

/// Exact LP for `max E[f(Y)] - λ ε̄` over upper-triangular kernels.
pub fn weighted_sum_by_lp(law: &SupportLaw, f: &YieldMeasure, lambda: f64) -> Result<(BigRational, TransitionKernel)> {
    let top = law.max_yield();
    let (cells, mut lp) = lp_base(law)?;
    let lam = lp::rational(lambda);
    for (k, &(i, j)) in cells.iter().enumerate() {
        let (x, y) = (law.support[i], law.support[j]);
        let gain = lp::rational(f.eval(y, top)) - &lam * lp::rational(shift_distortion(law.n, x, y));
        lp.objective[k] = lp::rational(law.probabilities[i]) * gain;
    }
    let sol = lp.maximize()?;
    let kernel = lp_kernel(law, &cells, &sol.x)?;
    Ok((sol.value, kernel))
}

/// Exact LP for `max E[f(Y)]` over upper-triangular kernels with `ε̄ ≤ r`.
pub fn average_constrained_by_lp(law: &SupportLaw, f: &YieldMeasure, r: f64) -> Result<(BigRational, TransitionKernel)> {
    let top = law.max_yield();
    let (cells, mut lp) = lp_base(law)?;
    let mut budget = Vec::with_capacity(cells.len());
    for (k, &(i, j)) in cells.iter().enumerate() {
        let (x, y) = (law.support[i], law.support[j]);
        let p = lp::rational(law.probabilities[i]);
        lp.objective[k] = &p * lp::rational(f.eval(y, top));
        budget.push(p * lp::rational(shift_distortion(law.n, x, y)));
    }
    lp.add(budget, Relation::Le, lp::rational(r));
    let sol = lp.maximize()?;
    let kernel = lp_kernel(law, &cells, &sol.x)?;
    Ok((sol.value, kernel))
}

/// Human-readable one-line summary of a kernel's moves.
pub fn describe_moves(kernel: &TransitionKernel) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (row, &x) in kernel.rows.iter().zip(&kernel.inputs) {
        for (&q, &y) in row.iter().zip(&kernel.outputs) {
            if q > 0.0 && !same_yield(x, y) {
                let _ = write!(out, "{:.6}->{:.6}@{:.6} ", x, y, q);
            }
        }
    }
    if out.is_empty() {
        out.push_str("identity");
    }
    out.trim_end().into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{failure_probability, total_fidelity};
    use crate::schur::yield_distribution;
    use crate::spectrum::SchmidtSpectrum;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn law(n: u32, p: &[f64]) -> SupportLaw {
        SupportLaw::from_distribution(&yield_distribution(n, &SchmidtSpectrum::from_floats(p.to_vec()).unwrap()).unwrap())
    }

    fn random_triangular(rng: &mut ChaCha8Rng, n: u32, support: &[f64]) -> TransitionKernel {
        let s = support.len();
        let rows = (0..s)
            .map(|i| {
                let mut row = alloc::vec![0.0; s];
                let mut total = 0.0;
                for v in row.iter_mut().skip(i) {
                    *v = if rng.random::<f64>() < 0.5 { rng.random::<f64>() } else { 0.0 };
                    total += *v;
                }
                if total == 0.0 {
                    row[i] = 1.0;
                } else {
                    row.iter_mut().for_each(|v| *v /= total);
                }
                row
            })
            .collect();
        TransitionKernel::new(n, support.to_vec(), support.to_vec(), rows).unwrap()
    }

    /// Mixes a kernel with the identity until `ε̄ ≤ r`.
    fn shrink_to_budget(l: &SupportLaw, k: &TransitionKernel, r: f64) -> TransitionKernel {
        let eps = apply_kernel(l, k).unwrap().distortion.average;
        if eps <= r {
            return k.clone();
        }
        let t = r / eps;
        let mut rows = k.rows.clone();
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = t * *v + if i == j { 1.0 - t } else { 0.0 };
            }
        }
        TransitionKernel::new(k.n, k.inputs.clone(), k.outputs.clone(), rows).unwrap()
    }

    #[test]
    fn identity_has_no_distortion() {
        let l = law(6, &[0.7, 0.3]);
        let out = apply_kernel(&l, &TransitionKernel::identity(6, &l.support)).unwrap();
        assert_eq!(out.distortion, DistortionReport { worst: 0.0, average: 0.0 });
        assert_eq!(out.claimed.probabilities, l.probabilities);
    }

    #[test]
    fn single_shift_example() {
        let l = law(3, &[0.5, 0.5]);
        assert_eq!(l.support.len(), 3);
        let targets = [1.0 / 3.0, 1.0 / 3.0, 1.0];
        let k = TransitionKernel::deterministic(3, &l.support, &targets);
        let out = apply_kernel(&l, &k).unwrap();
        assert!((out.distortion.worst - 0.5).abs() < 1e-15);
        assert!((out.distortion.average - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uplift_average_distortion_is_below_row_mass() {
        let l = law(10, &[0.8, 0.2]);
        for r in [0.01, 0.2, 0.9] {
            let k = TransitionKernel::uplift_to_max(10, &l.support, r, 1.0);
            let d = apply_kernel(&l, &k).unwrap().distortion;
            assert!(d.average <= r && d.average <= d.worst);
        }
    }

    #[test]
    fn non_stochastic_rows_are_rejected() {
        let s = alloc::vec![0.0, 1.0];
        let bad = TransitionKernel::new(1, s.clone(), s.clone(), alloc::vec![alloc::vec![0.5, 0.4], alloc::vec![0.0, 1.0]]);
        assert!(matches!(bad, Err(Error::NonStochasticKernel(_))));
        let neg = TransitionKernel::new(1, s.clone(), s, alloc::vec![alloc::vec![1.5, -0.5], alloc::vec![0.0, 1.0]]);
        assert!(matches!(neg, Err(Error::NonStochasticKernel(_))));
    }

    #[test]
    fn uncovered_support_is_rejected() {
        let l = law(3, &[0.5, 0.5]);
        let k = TransitionKernel::identity(3, &[0.0, 1.0]);
        assert!(matches!(apply_kernel(&l, &k), Err(Error::Precondition(_))));
    }

    #[test]
    fn generalized_yield_examples() {
        let l = law(3, &[0.5, 0.5]);
        assert_eq!(generalized_yield(&l, &YieldMeasure::Step { threshold: 0.0 }).unwrap(), 1.0);
        assert!((generalized_yield(&l, &YieldMeasure::Linear).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let dist = yield_distribution(12, &SchmidtSpectrum::from_floats(alloc::vec![0.6, 0.4]).unwrap()).unwrap();
        let l = SupportLaw::from_distribution(&dist);
        for &r in &l.support[1..] {
            let success = generalized_yield(&l, &YieldMeasure::Step { threshold: r }).unwrap();
            let fail_below = failure_probability(&dist, r - 1e-9).unwrap();
            assert!((success - (1.0 - fail_below)).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_measures_are_rejected() {
        let l = law(3, &[0.5, 0.5]);
        let decreasing = YieldMeasure::Table(alloc::vec![(0.0, 0.0), (0.5, 0.8), (0.7, 0.3), (1.0, 1.0)]);
        assert!(generalized_yield(&l, &decreasing).is_err());
        let offset = YieldMeasure::Table(alloc::vec![(0.0, 0.1), (1.0, 1.0)]);
        assert!(generalized_yield(&l, &offset).is_err());
        let short = YieldMeasure::Table(alloc::vec![(0.0, 0.0), (1.0, 0.9)]);
        assert!(generalized_yield(&l, &short).is_err());
    }

    #[test]
    fn weighted_sum_rejects_small_weights() {
        let l = law(3, &[0.5, 0.5]);
        assert!(optimize_weighted_sum(&l, &YieldMeasure::Linear, 1.0).is_err());
        assert!(optimize_weighted_sum(&l, &YieldMeasure::Linear, 0.5).is_err());
    }

    #[test]
    fn identity_optimal_at_critical_weight() {
        for d in [2usize, 3] {
            let p: Vec<f64> = if d == 2 { alloc::vec![0.7, 0.3] } else { alloc::vec![0.5, 0.3, 0.2] };
            for n in 1..=10u32 {
                let lambda = 1.0 / (1.0 - (d as f64).powi(-(n as i32)));
                let l = law(n, &p);
                let best = optimize_weighted_sum(&l, &YieldMeasure::Linear, lambda).unwrap();
                assert!(best.kernel.is_identity(), "d={d} n={n}: {}", describe_moves(&best.kernel));
            }
        }
    }

    #[test]
    fn identity_threshold_for_small_weight() {
        let lambda = 1.001;
        let n0 = identity_threshold(lambda, 2).unwrap();
        assert!((n0 - 9.967).abs() < 1e-3);
        for n in 10..=40 {
            let l = law(n, &[0.75, 0.25]);
            assert!(optimize_weighted_sum(&l, &YieldMeasure::Linear, lambda).unwrap().kernel.is_identity());
        }
        let l = law(9, &[0.75, 0.25]);
        let best = optimize_weighted_sum(&l, &YieldMeasure::Linear, lambda).unwrap();
        assert!(!best.kernel.is_identity());
    }

    #[test]
    fn huge_weight_forces_identity() {
        let l = law(8, &[0.6, 0.3, 0.1]);
        for f in [YieldMeasure::Linear, YieldMeasure::Step { threshold: 0.9 }] {
            assert!(optimize_weighted_sum(&l, &f, 1e12).unwrap().kernel.is_identity());
        }
    }

    #[test]
    fn weighted_sum_matches_lp_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..30 {
            let d = if trial % 3 == 0 { 3 } else { 2 };
            let n = rng.random_range(1..=if d == 2 { 22 } else { 5 });
            let mut p: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 0.05).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= s);
            let l = law(n, &p);
            if l.support.len() > LP_SUPPORT_MAX {
                continue;
            }
            let top = l.max_yield();
            let f = match trial % 3 {
                0 => YieldMeasure::Linear,
                1 => YieldMeasure::Step { threshold: rng.random::<f64>() * top },
                _ => {
                    let mid = rng.random::<f64>() * top;
                    YieldMeasure::Table(alloc::vec![(0.0, 0.0), (mid, rng.random::<f64>()), (top, 1.0)])
                }
            };
            let lambda = 1.0 + rng.random::<f64>() * 2.0;
            let sep = optimize_weighted_sum(&l, &f, lambda).unwrap();
            let (exact, _) = weighted_sum_by_lp(&l, &f, lambda).unwrap();
            assert!((sep.value - exact.to_f64().unwrap()).abs() < 1e-9, "trial {trial}");
        }
    }

    #[test]
    fn distortion_free_optimum_is_identity() {
        let l = law(7, &[0.6, 0.4]);
        for f in [YieldMeasure::Linear, YieldMeasure::Step { threshold: 0.5 }] {
            let (exact, _) = average_constrained_by_lp(&l, &f, 0.0).unwrap();
            let id = generalized_yield(&l, &f).unwrap();
            assert!((exact.to_f64().unwrap() - id).abs() < 1e-12);
        }
    }

    #[test]
    fn average_constraint_construction_against_lp() {
        let l = law(8, &[0.75, 0.25]);
        for r in [0.01, 0.05, 0.2] {
            let built = optimal_under_average_constraint(&l, &YieldMeasure::Linear, r).unwrap();
            let (best, _) = average_constrained_by_lp(&l, &YieldMeasure::Linear, r).unwrap();
            let best = best.to_f64().unwrap();
            assert!(built.value <= best + 1e-12);
            // identity is weighted-sum optimal at λ = 1/(1 - 2^{-n}), giving gain ≤ λ r
            assert!(best - built.identity_value <= r / (1.0 - 2f64.powi(-8)) + 1e-12);
        }
    }

    #[test]
    fn total_fidelity_is_unchanged_by_relabeling() {
        let dist = yield_distribution(9, &SchmidtSpectrum::from_floats(alloc::vec![0.7, 0.3]).unwrap()).unwrap();
        let l = SupportLaw::from_distribution(&dist);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = random_triangular(&mut rng, 9, &l.support);
        let out = apply_kernel(&l, &k).unwrap();
        let marginal = out.true_marginal(&l.support);
        for (a, b) in marginal.iter().zip(&l.probabilities) {
            assert!((a - b).abs() < 1e-15);
        }
        let before = total_fidelity(&l, 0.5).unwrap();
        let rebuilt = SupportLaw { probabilities: marginal, ..l.clone() };
        assert!((total_fidelity(&rebuilt, 0.5).unwrap() - before).abs() < 1e-15);
    }

    #[test]
    fn worst_constraint_examples() {
        let l = law(100, &[0.75, 0.25]);
        let zero = optimal_under_worst_constraint(&l, &YieldMeasure::Linear, 0.0).unwrap();
        assert!(zero.kernel.is_identity() && zero.improvement == 0.0);
        let c = optimal_under_worst_constraint(&l, &YieldMeasure::Linear, 0.1).unwrap();
        assert!(c.improvement > 0.0 && c.improvement <= -log2(0.9) / 100.0 + 1e-15);
        assert!(c.distortion.worst <= 0.1 + 1e-12);
        assert!(optimal_under_worst_constraint(&l, &YieldMeasure::Linear, 1.0).is_err());
    }

    #[test]
    fn worst_constraint_keeps_failure_exponent() {
        let p = [0.75, 0.25];
        let rate = 0.6;
        for n in [50u32, 100, 200] {
            let l = law(n, &p);
            let c = optimal_under_worst_constraint(&l, &YieldMeasure::Step { threshold: rate }, 0.1).unwrap();
            let shifted = apply_kernel(&l, &c.kernel).unwrap().claimed;
            let e_id = -log2(failure_probability(&l, rate).unwrap()) / n as f64;
            let e_new = -log2(failure_probability(&shifted, rate).unwrap()) / n as f64;
            let shift = -log2(0.9) / n as f64;
            assert!(e_new >= e_id - 1e-12);
            let unshifted = -log2(failure_probability(&l, rate - shift).unwrap()) / n as f64;
            assert!((e_new - unshifted).abs() < 1e-9);
        }
    }

    #[test]
    fn average_constraint_examples() {
        let l = law(100, &[0.75, 0.25]);
        let zero = optimal_under_average_constraint(&l, &YieldMeasure::Linear, 0.0).unwrap();
        assert!(zero.kernel.is_identity());
        let c = optimal_under_average_constraint(&l, &YieldMeasure::Linear, 0.01).unwrap();
        let h = crate::rates::shannon_entropy(&[0.75, 0.25]);
        let (lower, rate) = average_constraint_lower_bound(&l, &YieldMeasure::Linear, 0.01, h + 0.05).unwrap();
        assert!(rate > 0.0);
        assert!(lower <= c.improvement && c.improvement <= 0.01 * 1.001);
        let ratios: Vec<f64> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&r| optimal_under_average_constraint(&l, &YieldMeasure::Linear, r).unwrap().improvement / r)
            .collect();
        assert!(ratios.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9 * w[0]));
    }

    #[test]
    fn shift_tail_examples() {
        let l = law(20, &[0.8, 0.2]);
        let id = TransitionKernel::identity(20, &l.support);
        let check = shift_tail_bound_check(&l, &id, 2.0, 0.0).unwrap();
        assert!(check.holds && check.probability == 0.0);
        let k = TransitionKernel::uplift_to_max(20, &l.support, 0.3, 1.0);
        let eps = apply_kernel(&l, &k).unwrap().distortion.average;
        let check = shift_tail_bound_check(&l, &k, 1.0, eps).unwrap();
        assert!(check.holds && check.probability < check.bound);
        assert!(shift_tail_bound_check(&l, &k, 1.0, eps / 2.0).is_err());
    }

    #[test]
    fn shift_tail_holds_for_random_kernels() {
        let l = law(12, &[0.65, 0.35]);
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.random::<f64>() * 0.5;
            let k = shrink_to_budget(&l, &random_triangular(&mut rng, 12, &l.support), r);
            let c = 0.25 + rng.random::<f64>() * 4.0;
            assert!(shift_tail_bound_check(&l, &k, c, r).unwrap().holds, "seed {seed}");
        }
    }

    proptest! {
        #[test]
        fn relabeling_upwards_never_hurts(seed in 0u64..1000, n in 1u32..16, p0 in 0.5f64..0.99) {
            let l = law(n, &[p0, 1.0 - p0]);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = random_triangular(&mut rng, n, &l.support);
            prop_assert!(k.is_upper_triangular());
            let out = apply_kernel(&l, &k).unwrap();
            prop_assert!(out.distortion.average <= out.distortion.worst + 1e-15);
            for f in [YieldMeasure::Linear, YieldMeasure::Step { threshold: 0.5 }] {
                prop_assert!(generalized_yield(&out.claimed, &f).unwrap() >= generalized_yield(&l, &f).unwrap() - 1e-12);
            }
        }
    }
}
