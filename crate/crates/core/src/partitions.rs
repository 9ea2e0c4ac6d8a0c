//! Young indices and the dimensions of the associated irreducible
//! representations of the symmetric and unitary groups.
//!
//! All dimension arithmetic is exact. `dim V` has two independent routes (a
//! signed sum of multinomials over `S_d` and a product formula) which are
//! cross-checked in tests; `log2_dim_v` is the floating companion used on
//! large-`n` paths.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::math::{log2, log2_biguint, log2_factorial};
use crate::perm::signed_permutations;

/// Largest local dimension accepted by [`dim_v_determinant`]; the sum runs over `d!` terms.
pub const DETERMINANT_MAX_D: usize = 8;

/// A partition of `n` into at most `d` non-negative, non-increasing parts.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YoungIndex {
    parts: Vec<u32>,
    n: u32,
}

impl YoungIndex {
    /// Builds an index of length `parts.len()`, validating the shape.
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("local dimension must be at least 1".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("parts {:?} are not non-increasing", parts)));
        }
        let n = parts.iter().sum();
        Ok(Self { parts, n })
    }

    /// Like [`YoungIndex::new`] but pads with zeros to length `d`.
    pub fn padded(mut parts: Vec<u32>, d: usize) -> Result<Self> {
        if parts.len() > d {
            return Err(Error::InvalidPartition(format!("{:?} has more than {} parts", parts, d)));
        }
        parts.resize(d, 0);
        Self::new(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> usize {
        self.parts.len()
    }

    /// The shifted parts `λ + δ` with `δ = (d-1, …, 0)`.
    pub fn shifted(&self) -> Vec<u64> {
        let d = self.d();
        self.parts.iter().enumerate().map(|(i, &x)| x as u64 + (d - 1 - i) as u64).collect()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.iter().take_while(|&&x| x > 0).count()
    }

    /// Shannon entropy (bits) of the type `λ/n`; 0 for `n = 0`.
    pub fn type_entropy(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let n = self.n as f64;
        crate::math::entropy_bits(&self.parts.iter().map(|&x| x as f64 / n).collect::<Vec<_>>())
    }
}

impl fmt::Debug for YoungIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for YoungIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

/// The staircase `δ = (d-1, d-2, …, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaircaseDelta(Vec<u32>);

impl StaircaseDelta {
    pub fn new(d: usize) -> Self {
        Self((0..d as u32).rev().collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

/// Every partition of `n` into at most `d` parts, lexicographically descending.
///
/// `n = 0` yields the single all-zero index.
pub fn enumerate_young_indices(n: u32, d: usize) -> Vec<YoungIndex> {
    assert!(d >= 1, "local dimension must be at least 1");
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(d);
    fill(n, n, d, &mut current, &mut out);
    out
}

fn fill(remaining: u32, max_part: u32, slots: usize, current: &mut Vec<u32>, out: &mut Vec<YoungIndex>) {
    if slots == 0 {
        if remaining == 0 {
            out.push(YoungIndex { parts: current.clone(), n: current.iter().sum() });
        }
        return;
    }
    // the remaining `slots` parts can hold at most `slots * max_part`
    if (remaining as u64) > slots as u64 * max_part as u64 {
        return;
    }
    let hi = remaining.min(max_part);
    let lo = remaining.div_ceil(slots as u32);
    for part in (lo..=hi).rev() {
        current.push(part);
        fill(remaining - part, part, slots - 1, current, out);
        current.pop();
    }
}

/// Number of partitions of `n` into at most `d` parts, by the standard recurrence.
pub fn count_young_indices(n: u32, d: usize) -> u64 {
    // p(n, k) = p(n, k-1) + p(n-k, k): partitions of n with parts ≤ k (conjugate view)
    let n = n as usize;
    let mut table = alloc::vec![0u64; n + 1];
    table[0] = 1;
    for k in 1..=d {
        for m in k..=n {
            table[m] += table[m - k];
        }
    }
    table[n]
}

pub(crate) fn factorial(k: u64) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

/// Cached factorials `0!..=max!`.
#[derive(Debug, Clone)]
pub struct FactorialTable(Vec<BigUint>);

impl FactorialTable {
    pub fn new(max: u64) -> Self {
        let mut v = Vec::with_capacity(max as usize + 1);
        v.push(BigUint::one());
        for i in 1..=max {
            let next = v[i as usize - 1].clone() * i;
            v.push(next);
        }
        Self(v)
    }

    pub fn get(&self, k: u64) -> BigUint {
        self.0.get(k as usize).cloned().unwrap_or_else(|| factorial(k))
    }
}

/// `dim V_λ` as the signed sum `Σ_π sgn(π) n!/(λ+δ-π(δ))!`, with `1/k! = 0` for `k < 0`.
pub fn dim_v_determinant(lambda: &YoungIndex) -> Result<BigUint> {
    let d = lambda.d();
    if d > DETERMINANT_MAX_D {
        return Err(Error::ResourceCap(format!(
            "determinant formula limited to d <= {}, got d = {}",
            DETERMINANT_MAX_D, d
        )));
    }
    let delta = StaircaseDelta::new(d);
    let delta = delta.as_slice();
    let n_fact = factorial(lambda.n() as u64);
    let mut total = BigInt::zero();
    for (perm, sign) in signed_permutations(d) {
        let mut denom = BigUint::one();
        let mut vanishes = false;
        for i in 0..d {
            let k = lambda.parts[i] as i64 + delta[i] as i64 - delta[perm[i]] as i64;
            if k < 0 {
                vanishes = true;
                break;
            }
            denom *= factorial(k as u64);
        }
        if vanishes {
            continue;
        }
        let term = BigInt::from(&n_fact / denom);
        if sign > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    debug_assert!(total.is_positive());
    Ok(total.magnitude().clone())
}

/// `dim V_λ` by the product formula `n!/(λ+δ)! · ∏_{i<j} (l_i - l_j)`, `l = λ + δ`.
pub fn dim_v_product(lambda: &YoungIndex) -> BigUint {
    dim_v_product_with(lambda, None)
}

pub(crate) fn dim_v_product_with(lambda: &YoungIndex, table: Option<&FactorialTable>) -> BigUint {
    let fact = |k: u64| table.map_or_else(|| factorial(k), |t| t.get(k));
    let l = lambda.shifted();
    let mut numer = fact(lambda.n() as u64);
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            numer *= l[i] - l[j];
        }
    }
    let denom = l.iter().fold(BigUint::one(), |acc, &li| acc * fact(li));
    let (q, r) = numer.div_rem(&denom);
    debug_assert!(r.is_zero());
    q
}

/// `dim V_λ`, the number of standard Young tableaux of shape λ.
pub fn dim_v(lambda: &YoungIndex) -> BigUint {
    dim_v_product(lambda)
}

/// `log2 dim V_λ` in floating point via log-gamma; valid for any `n`.
pub fn log2_dim_v(lambda: &YoungIndex) -> f64 {
    let l = lambda.shifted();
    let mut acc = log2_factorial(lambda.n() as u64);
    for i in 0..l.len() {
        acc -= log2_factorial(l[i]);
        for j in i + 1..l.len() {
            acc += log2((l[i] - l[j]) as f64);
        }
    }
    acc.max(0.0)
}

/// `log2 dim V_λ`, exact-then-rounded when `n` is small enough to afford it.
pub fn log2_dim_v_accurate(lambda: &YoungIndex) -> f64 {
    if lambda.n() <= 400 {
        log2_biguint(&dim_v(lambda))
    } else {
        log2_dim_v(lambda)
    }
}

/// Weyl dimension `dim U_λ = ∏_{i<j} (λ_i - λ_j + j - i)/(j - i)`.
pub fn dim_u(lambda: &YoungIndex) -> BigUint {
    let l = lambda.shifted();
    let mut numer = BigUint::one();
    let mut denom = BigUint::one();
    for i in 0..l.len() {
        for j in i + 1..l.len() {
            numer *= l[i] - l[j];
            denom *= (j - i) as u64;
        }
    }
    let (q, r) = numer.div_rem(&denom);
    debug_assert!(r.is_zero());
    q
}

/// Convenience: `dim V` as `u64` when it fits.
pub fn dim_v_u64(lambda: &YoungIndex) -> Option<u64> {
    dim_v(lambda).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn yi(parts: &[u32]) -> YoungIndex {
        YoungIndex::new(parts.to_vec()).unwrap()
    }

    /// Counts standard Young tableaux by placing 1..n one cell at a time.
    fn count_syt(shape: &[u32]) -> u64 {
        fn rec(filled: &mut Vec<u32>, shape: &[u32], left: u32) -> u64 {
            if left == 0 {
                return 1;
            }
            let mut total = 0;
            for r in 0..shape.len() {
                let row_ok = filled[r] < shape[r] && (r == 0 || filled[r - 1] > filled[r]);
                if row_ok {
                    filled[r] += 1;
                    total += rec(filled, shape, left - 1);
                    filled[r] -= 1;
                }
            }
            total
        }
        let mut filled = vec![0; shape.len()];
        rec(&mut filled, shape, shape.iter().sum())
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_young_indices(2, 2), vec![yi(&[2, 0]), yi(&[1, 1])]);
        assert_eq!(enumerate_young_indices(3, 2), vec![yi(&[3, 0]), yi(&[2, 1])]);
        assert_eq!(enumerate_young_indices(0, 2), vec![yi(&[0, 0])]);
        assert_eq!(enumerate_young_indices(6, 3).len(), 7);
    }

    #[test]
    fn enumeration_matches_brute_force_count() {
        for d in 1..=4usize {
            for n in 0..=12u32 {
                // brute force: all non-increasing d-tuples with entries ≤ n
                let mut count = 0u64;
                let mut v = vec![0u32; d];
                loop {
                    if v.windows(2).all(|w| w[0] >= w[1]) && v.iter().sum::<u32>() == n {
                        count += 1;
                    }
                    let mut k = 0;
                    while k < d && v[k] == n {
                        v[k] = 0;
                        k += 1;
                    }
                    if k == d {
                        break;
                    }
                    v[k] += 1;
                }
                let listed = enumerate_young_indices(n, d);
                assert_eq!(listed.len() as u64, count, "n={n} d={d}");
                assert_eq!(count_young_indices(n, d), count);
                assert!(listed.windows(2).all(|w| w[0] > w[1]), "order must be strictly descending");
            }
        }
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dim_v_determinant(&yi(&[3, 0])).unwrap(), 1u32.into());
        assert_eq!(dim_v_determinant(&yi(&[1, 1])).unwrap(), 1u32.into());
        assert_eq!(dim_v_determinant(&yi(&[2, 1])).unwrap(), 2u32.into());
        assert_eq!(dim_v_product(&yi(&[2, 1])), 2u32.into());
        assert_eq!(dim_v_product(&yi(&[5, 0])), 1u32.into());
        assert_eq!(dim_v_product(&yi(&[2, 2, 0])), 2u32.into());
        assert_eq!(dim_u(&yi(&[7, 0])), 8u32.into());
        assert_eq!(dim_u(&yi(&[2, 1])), 2u32.into());
        assert_eq!(dim_u(&yi(&[1, 1])), 1u32.into());
    }

    #[test]
    fn determinant_rejects_large_d() {
        let lambda = YoungIndex::padded(vec![3, 2, 1], 9).unwrap();
        assert!(matches!(dim_v_determinant(&lambda), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn dim_v_counts_standard_tableaux() {
        for n in 0..=8u32 {
            for d in 1..=4usize {
                for lambda in enumerate_young_indices(n, d) {
                    assert_eq!(dim_v(&lambda), count_syt(lambda.parts()).into(), "{lambda}");
                }
            }
        }
    }

    #[test]
    fn dimensions_decompose_tensor_space() {
        for d in 1..=4usize {
            for n in 0..=12u32 {
                let total: BigUint = enumerate_young_indices(n, d)
                    .iter()
                    .map(|l| dim_u(l) * dim_v(l))
                    .sum();
                assert_eq!(total, BigUint::from(d).pow(n), "d={d} n={n}");
            }
        }
    }

    #[test]
    fn float_log_dimension_tracks_exact() {
        for lambda in enumerate_young_indices(60, 3) {
            let exact = log2_biguint(&dim_v(&lambda));
            assert!((exact - log2_dim_v(&lambda)).abs() < 1e-9, "{lambda}");
        }
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(YoungIndex::new(vec![1, 2]).is_err());
        assert!(YoungIndex::new(vec![]).is_err());
        assert!(YoungIndex::padded(vec![1, 1, 1], 2).is_err());
        assert_eq!(StaircaseDelta::new(4).as_slice(), &[3, 2, 1, 0]);
    }

    fn hook_length_dimension(parts: &[u32]) -> BigUint {
        let rows: Vec<u32> = parts.iter().copied().filter(|&x| x > 0).collect();
        let n: u32 = rows.iter().sum();
        let mut num = BigUint::from(1u32);
        for k in 2..=n {
            num *= k;
        }
        let mut den = BigUint::from(1u32);
        for (r, &len) in rows.iter().enumerate() {
            for c in 0..len {
                let below = rows[r + 1..].iter().filter(|&&l| l > c).count() as u32;
                den *= len - c + below;
            }
        }
        num / den
    }

    proptest::proptest! {
        #[test]
        fn dimension_formulas_agree(raw in proptest::collection::vec(0u32..8, 1..=8)) {
            let mut parts = raw.clone();
            parts.sort_unstable_by(|a, b| b.cmp(a));
            let lambda = YoungIndex::new(parts.clone()).unwrap();
            let hook = hook_length_dimension(&parts);
            proptest::prop_assert_eq!(dim_v_product(&lambda), hook.clone());
            proptest::prop_assert_eq!(dim_v_determinant(&lambda).unwrap(), hook);
        }
    }
}
