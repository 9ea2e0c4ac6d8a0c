//! Irreducible characters of the symmetric group (Murnaghan–Nakayama).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

/// Memoised `χ_λ(μ)` keyed by shape and remaining cycle type.
#[derive(Debug, Default, Clone)]
pub struct CharacterTable {
    memo: BTreeMap<(Vec<u32>, Vec<u32>), i64>,
}

fn normalise(parts: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = parts.iter().copied().filter(|&x| x > 0).collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

fn beta_set(shape: &[u32]) -> Vec<u32> {
    let l = shape.len() as u32;
    shape.iter().enumerate().map(|(i, &x)| x + l - 1 - i as u32).collect()
}

fn from_beta_set(beta: &[u32]) -> Vec<u32> {
    let mut b = beta.to_vec();
    b.sort_unstable_by(|x, y| y.cmp(x));
    let l = b.len() as u32;
    normalise(&b.iter().enumerate().map(|(i, &x)| x - (l - 1 - i as u32)).collect::<Vec<_>>())
}

impl CharacterTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `χ_λ` on the class with the given cycle type (both as partitions of `n`).
    pub fn character(&mut self, shape: &[u32], cycle_type: &[u32]) -> i64 {
        let shape = normalise(shape);
        let cycles = normalise(cycle_type);
        assert_eq!(shape.iter().sum::<u32>(), cycles.iter().sum::<u32>(), "sizes differ");
        self.eval(shape, cycles)
    }

    fn eval(&mut self, shape: Vec<u32>, cycles: Vec<u32>) -> i64 {
        if cycles.is_empty() {
            return 1;
        }
        let key = (shape, cycles);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let (shape, cycles) = &key;
        let k = cycles[0];
        let rest = cycles[1..].to_vec();
        let beta = beta_set(shape);
        let mut total = 0i64;
        for (i, &b) in beta.iter().enumerate() {
            if b < k || beta.contains(&(b - k)) {
                continue;
            }
            let passed = beta.iter().filter(|&&c| c > b - k && c < b).count();
            let mut moved = beta.clone();
            moved[i] = b - k;
            let value = self.eval(from_beta_set(&moved), rest.clone());
            total += if passed % 2 == 0 { value } else { -value };
        }
        self.memo.insert(key, total);
        total
    }
}

/// Convenience wrapper with a throwaway memo.
pub fn character(shape: &[u32], cycle_type: &[u32]) -> i64 {
    CharacterTable::new().character(shape, cycle_type)
}

/// Number of permutations with the given cycle type: `n! / ∏ k^{m_k} m_k!`.
pub fn class_size(cycle_type: &[u32]) -> u128 {
    let n: u32 = cycle_type.iter().sum();
    let mut size: u128 = (1..=n as u128).product();
    let mut counts = BTreeMap::new();
    for &k in cycle_type.iter().filter(|&&k| k > 0) {
        *counts.entry(k).or_insert(0u32) += 1;
    }
    for (k, m) in counts {
        size /= (k as u128).pow(m);
        size /= (1..=m as u128).product::<u128>();
    }
    size
}

/// All partitions of `n` in lexicographically decreasing order.
pub fn partitions_of(n: u32) -> Vec<Vec<u32>> {
    fn rec(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for k in (1..=left.min(max)).rev() {
            cur.push(k);
            rec(left - k, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}
