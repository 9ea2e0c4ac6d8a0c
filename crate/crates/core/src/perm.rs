use alloc::vec::Vec;

/// All permutations of `0..d` paired with their sign, in lexicographic order.
pub fn signed_permutations(d: usize) -> Vec<(Vec<usize>, i8)> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..d).collect();
    loop {
        out.push((current.clone(), sign(&current)));
        if !next_permutation(&mut current) {
            break;
        }
    }
    out
}

pub fn sign(perm: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Advances to the next lexicographic permutation; false once exhausted.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Cycle type of a permutation, sorted non-increasing.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = alloc::vec![false; perm.len()];
    let mut cycles = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = perm[k];
            len += 1;
        }
        cycles.push(len);
    }
    cycles.sort_unstable_by(|a, b| b.cmp(a));
    cycles
}
