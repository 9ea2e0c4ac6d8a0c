//! Dense-matrix ground truth for tiny `n`: the state `|φ⟩^{⊗n}`, the
//! isotypic projectors of `(C^d)^{⊗n}`, and checks of the outcome law and of
//! the extracted maximally entangled state.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::characters::CharacterTable;
use crate::error::{precondition, Error, Result};
use crate::math::{log2, sqrt};
use crate::partitions::{dim_u, dim_v_u64, enumerate_young_indices, YoungIndex};
use crate::perm::{cycle_type, next_permutation};
use crate::schur::outcome_probability;
use crate::spectrum::SchmidtSpectrum;

pub type C64 = Complex<f64>;

/// Tolerance used by the oracle's own consistency checks.
pub const ORACLE_TOLERANCE: f64 = 1e-10;

/// Size limits; exceeding one is refused with [`Error::ResourceCap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleCaps {
    /// Largest `d^n` for a bipartite state (`(d^n)^2` amplitudes).
    pub max_state_dimension: usize,
    /// Largest `d^n` for a projector.
    pub max_projector_dimension: usize,
    /// Largest `n` for a projector (the sum runs over `n!` permutations).
    pub max_projector_copies: u32,
}

impl Default for OracleCaps {
    fn default() -> Self {
        Self { max_state_dimension: 32, max_projector_dimension: 256, max_projector_copies: 8 }
    }
}

fn local_dimension(d: usize, n: u32, cap: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..n {
        dim = dim.saturating_mul(d);
        if dim > cap {
            return Err(Error::ResourceCap(alloc::format!("{}^{} exceeds the oracle cap {}", d, n, cap)));
        }
    }
    Ok(dim)
}

/// `|ψ⟩ = Σ_{a,b} M[a,b] |a⟩_A |b⟩_B` over `(C^d)^{⊗n}` on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBipartiteState {
    pub d: usize,
    pub n: u32,
    pub coefficients: DMatrix<C64>,
}

impl DenseBipartiteState {
    /// Amplitudes over `(A⊗B)^{⊗n}` with each copy's `(a_k, b_k)` adjacent.
    pub fn amplitudes(&self) -> Vec<C64> {
        let dim = self.coefficients.nrows();
        let mut out = alloc::vec![C64::new(0.0, 0.0); dim * dim];
        let n = self.n as usize;
        for a in 0..dim {
            for b in 0..dim {
                let (mut x, mut y, mut idx, mut scale) = (a, b, 0usize, 1usize);
                for _ in 0..n {
                    idx += ((x % self.d) * self.d + y % self.d) * scale;
                    scale *= self.d * self.d;
                    x /= self.d;
                    y /= self.d;
                }
                out[idx] = self.coefficients[(a, b)];
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.norm()
    }

    /// `Tr_B |ψ⟩⟨ψ| = M M†`.
    pub fn reduced_a(&self) -> DMatrix<C64> {
        &self.coefficients * self.coefficients.adjoint()
    }

    /// Applies `U` to every A copy and `V` to every B copy.
    pub fn with_local_unitaries(&self, u: &DMatrix<C64>, v: &DMatrix<C64>) -> Self {
        let un = kron_power(u, self.n);
        let vn = kron_power(v, self.n);
        Self { d: self.d, n: self.n, coefficients: un * &self.coefficients * vn.transpose() }
    }
}

pub fn kron_power(u: &DMatrix<C64>, n: u32) -> DMatrix<C64> {
    let mut out = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for _ in 0..n {
        out = out.kronecker(u);
    }
    out
}

pub fn build_state(p: &SchmidtSpectrum, n: u32) -> Result<DenseBipartiteState> {
    build_state_with(p, n, &OracleCaps::default())
}

pub fn build_state_with(p: &SchmidtSpectrum, n: u32, caps: &OracleCaps) -> Result<DenseBipartiteState> {
    let d = p.d();
    let dim = local_dimension(d, n, caps.max_state_dimension)?;
    let roots: Vec<f64> = p.to_f64().iter().map(|&x| sqrt(x)).collect();
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for a in 0..dim {
        let mut amp = 1.0;
        let mut x = a;
        for _ in 0..n {
            amp *= roots[x % d];
            x /= d;
        }
        m[(a, a)] = C64::new(amp, 0.0);
    }
    Ok(DenseBipartiteState { d, n, coefficients: m })
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let x = r[(i, i)];
            let a = x.norm();
            if a > 0.0 { x / a } else { C64::new(1.0, 0.0) }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    q * phases
}

/// `P_λ = (dim V_λ / n!) Σ_σ χ_λ(σ) σ` on `(C^d)^{⊗n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotypicProjector {
    pub index: YoungIndex,
    pub d: usize,
    pub matrix: DMatrix<f64>,
}

impl IsotypicProjector {
    pub fn idempotence_residual(&self) -> f64 {
        (&self.matrix * &self.matrix - &self.matrix).amax()
    }

    pub fn symmetry_residual(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `dim U_λ · dim V_λ`.
    pub fn expected_trace(&self) -> f64 {
        (dim_u(&self.index) * crate::partitions::dim_v(&self.index)).to_f64().unwrap_or(f64::INFINITY)
    }
}

pub fn isotypic_projector(lambda: &YoungIndex, d: usize) -> Result<IsotypicProjector> {
    precondition!(lambda.length() <= d, "index {} has more than {} rows", lambda, d);
    let nonzero = |x: &YoungIndex| x.parts().iter().copied().filter(|&v| v > 0).collect::<Vec<_>>();
    let target = nonzero(lambda);
    isotypic_projectors(lambda.n(), d, &OracleCaps::default())
        .map(|all| all.into_iter().find(|p| nonzero(&p.index) == target).expect("index enumerated"))
}

/// Projectors for every index of `n` with at most `d` rows, sharing one pass over `S_n`.
pub fn isotypic_projectors(n: u32, d: usize, caps: &OracleCaps) -> Result<Vec<IsotypicProjector>> {
    precondition!(n >= 1, "need at least one copy");
    if n > caps.max_projector_copies {
        return Err(Error::ResourceCap(alloc::format!(
            "projectors need n <= {}, got {}",
            caps.max_projector_copies,
            n
        )));
    }
    let dim = local_dimension(d, n, caps.max_projector_dimension)?;
    let nu = n as usize;
    let digits: Vec<Vec<usize>> = (0..dim)
        .map(|a| {
            let mut x = a;
            let mut v = alloc::vec![0usize; nu];
            for k in (0..nu).rev() {
                v[k] = x % d;
                x /= d;
            }
            v
        })
        .collect();
    let indices = enumerate_young_indices(n, d);
    let mut table = CharacterTable::new();
    // accumulate Σ_σ χ(σ) σ per class first: one permutation matrix per σ, shared weights
    let mut class_sums: BTreeMap<Vec<u32>, DMatrix<f64>> = BTreeMap::new();
    let mut sigma: Vec<usize> = (0..nu).collect();
    loop {
        let ct: Vec<u32> = cycle_type(&sigma).into_iter().map(|c| c as u32).collect();
        let acc = class_sums.entry(ct).or_insert_with(|| DMatrix::zeros(dim, dim));
        for (a, da) in digits.iter().enumerate() {
            let mut b = 0usize;
            for k in 0..nu {
                b = b * d + da[sigma[k]];
            }
            acc[(b, a)] += 1.0;
        }
        if !next_permutation(&mut sigma) {
            break;
        }
    }
    let fact: f64 = (1..=nu).map(|k| k as f64).product();
    let mut out = Vec::with_capacity(indices.len());
    for index in indices {
        let dim_v = dim_v_u64(&index).expect("small n") as f64;
        let mut m = DMatrix::zeros(dim, dim);
        for (ct, sum) in &class_sums {
            let chi = table.character(index.parts(), ct) as f64;
            if chi != 0.0 {
                m += sum * chi;
            }
        }
        m *= dim_v / fact;
        out.push(IsotypicProjector { index, d, matrix: m });
    }
    Ok(out)
}

fn complexify(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// `Tr(P_λ ρ_A)` for every index.
pub fn outcome_probabilities(state: &DenseBipartiteState, caps: &OracleCaps) -> Result<Vec<(YoungIndex, f64)>> {
    let rho = state.reduced_a();
    Ok(isotypic_projectors(state.n, state.d, caps)?
        .into_iter()
        .map(|p| {
            let tr = (complexify(&p.matrix) * &rho).trace().re;
            (p.index, tr)
        })
        .collect())
}

/// Largest `|Tr(P_λ ρ_A) - a_λ|` over all indices, against the Schur-polynomial law.
pub fn verify_outcome_law(p: &SchmidtSpectrum, n: u32) -> Result<f64> {
    verify_outcome_law_for_state(&build_state(p, n)?, p)
}

pub fn verify_outcome_law_for_state(state: &DenseBipartiteState, p: &SchmidtSpectrum) -> Result<f64> {
    let mut worst = 0.0f64;
    for (index, dense) in outcome_probabilities(state, &OracleCaps::default())? {
        worst = worst.max((dense - outcome_probability(&index, p)?).abs());
    }
    Ok(worst)
}

/// Checks on the state left after outcome `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionCheck {
    pub probability: f64,
    pub dim_v: u64,
    /// Numerical rank of the A-side reduced state.
    pub rank: usize,
    /// `(number of non-zero U-sector eigenvalues) · dim V_λ`.
    pub expected_rank: usize,
    /// Sizes of the clusters of equal non-zero eigenvalues.
    pub group_sizes: Vec<usize>,
    /// Every cluster size is a multiple of `dim V_λ`.
    pub groups_ok: bool,
    pub entropy: f64,
    /// `H(U-sector spectrum) + log2 dim V_λ`.
    pub expected_entropy: f64,
    /// Largest gap between the sorted spectrum and the U⊗(maximally mixed V) prediction.
    pub product_residual: f64,
}

impl ExtractionCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.rank == self.expected_rank
            && self.groups_ok
            && (self.entropy - self.expected_entropy).abs() <= tol
            && self.product_residual <= tol
    }
}

/// Weights `p^{content(T)}` over semistandard tableaux of the given shape, entries `< d`.
pub fn tableau_weights(shape: &[u32], p: &[f64]) -> Vec<f64> {
    let rows: Vec<usize> = shape.iter().map(|&x| x as usize).filter(|&x| x > 0).collect();
    let cells: Vec<(usize, usize)> = rows.iter().enumerate().flat_map(|(r, &len)| (0..len).map(move |c| (r, c))).collect();
    let mut grid: Vec<Vec<usize>> = rows.iter().map(|&len| alloc::vec![0; len]).collect();
    let mut out = Vec::new();
    fn rec(k: usize, cells: &[(usize, usize)], grid: &mut Vec<Vec<usize>>, p: &[f64], w: f64, out: &mut Vec<f64>) {
        if k == cells.len() {
            out.push(w);
            return;
        }
        let (r, c) = cells[k];
        let lo_row = if c > 0 { grid[r][c - 1] } else { 0 };
        let lo_col = if r > 0 { grid[r - 1][c] + 1 } else { 0 };
        for v in lo_row.max(lo_col)..p.len() {
            grid[r][c] = v;
            rec(k + 1, cells, grid, p, w * p[v], out);
        }
    }
    rec(0, &cells, &mut grid, p, 1.0, &mut out);
    out
}

fn entropy_of(values: &[f64]) -> f64 {
    values.iter().filter(|&&x| x > 0.0).map(|&x| -x * log2(x)).sum()
}

pub fn verify_extracted_entanglement(p: &SchmidtSpectrum, n: u32, lambda: &YoungIndex) -> Result<ExtractionCheck> {
    verify_extracted_entanglement_for_state(&build_state(p, n)?, p, lambda)
}

pub fn verify_extracted_entanglement_for_state(
    state: &DenseBipartiteState,
    p: &SchmidtSpectrum,
    lambda: &YoungIndex,
) -> Result<ExtractionCheck> {
    precondition!(lambda.n() == state.n, "index is for n = {}, state for n = {}", lambda.n(), state.n);
    precondition!(lambda.length() <= state.d, "index has more than d rows");
    let proj = isotypic_projector(lambda, state.d)?;
    let pc = complexify(&proj.matrix);
    let projected = &pc * &state.coefficients * pc.transpose();
    let probability = projected.norm_squared();
    if probability <= ORACLE_TOLERANCE {
        return Err(Error::Precondition(alloc::format!("outcome {} has probability zero", lambda)));
    }
    let normalised = projected / C64::new(sqrt(probability), 0.0);
    let rho = &normalised * normalised.adjoint();
    let mut eig: Vec<f64> = rho.symmetric_eigenvalues().iter().map(|&x| x.max(0.0)).collect();
    eig.sort_by(|a, b| b.total_cmp(a));

    let dim_v = dim_v_u64(lambda).expect("small n");
    let weights = tableau_weights(lambda.parts(), &p.to_f64());
    let total: f64 = weights.iter().sum();
    let mut u_spectrum: Vec<f64> = weights.iter().map(|w| w / total).collect();
    u_spectrum.sort_by(|a, b| b.total_cmp(a));
    let mut predicted: Vec<f64> =
        u_spectrum.iter().flat_map(|&u| core::iter::repeat_n(u / dim_v as f64, dim_v as usize)).collect();
    predicted.resize(eig.len().max(predicted.len()), 0.0);
    let product_residual = eig.iter().zip(&predicted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let nonzero: Vec<f64> = eig.iter().copied().filter(|&x| x > ORACLE_TOLERANCE).collect();
    let mut group_sizes = Vec::new();
    let mut start = 0;
    for i in 1..=nonzero.len() {
        if i == nonzero.len() || (nonzero[start] - nonzero[i]).abs() > 1e-8 {
            group_sizes.push(i - start);
            start = i;
        }
    }
    let groups_ok = group_sizes.iter().all(|&g| (g as u64).is_multiple_of(dim_v));
    let u_nonzero = u_spectrum.iter().filter(|&&u| u > ORACLE_TOLERANCE).count();
    Ok(ExtractionCheck {
        probability,
        dim_v,
        rank: nonzero.len(),
        expected_rank: u_nonzero * dim_v as usize,
        group_sizes,
        groups_ok,
        entropy: entropy_of(&eig),
        expected_entropy: entropy_of(&u_spectrum) + log2(dim_v as f64),
        product_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fr(v: &[(i64, i64)]) -> SchmidtSpectrum {
        SchmidtSpectrum::from_fractions(v).unwrap()
    }

    #[test]
    fn state_examples() {
        let s = build_state(&fr(&[(1, 1), (0, 1)]), 2).unwrap();
        let amps = s.amplitudes();
        assert_eq!(amps[0], C64::new(1.0, 0.0));
        assert!(amps[1..].iter().all(|a| a.norm() == 0.0));
        let bell = build_state(&SchmidtSpectrum::uniform(2), 1).unwrap().amplitudes();
        let h = 1.0 / 2f64.sqrt();
        let expect = [h, 0.0, 0.0, h];
        for (a, e) in bell.iter().zip(expect) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
        let s = build_state(&fr(&[(3, 7), (2, 7), (2, 7)]), 3).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn caps_are_refused() {
        assert!(matches!(build_state(&SchmidtSpectrum::uniform(2), 6), Err(Error::ResourceCap(_))));
        assert!(matches!(build_state(&SchmidtSpectrum::uniform(3), 4), Err(Error::ResourceCap(_))));
        assert!(build_state(&SchmidtSpectrum::uniform(3), 3).is_ok());
        let idx = YoungIndex::new(alloc::vec![5, 4]).unwrap();
        assert!(matches!(isotypic_projector(&idx, 2), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn projector_examples() {
        for n in 1..=5u32 {
            let sym = isotypic_projector(&YoungIndex::new(alloc::vec![n]).unwrap(), 2).unwrap();
            assert!((sym.trace() - (n + 1) as f64).abs() < 1e-10);
        }
        let singlet = isotypic_projector(&YoungIndex::new(alloc::vec![1, 1]).unwrap(), 2).unwrap();
        assert!((singlet.trace() - 1.0).abs() < 1e-12);
        let h = 0.5;
        let expect = [[0.0, 0.0, 0.0, 0.0], [0.0, h, -h, 0.0], [0.0, -h, h, 0.0], [0.0, 0.0, 0.0, 0.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert!((singlet.matrix[(i, j)] - expect[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn projectors_are_complete_and_orthogonal() {
        for (d, max_n) in [(2usize, 5u32), (3, 3)] {
            for n in 1..=max_n {
                let all = isotypic_projectors(n, d, &OracleCaps::default()).unwrap();
                let dim = all[0].matrix.nrows();
                let mut sum = DMatrix::<f64>::zeros(dim, dim);
                for p in &all {
                    assert!(p.idempotence_residual() < 1e-10);
                    assert!(p.symmetry_residual() < 1e-10);
                    assert!((p.trace() - p.expected_trace()).abs() < 1e-9);
                    sum += &p.matrix;
                }
                assert!((sum - DMatrix::<f64>::identity(dim, dim)).amax() < 1e-10);
                for (i, a) in all.iter().enumerate() {
                    for b in &all[i + 1..] {
                        assert!((&a.matrix * &b.matrix).amax() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn eight_copies_within_cap() {
        let all = isotypic_projectors(8, 2, &OracleCaps::default()).unwrap();
        let total: f64 = all.iter().map(|p| p.trace()).sum();
        assert!((total - 256.0).abs() < 1e-8);
    }

    #[test]
    fn outcome_law_examples() {
        assert!(verify_outcome_law(&fr(&[(1, 1), (0, 1)]), 4).unwrap() < 1e-14);
        let probs = outcome_probabilities(&build_state(&SchmidtSpectrum::uniform(2), 3).unwrap(), &OracleCaps::default()).unwrap();
        for (_, q) in &probs {
            assert!((q - 0.5).abs() < 1e-12);
        }
        for n in 2..=4 {
            assert!(verify_outcome_law(&fr(&[(3, 4), (1, 4)]), n).unwrap() < 1e-10);
        }
    }

    #[test]
    fn outcome_law_on_the_supported_grid() {
        let spectra = [
            fr(&[(3, 4), (1, 4)]),
            fr(&[(1, 2), (1, 2)]),
            fr(&[(9, 10), (1, 10)]),
            fr(&[(1, 2), (1, 3), (1, 6)]),
            fr(&[(1, 3), (1, 3), (1, 3)]),
            fr(&[(3, 5), (2, 5), (0, 1)]),
        ];
        for p in &spectra {
            let max_n = if p.d() == 2 { 5 } else { 3 };
            for n in 1..=max_n {
                assert!(verify_outcome_law(p, n).unwrap() < 1e-10, "{p} n={n}");
            }
        }
    }

    #[test]
    fn extraction_examples() {
        let p = fr(&[(3, 4), (1, 4)]);
        let c = verify_extracted_entanglement(&p, 2, &YoungIndex::new(alloc::vec![1, 1]).unwrap()).unwrap();
        assert_eq!((c.dim_v, c.rank), (1, 1));
        assert!(c.expected_entropy.abs() < 1e-12 && c.passes(1e-10));

        let c = verify_extracted_entanglement(&p, 3, &YoungIndex::new(alloc::vec![2, 1]).unwrap()).unwrap();
        assert_eq!(c.dim_v, 2);
        assert_eq!(c.group_sizes, alloc::vec![2, 2]);
        assert!(c.passes(1e-10), "{c:?}");
        assert!((c.entropy - c.expected_entropy).abs() < 1e-10);

        let pure = fr(&[(1, 1), (0, 1)]);
        let err = verify_extracted_entanglement(&pure, 2, &YoungIndex::new(alloc::vec![1, 1]).unwrap());
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn extraction_product_structure_everywhere() {
        for p in [fr(&[(3, 4), (1, 4)]), fr(&[(1, 2), (1, 3), (1, 6)])] {
            let max_n = if p.d() == 2 { 5 } else { 3 };
            for n in 1..=max_n {
                for idx in enumerate_young_indices(n, p.d()) {
                    let c = verify_extracted_entanglement(&p, n, &idx).unwrap();
                    assert!(c.passes(1e-9), "{p} {idx}: {c:?}");
                }
            }
        }
    }

    #[test]
    fn local_unitaries_leave_everything_invariant() {
        let p = fr(&[(3, 4), (1, 4)]);
        let n = 4;
        let base = build_state(&p, n).unwrap();
        let reference = outcome_probabilities(&base, &OracleCaps::default()).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_unitary(2, &mut rng);
            let v = random_unitary(2, &mut rng);
            assert!((&u * u.adjoint() - DMatrix::<C64>::identity(2, 2)).camax() < 1e-12);
            let rotated = base.with_local_unitaries(&u, &v);
            assert!((rotated.norm() - 1.0).abs() < 1e-12);
            let probs = outcome_probabilities(&rotated, &OracleCaps::default()).unwrap();
            for ((_, a), (_, b)) in probs.iter().zip(&reference) {
                assert!((a - b).abs() < 1e-10, "seed {seed}");
            }
            assert!(verify_outcome_law_for_state(&rotated, &p).unwrap() < 1e-10);
            let idx = YoungIndex::new(alloc::vec![3, 1]).unwrap();
            assert!(verify_extracted_entanglement_for_state(&rotated, &p, &idx).unwrap().passes(1e-9));
        }
    }

    #[test]
    fn tableau_weights_sum_to_schur_values() {
        let p = [0.5, 0.3, 0.2];
        let idx = YoungIndex::padded(alloc::vec![2, 1], 3).unwrap();
        let w = tableau_weights(idx.parts(), &p);
        assert_eq!(w.len() as u64, dim_u(&idx).to_u64().unwrap());
        let s = crate::schur::schur_polynomial(&idx, &SchmidtSpectrum::from_floats(p.to_vec()).unwrap()).unwrap();
        assert!((w.iter().sum::<f64>() - s).abs() < 1e-14);
    }
}
