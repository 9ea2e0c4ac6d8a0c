//! Exact rational linear programming: dense two-phase simplex with Bland's rule.
//!
//! Meant for small instances (tens of constraints, a few hundred variables)
//! where an exact answer is worth more than speed.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coefficients: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

/// `maximize c·x subject to constraints, x ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub objective: Vec<BigRational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: BigRational,
    pub x: Vec<BigRational>,
}

impl LinearProgram {
    pub fn new(objective: Vec<BigRational>) -> Self {
        Self { objective, constraints: Vec::new() }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coefficients: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coefficients.len(), self.objective.len(), "constraint width");
        self.constraints.push(Constraint { coefficients, relation, rhs });
    }

    pub fn maximize(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(&self.objective)
    }
}

/// Exact conversion of a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

pub fn int(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

struct Tableau {
    /// `m` rows of `cols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    structural: usize,
    /// First artificial column; columns at or past it are artificial.
    artificial_start: usize,
    cols: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let nv = lp.variables();
        let m = lp.constraints.len();
        // normalise to non-negative right-hand sides
        let normalised: Vec<(Vec<BigRational>, Relation, BigRational)> = lp
            .constraints
            .iter()
            .map(|c| {
                if c.rhs.is_negative() {
                    let flipped = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coefficients.iter().map(|a| -a).collect(), flipped, -&c.rhs)
                } else {
                    (c.coefficients.clone(), c.relation, c.rhs.clone())
                }
            })
            .collect();
        let slacks = normalised.iter().filter(|c| c.1 != Relation::Eq).count();
        let artificials = normalised.iter().filter(|c| c.1 != Relation::Le).count();
        let artificial_start = nv + slacks;
        let cols = artificial_start + artificials;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut s, mut a) = (nv, artificial_start);
        for (coeffs, rel, rhs) in normalised {
            let mut row = alloc::vec![BigRational::zero(); cols + 1];
            row[..nv].clone_from_slice(&coeffs);
            row[cols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = BigRational::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -BigRational::one();
                    s += 1;
                    row[a] = BigRational::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = BigRational::one();
                    basis.push(a);
                    a += 1;
                }
            }
            rows.push(row);
        }
        Self { rows, basis, structural: nv, artificial_start, cols }
    }

    /// Reduced-cost row `c_B B^{-1} A - c` for the given costs (with value in the last slot).
    fn reduced_costs(&self, cost: &[BigRational]) -> Vec<BigRational> {
        let mut r: Vec<BigRational> = (0..=self.cols)
            .map(|j| if j < self.cols { -cost[j].clone() } else { BigRational::zero() })
            .collect();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if cost[b].is_zero() {
                continue;
            }
            for (rj, a) in r.iter_mut().zip(row) {
                if !a.is_zero() {
                    *rj += &cost[b] * a;
                }
            }
        }
        r
    }

    fn pivot(&mut self, r: &mut [BigRational], row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for a in self.rows[row].iter_mut() {
            if !a.is_zero() {
                *a *= &inv;
            }
        }
        let pivot_row = self.rows[row].clone();
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (a, p) in other.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
        }
        if !r[col].is_zero() {
            let factor = r[col].clone();
            for (a, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *a -= &factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations with Bland's rule over columns `< allowed`.
    fn iterate(&mut self, r: &mut [BigRational], allowed: usize) -> Result<()> {
        loop {
            let Some(col) = (0..allowed).find(|&j| r[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, BigRational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, row, col);
        }
    }

    fn solve(mut self, objective: &[BigRational]) -> Result<LpSolution> {
        if self.artificial_start < self.cols {
            let mut cost = alloc::vec![BigRational::zero(); self.cols];
            for c in cost.iter_mut().skip(self.artificial_start) {
                *c = -BigRational::one();
            }
            let mut r = self.reduced_costs(&cost);
            self.iterate(&mut r, self.cols)?;
            if r[self.cols].is_negative() {
                return Err(Error::Infeasible);
            }
            // drive zero-level artificials out of the basis, dropping redundant rows
            let mut i = 0;
            while i < self.rows.len() {
                if self.basis[i] >= self.artificial_start {
                    match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                        Some(j) => {
                            let mut dummy = alloc::vec![BigRational::zero(); self.cols + 1];
                            self.pivot(&mut dummy, i, j);
                        }
                        None => {
                            self.rows.remove(i);
                            self.basis.remove(i);
                            continue;
                        }
                    }
                }
                i += 1;
            }
        }
        let mut cost = alloc::vec![BigRational::zero(); self.cols];
        cost[..self.structural].clone_from_slice(objective);
        let mut r = self.reduced_costs(&cost);
        self.iterate(&mut r, self.artificial_start)?;
        let mut x = alloc::vec![BigRational::zero(); self.structural];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.structural {
                x[b] = row[self.cols].clone();
            }
        }
        Ok(LpSolution { value: r[self.cols].clone(), x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let mut lp = LinearProgram::new(alloc::vec![int(3), int(5)]);
        lp.add(alloc::vec![int(1), int(0)], Relation::Le, int(4));
        lp.add(alloc::vec![int(0), int(2)], Relation::Le, int(12));
        lp.add(alloc::vec![int(3), int(2)], Relation::Le, int(18));
        let s = lp.maximize().unwrap();
        assert_eq!(s.value, int(36));
        assert_eq!(s.x, alloc::vec![int(2), int(6)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y, x + y = 1, x ≥ 1/3, y ≥ 1/4 → 1
        let mut lp = LinearProgram::new(alloc::vec![int(1), int(2)]);
        lp.add(alloc::vec![int(1), int(1)], Relation::Eq, int(1));
        lp.add(alloc::vec![int(1), int(0)], Relation::Ge, q(1, 3));
        let s = lp.maximize().unwrap();
        assert_eq!(s.value, q(5, 3));
        assert_eq!(s.x, alloc::vec![q(1, 3), q(2, 3)]);
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // -x ≤ -2 means x ≥ 2; max -x → -2
        let mut lp = LinearProgram::new(alloc::vec![int(-1)]);
        lp.add(alloc::vec![int(-1)], Relation::Le, int(-2));
        assert_eq!(lp.maximize().unwrap().value, int(-2));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(alloc::vec![int(1)]);
        lp.add(alloc::vec![int(1)], Relation::Le, int(1));
        lp.add(alloc::vec![int(1)], Relation::Ge, int(2));
        assert_eq!(lp.maximize(), Err(Error::Infeasible));
        let mut lp = LinearProgram::new(alloc::vec![int(1), int(0)]);
        lp.add(alloc::vec![int(0), int(1)], Relation::Le, int(1));
        assert_eq!(lp.maximize(), Err(Error::Unbounded));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(alloc::vec![int(1), int(1)]);
        lp.add(alloc::vec![int(1), int(1)], Relation::Eq, int(2));
        lp.add(alloc::vec![int(2), int(2)], Relation::Eq, int(4));
        lp.add(alloc::vec![int(1), int(0)], Relation::Le, int(1));
        assert_eq!(lp.maximize().unwrap().value, int(2));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example; cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(alloc::vec![q(3, 4), int(-150), q(1, 50), int(-6)]);
        lp.add(alloc::vec![q(1, 4), int(-60), q(-1, 25), int(9)], Relation::Le, int(0));
        lp.add(alloc::vec![q(1, 2), int(-90), q(-1, 50), int(3)], Relation::Le, int(0));
        lp.add(alloc::vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1));
        assert_eq!(lp.maximize().unwrap().value, q(1, 20));
    }

    #[test]
    fn brute_force_vertices_agree() {
        // random 2-variable programs against vertex enumeration
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) % 11) as i64 - 2
        };
        for _ in 0..200 {
            let c = [next(), next()];
            let rows: Vec<([i64; 2], i64)> = (0..3).map(|_| ([next().abs() + 1, next().abs()], next().abs() + 1)).collect();
            let mut lp = LinearProgram::new(alloc::vec![int(c[0]), int(c[1])]);
            for (a, b) in &rows {
                lp.add(alloc::vec![int(a[0]), int(a[1])], Relation::Le, int(*b));
            }
            let feasible = |x: &BigRational, y: &BigRational| {
                !x.is_negative()
                    && !y.is_negative()
                    && rows.iter().all(|(a, b)| int(a[0]) * x + int(a[1]) * y <= int(*b))
            };
            // candidate vertices: pairwise intersections of all boundary lines
            let mut lines: Vec<([i64; 2], i64)> = rows.clone();
            lines.push(([1, 0], 0));
            lines.push(([0, 1], 0));
            let mut best: Option<BigRational> = None;
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a, b) = (lines[i], lines[j]);
                    let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
                    if det == 0 {
                        continue;
                    }
                    let x = q(a.1 * b.0[1] - a.0[1] * b.1, det);
                    let y = q(a.0[0] * b.1 - a.1 * b.0[0], det);
                    if feasible(&x, &y) {
                        let v = int(c[0]) * &x + int(c[1]) * &y;
                        if best.as_ref().is_none_or(|b| v > *b) {
                            best = Some(v);
                        }
                    }
                }
            }
            let sol = lp.maximize();
            if rows.iter().all(|(a, _)| a[1] == 0) && c[1] > 0 {
                assert_eq!(sol, Err(Error::Unbounded));
                continue;
            }
            assert_eq!(sol.unwrap().value, best.unwrap());
        }
    }
}
