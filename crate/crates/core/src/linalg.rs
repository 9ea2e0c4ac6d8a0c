//! Exact dense determinants over a field.

use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Determinant by fraction-exact Gaussian elimination. `rows` is consumed.
pub fn det_rational(mut rows: Vec<Vec<BigRational>>) -> BigRational {
    let n = rows.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !rows[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            rows.swap(pivot, col);
            det = -det;
        }
        let p = rows[col][col].clone();
        det *= &p;
        for r in col + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            let factor = &rows[r][col] / &p;
            for c in col..n {
                let sub = &factor * &rows[col][c];
                rows[r][c] -= sub;
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_bigint::BigInt;

    fn r(a: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(a))
    }

    #[test]
    fn small_determinants() {
        assert_eq!(det_rational(vec![vec![r(1), r(2)], vec![r(3), r(4)]]), r(-2));
        assert_eq!(det_rational(vec![vec![r(0), r(1)], vec![r(1), r(0)]]), r(-1));
        assert_eq!(
            det_rational(vec![vec![r(2), r(0), r(1)], vec![r(1), r(3), r(2)], vec![r(1), r(1), r(1)]]),
            r(0) + r(2) * (r(3) - r(2)) + r(1) * (r(1) - r(3))
        );
    }
}
