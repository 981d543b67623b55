//! Small dense least-squares solves.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

/// Solution of min ‖A x − b_j‖ for several right-hand sides.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    /// solutions[j] solves column j.
    pub solutions: Vec<Vec<f64>>,
    /// Numerical rank after dropping singular values below `rank_tol`·σ_max.
    pub rank: usize,
    /// σ_max/σ_min over the retained singular values.
    pub condition: f64,
    pub singular_values: Vec<f64>,
}

/// Rank-revealing SVD solve. `rows` is row-major with `cols` entries per row.
pub fn lstsq(rows: &[Vec<f64>], rhs: &[Vec<f64>], rank_tol: f64) -> LeastSquares {
    let m = rows.len();
    let cols = rows.first().map(|r| r.len()).unwrap_or(0);
    let a = DMatrix::from_fn(m, cols, |i, j| rows[i][j]);
    let svd = a.svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let eps = rank_tol * smax;
    let rank = sv.iter().filter(|&&s| s > eps).count();
    let smin = sv.iter().copied().filter(|&s| s > eps).fold(f64::INFINITY, f64::min);
    let condition = if rank == 0 { f64::INFINITY } else { smax / smin };
    let solutions = rhs
        .iter()
        .map(|b| {
            let bv = DVector::from_column_slice(b);
            match svd.solve(&bv, eps) {
                Ok(x) => x.iter().copied().collect(),
                Err(_) => alloc::vec![0.0; cols],
            }
        })
        .collect();
    LeastSquares { solutions, rank, condition, singular_values: sv }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_solution() {
        let hs = [0.5, 0.75, 1.0, 1.5, 2.0, 3.0];
        let rows: Vec<Vec<f64>> = hs.iter().map(|&h: &f64| alloc::vec![1.0, h, h * h]).collect();
        let b: Vec<f64> = hs.iter().map(|&h| 2.0 - 3.0 * h + 0.5 * h * h).collect();
        let s = lstsq(&rows, &[b], 1e-12);
        assert_eq!(s.rank, 3);
        for (x, t) in s.solutions[0].iter().zip([2.0, -3.0, 0.5]) {
            assert!((x - t).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_columns_are_rank_deficient() {
        let rows: Vec<Vec<f64>> = (1..6).map(|i| alloc::vec![1.0, 1.0, i as f64]).collect();
        let b: Vec<f64> = (1..6).map(|i| 4.0 + i as f64).collect();
        let s = lstsq(&rows, &[b], 1e-12);
        assert_eq!(s.rank, 2);
        // minimum-norm split of the merged coefficient
        assert!((s.solutions[0][0] + s.solutions[0][1] - 4.0).abs() < 1e-12);
    }
}
