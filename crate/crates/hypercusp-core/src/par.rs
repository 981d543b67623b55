//! Index-range parallel map with a deterministic block reduction.

use alloc::vec::Vec;

use crate::clifford::Multivector;
use crate::scalar::Scalar;
use crate::sum::{pairwise_mv, BLOCK};

#[cfg(feature = "parallel")]
pub fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Σ_{i<n} f(i): sequential within fixed blocks, blocks combined pairwise.
pub fn sum_mv<S: Scalar, F>(dim: usize, n: usize, f: F) -> Multivector<S>
where
    F: Fn(usize, &mut Multivector<S>) + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    let partial = map(blocks, |b| {
        let mut acc = Multivector::zero(dim);
        for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
            f(i, &mut acc);
        }
        acc
    });
    pairwise_mv(dim, &partial)
}
