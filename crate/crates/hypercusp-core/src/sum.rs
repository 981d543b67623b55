//! Deterministic pairwise summation.

use crate::clifford::Multivector;
use crate::scalar::Scalar;

/// Fixed block length; partial sums never depend on thread count.
pub const BLOCK: usize = 256;

pub fn pairwise<S: Scalar>(xs: &[S]) -> S {
    match xs.len() {
        0 => S::zero(),
        1 => xs[0],
        n if n <= 8 => {
            let mut s = xs[0];
            for &x in &xs[1..] {
                s += x;
            }
            s
        }
        n => {
            let h = n / 2;
            pairwise(&xs[..h]) + pairwise(&xs[h..])
        }
    }
}

/// Componentwise pairwise sum of multivectors.
pub fn pairwise_mv<S: Scalar>(dim: usize, xs: &[Multivector<S>]) -> Multivector<S> {
    match xs.len() {
        0 => Multivector::zero(dim),
        1 => xs[0].clone(),
        n => {
            let h = n / 2;
            let mut a = pairwise_mv(dim, &xs[..h]);
            a += &pairwise_mv(dim, &xs[h..]);
            a
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_beats_naive_on_cancellation() {
        let mut xs = alloc::vec![1.0f64];
        xs.extend(core::iter::repeat_n(1e-16, 1 << 16));
        let s = pairwise(&xs);
        assert!((s - (1.0 + 65536e-16)).abs() < 1e-15);
    }
}
