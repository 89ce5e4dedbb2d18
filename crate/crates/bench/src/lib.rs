//! Seeded fixtures shared by the benchmarks.

use slra::rng::{normal_vec, rng};
use slra::DenseMatrix;

pub fn gaussian(n: usize, d: usize, seed: u64) -> DenseMatrix {
    DenseMatrix::new(n, d, normal_vec(&mut rng(seed), n * d)).expect("finite entries")
}
