//! Seeded fixtures shared by the benchmarks.

use oneshot_core::quantum::DensityOperator;
use oneshot_core::{random, Distribution};

/// Binary symmetric channel with crossover 0.1 on a uniform bit.
pub fn correlated_bits() -> Distribution {
    Distribution::from_rows(&[vec![0.45, 0.05], vec![0.05, 0.45]]).expect("valid fixture")
}

pub fn random_distribution(nx: usize, ny: usize, seed: u64) -> Distribution {
    random::distribution(&mut random::seeded(seed), nx, ny)
}

/// Full-rank random state on `dims`.
pub fn random_state(dims: &[usize], seed: u64) -> DensityOperator {
    let d = dims.iter().product();
    random::density(&mut random::seeded(seed), dims, d)
}

/// `|X| = 2^n` uniform with `Y` the low bit of `X`.
pub fn low_bit_leak(n: u32) -> Distribution {
    let nx = 1usize << n;
    let mut w = vec![0.0; nx * 2];
    for x in 0..nx {
        w[x * 2 + (x & 1)] = 1.0 / nx as f64;
    }
    Distribution::new(vec![nx, 2], w).expect("valid fixture")
}
