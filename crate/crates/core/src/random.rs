//! Seeded random fixtures: distributions, states, isometries and channels.
//!
//! Every generator takes the caller's RNG; [`seeded`] builds the standard
//! ChaCha8 stream from a 64-bit seed so runs are reproducible.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::probability::Distribution;
use crate::quantum::DensityOperator;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from the simplex (flat Dirichlet) on an `nx x ny` table.
pub fn distribution<R: Rng>(rng: &mut R, nx: usize, ny: usize) -> Distribution {
    let w: Vec<f64> = (0..nx * ny)
        .map(|_| rng.sample::<f64, _>(Exp1) + 1e-9)
        .collect();
    let total: f64 = w.iter().sum();
    Distribution::new(vec![nx, ny], w.iter().map(|x| x / total).collect())
        .expect("normalized weights")
}

/// Row-stochastic `n_in x n_out` map with flat Dirichlet rows.
pub fn stochastic_map<R: Rng>(rng: &mut R, n_in: usize, n_out: usize) -> Vec<Vec<f64>> {
    (0..n_in)
        .map(|_| {
            let w: Vec<f64> = (0..n_out).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let t: f64 = w.iter().sum();
            w.iter().map(|x| x / t).collect()
        })
        .collect()
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// `G G^dagger / tr` for a `dim x rank` Ginibre matrix `G`.
pub fn density<R: Rng>(rng: &mut R, dims: &[usize], rank: usize) -> DensityOperator {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, rank.max(1));
    let m = HermitianMatrix::hermitize(&g * &g.adjoint());
    let m = m.scale(1.0 / m.trace());
    DensityOperator::new(m, dims.to_vec()).expect("Ginibre state is valid")
}

pub fn pure_state<R: Rng>(rng: &mut R, dims: &[usize]) -> DensityOperator {
    density(rng, dims, 1)
}

/// Columns of a Ginibre matrix orthonormalized: an isometry `C^cols -> C^rows`.
pub fn isometry<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let mut g = ginibre(rng, rows, cols);
    for j in 0..cols {
        let mut v = g.column_vec(j);
        for _ in 0..2 {
            for k in 0..j {
                let u = g.column_vec(k);
                let p: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ui) in v.iter_mut().zip(&u) {
                    *vi -= p * ui;
                }
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<Complex64> = v.iter().map(|z| z / n).collect();
        g.set_column(j, &v);
    }
    g
}

pub fn unitary<R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix {
    isometry(rng, d, d)
}

/// Kraus operators `K_i: C^d_in -> C^d_out` of a random trace-preserving map,
/// cut from the blocks of a random isometry `C^d_in -> C^(k d_out)`.
pub fn kraus_channel<R: Rng>(
    rng: &mut R,
    d_in: usize,
    d_out: usize,
    k: usize,
) -> Vec<ComplexMatrix> {
    let v = isometry(rng, k * d_out, d_in);
    (0..k)
        .map(|i| ComplexMatrix::from_fn(d_out, d_in, |r, c| v[(i * d_out + r, c)]))
        .collect()
}
