use crate::error::{Error, Result};
use crate::linalg::RealMatrix;

/// One symmetric matrix per block, stored sparsely as upper-triangle entries.
///
/// An entry `(b, i, j, v)` with `i <= j` stands for `A_ij = A_ji = v` in block `b`,
/// so it contributes `v X_ii` (i = j) or `2 v X_ij` (i < j) to `<A, X>`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymCoeffs {
    entries: Vec<(usize, usize, usize, f64)>,
}

impl SymCoeffs {
    pub fn new() -> Self {
        SymCoeffs::default()
    }

    /// Adds `v * X[i][j]` to the linear functional.
    pub fn add_entry(&mut self, block: usize, i: usize, j: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        if i == j {
            self.entries.push((block, i, i, v));
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            self.entries.push((block, a, b, 0.5 * v));
        }
    }

    /// Sorts and merges duplicate positions, dropping exact zeros.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|x| (x.0, x.1, x.2));
        let mut out: Vec<(usize, usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &e in &self.entries {
            match out.last_mut() {
                Some(l) if (l.0, l.1, l.2) == (e.0, e.1, e.2) => l.3 += e.3,
                _ => out.push(e),
            }
        }
        out.retain(|e| e.3 != 0.0);
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `<A, X>` over all blocks.
    pub fn dot(&self, x: &[RealMatrix]) -> f64 {
        self.entries
            .iter()
            .map(|&(b, i, j, v)| {
                if i == j {
                    v * x[b][(i, i)]
                } else {
                    v * (x[b][(i, j)] + x[b][(j, i)])
                }
            })
            .sum()
    }

    /// `out += s * A` (dense, symmetric).
    pub fn add_to(&self, out: &mut [RealMatrix], s: f64) {
        for &(b, i, j, v) in &self.entries {
            out[b][(i, j)] += s * v;
            if i != j {
                out[b][(j, i)] += s * v;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }
}

/// Real symmetric block SDP in standard form:
/// minimize `<C, X>` subject to `<A_i, X> = b_i` and every block `X_k >= 0`.
///
/// Nonnegative scalar variables are modeled as diagonal blocks whose
/// coefficients never touch off-diagonal entries; the interior-point iterates
/// then stay diagonal.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    pub objective: SymCoeffs,
    pub constraints: Vec<SymCoeffs>,
    pub rhs: Vec<f64>,
}

impl SdpProblem {
    pub fn new(block_dims: Vec<usize>) -> Self {
        SdpProblem {
            block_dims,
            ..Default::default()
        }
    }

    pub fn add_constraint(&mut self, mut a: SymCoeffs, b: f64) {
        a.compress();
        self.constraints.push(a);
        self.rhs.push(b);
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_dims.is_empty() || self.block_dims.contains(&0) {
            return Err(Error::usage("SDP needs nonempty blocks"));
        }
        if self.constraints.len() != self.rhs.len() {
            return Err(Error::usage("constraint and rhs counts differ"));
        }
        let check = |a: &SymCoeffs| {
            a.entries().iter().all(|&(b, i, j, v)| {
                b < self.block_dims.len() && i <= j && j < self.block_dims[b] && v.is_finite()
            })
        };
        if !check(&self.objective) || !self.constraints.iter().all(check) {
            return Err(Error::usage("SDP coefficient out of range or non-finite"));
        }
        if self.rhs.iter().any(|b| !b.is_finite()) {
            return Err(Error::usage("non-finite SDP right-hand side"));
        }
        Ok(())
    }

    pub fn zero_blocks(&self) -> Vec<RealMatrix> {
        self.block_dims
            .iter()
            .map(|&d| RealMatrix::zeros(d, d))
            .collect()
    }
}
