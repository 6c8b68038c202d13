use serde::Serialize;

use super::state::{dmax_quantum, gen_trace_distance, purified_distance, DensityOperator};
use crate::error::{Error, Result};
use crate::limits::Caps;
use crate::linalg::HermitianMatrix;
use crate::probability::Distribution;
use crate::spectrum::for_each_type_class;

/// Largest joint dimension for the dense convex-split state.
pub const MAX_SPLIT_DIM: usize = 64;

/// Smallest `R` the lemma allows:
/// `ceil(D_max(rho' || rho'_A ⊗ sigma) + 2 log2(2 / delta))`.
pub fn convex_split_threshold(
    rho_prime: &DensityOperator,
    sigma: &HermitianMatrix,
    delta: f64,
) -> Result<u32> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} must lie in (0, 1)")));
    }
    let (da, db) = rho_prime.require_bipartite()?;
    let ra = rho_prime.matrix().partial_trace(&[da, db], &[0])?;
    let d = dmax_quantum(rho_prime.matrix(), &ra.kron(sigma))?;
    if !d.is_finite() {
        return Err(Error::domain("sigma does not dominate the B part of rho'"));
    }
    let r = (d + 2.0 * (2.0 / delta).log2()).ceil();
    Ok(r.max(0.0) as u32)
}

#[derive(Clone, Debug)]
pub struct ConvexSplit {
    /// `2^-R sum_j rho_{A B_j} ⊗ sigma^{⊗ rest}` on `A B_1 ... B_N`.
    pub tau: DensityOperator,
    /// `rho'_A ⊗ sigma^{⊗ N}`.
    pub target: DensityOperator,
}

impl ConvexSplit {
    pub fn trace_distance(&self) -> Result<f64> {
        gen_trace_distance(self.tau.matrix(), self.target.matrix())
    }

    pub fn purified_distance(&self) -> Result<f64> {
        purified_distance(self.tau.matrix(), self.target.matrix())
    }
}

/// Dense convex-split mixture with `N = 2^R` copies of `B`.
pub fn convex_split_state(
    rho: &DensityOperator,
    rho_prime: &DensityOperator,
    sigma: &DensityOperator,
    r: u32,
) -> Result<ConvexSplit> {
    let (da, db) = rho.require_bipartite()?;
    if rho_prime.dims() != rho.dims() || sigma.dim() != db {
        return Err(Error::usage(
            "convex split inputs have inconsistent dimensions",
        ));
    }
    let n = 1usize
        .checked_shl(r)
        .filter(|&n| n <= 16)
        .ok_or_else(|| Error::resource("too many copies"))?;
    let total = (db as f64).powi(n as i32) * da as f64;
    if total > MAX_SPLIT_DIM as f64 {
        return Err(Error::resource(format!(
            "convex split dimension {total} exceeds {MAX_SPLIT_DIM}; use the classical type-class path"
        )));
    }
    let mut rest = rho.clone();
    for _ in 1..n {
        rest = rest.kron(sigma);
    }
    let mut dims = vec![da];
    dims.extend(std::iter::repeat(db).take(n));
    let mut acc = HermitianMatrix::zeros(rest.dim());
    for j in 0..n {
        let perm: Vec<usize> = (0..=n)
            .map(|k| match k {
                0 => 0,
                k if k == 1 + j => 1,
                k if k < 1 + j => k + 1,
                k => k,
            })
            .collect();
        acc = &acc + rest.permute(&perm)?.matrix();
    }
    let tau = DensityOperator::new(acc.scale(1.0 / n as f64), dims.clone())?;
    let mut target = rho_prime.marginal(&[0])?;
    for _ in 0..n {
        target = target.kron(sigma);
    }
    Ok(ConvexSplit { tau, target })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitDistances {
    pub copies: usize,
    pub trace: f64,
    pub purified: f64,
}

/// Exact distances between the convex-split mixture and `rho'_A ⊗ sigma^{⊗N}`
/// for commuting (classical) inputs, aggregated over type classes of
/// `B_1 ... B_N`. Needs `sigma > 0` everywhere.
pub fn convex_split_classical(
    p: &Distribution,
    p_prime: &Distribution,
    sigma: &[f64],
    r: u32,
    caps: &Caps,
) -> Result<SplitDistances> {
    let (na, nb) = p.require_bipartite()?;
    if p_prime.shape() != p.shape() || sigma.len() != nb {
        return Err(Error::usage("convex split inputs have inconsistent shapes"));
    }
    if sigma.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::domain("sigma must have full support"));
    }
    let n = 1usize
        .checked_shl(r)
        .filter(|&n| n <= 1 << 20)
        .ok_or_else(|| Error::resource("too many copies"))?;
    let pa_prime = p_prime.marginal(&[0])?;
    let ratio: Vec<Vec<f64>> = (0..na)
        .map(|a| (0..nb).map(|b| p.get(a, b) / sigma[b]).collect())
        .collect();
    let ln_sigma: Vec<f64> = sigma.iter().map(|s| s.ln()).collect();
    let (mut gap, mut overlap) = (0.0, 0.0);
    let (mut tau_mass, mut target_mass) = (0.0, 0.0);
    for_each_type_class(n, nb, caps, |counts, ln_multinomial| {
        let ln_w = ln_multinomial
            + counts
                .iter()
                .zip(&ln_sigma)
                .map(|(&c, l)| c as f64 * l)
                .sum::<f64>();
        let w = ln_w.exp();
        for (a, row) in ratio.iter().enumerate() {
            let tau: f64 = counts
                .iter()
                .zip(row)
                .map(|(&c, r)| c as f64 * r)
                .sum::<f64>()
                / n as f64;
            let target = pa_prime.weights()[a];
            gap += w * (tau - target).abs();
            overlap += w * (tau * target).sqrt();
            tau_mass += w * tau;
            target_mass += w * target;
        }
    })?;
    let trace = 0.5 * gap + 0.5 * (tau_mass - target_mass).abs();
    let completion = ((1.0 - tau_mass).max(0.0) * (1.0 - target_mass).max(0.0)).sqrt();
    let f = (overlap + completion).clamp(0.0, 1.0);
    Ok(SplitDistances {
        copies: n,
        trace,
        purified: (1.0 - f * f).max(0.0).sqrt(),
    })
}
