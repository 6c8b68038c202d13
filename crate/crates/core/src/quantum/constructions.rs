use num_complex::Complex64;

use super::state::{psd_part, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::{polar_unitary, ComplexMatrix, HermitianMatrix};

/// Output of the marginal-repair construction used for the partial/full
/// equivalence bounds.
#[derive(Clone, Debug)]
pub struct HatConstruction {
    pub rho_hat: HermitianMatrix,
    /// Projector `P^gamma` onto the positive part of `tilde_rho_X / gamma - rho_X`.
    pub projector: HermitianMatrix,
    pub gamma: f64,
    /// `max |rho_hat_X - rho_X|` on the repaired factor.
    pub marginal_residual: f64,
}

/// The repaired factor of a bipartite state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    A,
    B,
}

fn lift(op: &HermitianMatrix, side: Side, da: usize, db: usize) -> ComplexMatrix {
    match side {
        Side::A => op.matrix().kron(&ComplexMatrix::identity(db)),
        Side::B => ComplexMatrix::identity(da).kron(op.matrix()),
    }
}

fn lift_general(op: &ComplexMatrix, side: Side, da: usize, db: usize) -> ComplexMatrix {
    match side {
        Side::A => op.kron(&ComplexMatrix::identity(db)),
        Side::B => ComplexMatrix::identity(da).kron(op),
    }
}

/// Shared core: with `X` the repaired factor and `Y` the other one,
/// `rho_hat = rho_X^{1/2} V bar_X^{-1/2} bar bar_X^{-1/2} V^† rho_X^{1/2} + (rho_X^{1/2}(1 - V P V^†) rho_X^{1/2}) ⊗ filler`.
///
/// `P` is replaced by the support projector of `bar_X`, which equals it
/// mathematically and makes the marginal identity hold to rounding.
fn hat_core(
    rho: &DensityOperator,
    tilde: &HermitianMatrix,
    filler: &HermitianMatrix,
    delta: f64,
    side: Side,
) -> Result<HatConstruction> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(format!("delta {delta} must lie in (0, 1]")));
    }
    let (da, db) = rho.require_bipartite()?;
    if tilde.dim() != da * db {
        return Err(Error::usage("smoothed state has the wrong dimension"));
    }
    let dims = [da, db];
    let (keep, other) = match side {
        Side::A => (0, db),
        Side::B => (1, da),
    };
    if filler.dim() != other {
        return Err(Error::usage("filler state has the wrong dimension"));
    }
    let tilde = psd_part(tilde)?;
    let rho_x = rho.matrix().partial_trace(&dims, &[keep])?;
    let tilde_x = tilde.partial_trace(&dims, &[keep])?;
    let gamma = delta * delta / 8.0;
    let p = (&tilde_x.scale(1.0 / gamma) - &rho_x).positive_part()?;
    let bar = tilde.conjugate_by(&lift(&p, side, da, db));
    let bar_x = bar.partial_trace(&dims, &[keep])?;

    let e = bar_x.eig()?;
    let tau = e.rank_threshold();
    let bar_inv_sqrt = e.map(|l| if l > tau { 1.0 / l.sqrt() } else { 0.0 });
    let support = e.map(|l| if l > tau { 1.0 } else { 0.0 });
    let bar_sqrt = e.map(|l| l.max(0.0).sqrt());
    let rho_sqrt = psd_part(&rho_x)?.sqrt()?;

    let v = polar_unitary(&(rho_sqrt.matrix() * bar_sqrt.matrix()))?;
    let k = &(rho_sqrt.matrix() * &v) * bar_inv_sqrt.matrix();
    let tau_part = bar.conjugate_by(&lift_general(&k, side, da, db));
    let nx = rho_x.dim();
    let rest = &ComplexMatrix::identity(nx) - &support.matrix().conjugate_by(&v);
    let rest = HermitianMatrix::hermitize(rest).conjugate_by(rho_sqrt.matrix());
    let sigma_part = match side {
        Side::A => rest.kron(filler),
        Side::B => filler.kron(&rest),
    };
    let rho_hat = &tau_part + &sigma_part;
    let marginal_residual = rho_hat.partial_trace(&dims, &[keep])?.max_abs_diff(&rho_x);
    Ok(HatConstruction {
        rho_hat,
        projector: p,
        gamma,
        marginal_residual,
    })
}

/// Repairs the `A` marginal of a full max-information optimizer:
/// the result has `rho_hat_A = rho_A` and stays within `2 eps + delta` in
/// purified distance when `tilde` is within `eps`.
pub fn thm2_hat_construction(
    rho: &DensityOperator,
    tilde: &HermitianMatrix,
    sigma_b: &HermitianMatrix,
    delta: f64,
) -> Result<HatConstruction> {
    hat_core(rho, tilde, sigma_b, delta, Side::A)
}

/// Repairs the `B` marginal of a full min-entropy optimizer, padding with the
/// maximally mixed state on `A`.
pub fn thm3_hat_construction(
    rho: &DensityOperator,
    tilde: &HermitianMatrix,
    delta: f64,
) -> Result<HatConstruction> {
    let (da, _) = rho.require_bipartite()?;
    let mixed = HermitianMatrix::identity(da).scale(1.0 / da as f64);
    hat_core(rho, tilde, &mixed, delta, Side::B)
}

/// `omega_ZB = sum_x |f(x)><f(x)| ⊗ rho_B^x` for a state classical on the
/// first factor `X`; `f` maps into `0..nz`.
pub fn cq_function_apply(rho: &DensityOperator, f: &[usize], nz: usize) -> Result<DensityOperator> {
    let (nx, db) = rho.require_bipartite()?;
    if f.len() != nx || f.iter().any(|&z| z >= nz) {
        return Err(Error::usage("function table must map every x into 0..nz"));
    }
    let m = rho.matrix();
    let mut off = 0.0f64;
    for x in 0..nx {
        for x2 in 0..nx {
            if x != x2 {
                for i in 0..db {
                    for j in 0..db {
                        off = off.max(m.get(x * db + i, x2 * db + j).norm());
                    }
                }
            }
        }
    }
    if off > 1e-10 {
        return Err(Error::domain(format!(
            "state is not classical on X (off-block {off:.2e})"
        )));
    }
    let mut out = ComplexMatrix::zeros(nz * db, nz * db);
    for x in 0..nx {
        let z = f[x];
        for i in 0..db {
            for j in 0..db {
                out[(z * db + i, z * db + j)] += m.get(x * db + i, x * db + j);
            }
        }
    }
    DensityOperator::new(HermitianMatrix::hermitize(out), vec![nz, db])
}

/// `omega_ABX = sum_x (P^x ⊗ 1) rho (P^x ⊗ 1) ⊗ |x><x|` for a complete set of
/// orthogonal projectors on `A`.
pub fn projective_measure_cq(
    rho: &DensityOperator,
    projectors: &[HermitianMatrix],
) -> Result<DensityOperator> {
    let (da, db) = rho.require_bipartite()?;
    if projectors.is_empty() || projectors.iter().any(|p| p.dim() != da) {
        return Err(Error::usage("projectors must act on A"));
    }
    let mut sum = HermitianMatrix::zeros(da);
    for p in projectors {
        let sq = HermitianMatrix::hermitize(p.matrix() * p.matrix());
        if sq.max_abs_diff(p) > 1e-9 {
            return Err(Error::usage("measurement operators must be projectors"));
        }
        sum = &sum + p;
    }
    if sum.max_abs_diff(&HermitianMatrix::identity(da)) > 1e-9 {
        return Err(Error::usage("projectors do not sum to the identity"));
    }
    let nx = projectors.len();
    let mut out = HermitianMatrix::zeros(da * db * nx);
    for (x, p) in projectors.iter().enumerate() {
        let branch = rho
            .matrix()
            .conjugate_by(&p.matrix().kron(&ComplexMatrix::identity(db)));
        let mut flag = vec![0.0; nx];
        flag[x] = 1.0;
        out = &out + &branch.kron(&HermitianMatrix::from_real_diag(&flag));
    }
    DensityOperator::new(out, vec![da, db, nx])
}

/// Applies Kraus operators `K_i` to one factor of a bipartite state.
pub fn apply_local_channel(
    rho: &DensityOperator,
    kraus: &[ComplexMatrix],
    on_a: bool,
) -> Result<DensityOperator> {
    let (da, db) = rho.require_bipartite()?;
    let d_in = if on_a { da } else { db };
    if kraus.is_empty()
        || kraus
            .iter()
            .any(|k| k.cols() != d_in || k.rows() != kraus[0].rows())
    {
        return Err(Error::usage("Kraus operators have inconsistent shapes"));
    }
    let d_out = kraus[0].rows();
    let mut out = HermitianMatrix::zeros(if on_a { d_out * db } else { da * d_out });
    for k in kraus {
        let full = if on_a {
            k.kron(&ComplexMatrix::identity(db))
        } else {
            ComplexMatrix::identity(da).kron(k)
        };
        out = &out + &rho.matrix().conjugate_by(&full);
    }
    let dims = if on_a {
        vec![d_out, db]
    } else {
        vec![da, d_out]
    };
    DensityOperator::new(out, dims)
}

/// Embeds factor `A` (or `B`) isometrically: `(V ⊗ 1) rho (V ⊗ 1)^†`.
pub fn embed_isometry(
    rho: &DensityOperator,
    v: &ComplexMatrix,
    on_a: bool,
) -> Result<DensityOperator> {
    let (da, db) = rho.require_bipartite()?;
    let d_in = if on_a { da } else { db };
    if v.cols() != d_in || v.rows() < d_in {
        return Err(Error::usage("isometry has the wrong shape"));
    }
    let vv = &v.adjoint() * v;
    if vv.max_abs_diff(&ComplexMatrix::identity(d_in)) > 1e-9 {
        return Err(Error::usage("map is not an isometry"));
    }
    apply_local_channel(rho, std::slice::from_ref(v), on_a)
}

/// Coherent classical copy `sum_{x,x'} |x x><x' x'|`-type embedding: maps
/// `X'` to `X X'` via `|x> -> |x>|x>`, as an isometry `C^n -> C^(n*n)`.
pub fn copy_isometry(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n, |r, c| {
        if r == c * n + c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
