use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::json::MatrixJson;
use crate::linalg::{trace_norm_general, ComplexMatrix, HermitianMatrix};

/// Tolerance on negative eigenvalues and on trace excess for valid states.
pub const STATE_TOL: f64 = 1e-10;

/// Sub-normalized density operator on a tensor product of factors.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: HermitianMatrix,
}

impl DensityOperator {
    pub fn new(matrix: HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != matrix.dim() {
            return Err(Error::usage(format!(
                "factor dims {dims:?} do not match matrix dimension {}",
                matrix.dim()
            )));
        }
        let tr = matrix.trace();
        if !(tr > 0.0 && tr <= 1.0 + STATE_TOL) {
            return Err(Error::domain(format!("state trace {tr} outside (0, 1]")));
        }
        let min = matrix.min_eigenvalue()?;
        if min < -STATE_TOL {
            return Err(Error::domain(format!(
                "state is not PSD (min eigenvalue {min:.3e})"
            )));
        }
        Ok(DensityOperator { dims, matrix })
    }

    /// Clips small negative eigenvalues (e.g. of an SDP optimizer) before validating.
    pub fn from_psd_approx(matrix: &HermitianMatrix, dims: Vec<usize>) -> Result<Self> {
        DensityOperator::new(psd_part(matrix)?, dims)
    }

    pub fn pure(vector: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::domain("zero state vector"));
        }
        let v: Vec<Complex64> = vector.iter().map(|z| z / norm).collect();
        DensityOperator::new(HermitianMatrix::projector_onto(&v), dims)
    }

    /// Maximally entangled state on `d x d`.
    pub fn max_entangled(d: usize) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0, 0.0);
        }
        DensityOperator::pure(&v, vec![d, d])
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityOperator {
            dims: vec![d],
            matrix: HermitianMatrix::identity(d).scale(1.0 / d as f64),
        }
    }

    /// Diagonal state with the given weights on the joint basis.
    pub fn diagonal(weights: &[f64], dims: Vec<usize>) -> Result<Self> {
        DensityOperator::new(HermitianMatrix::from_real_diag(weights), dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= 1e-9
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "smoothing needs a normalized reference state (trace {})",
                self.trace()
            )))
        }
    }

    /// Bipartite factor dims `(dA, dB)`.
    pub fn require_bipartite(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::usage(format!(
                "expected two factors, got dims {:?}",
                self.dims
            ))),
        }
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<DensityOperator> {
        let m = self.matrix.partial_trace(&self.dims, keep)?;
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityOperator { dims, matrix: m })
    }

    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityOperator {
            dims,
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Reorders tensor factors: new factor `k` is old factor `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<DensityOperator> {
        let m = self.matrix.permute_factors(&self.dims, perm)?;
        let dims = perm.iter().map(|&p| self.dims[p]).collect();
        Ok(DensityOperator { dims, matrix: m })
    }

    /// Merges factors `[..split]` and `[split..]` into a bipartition.
    pub fn group(&self, split: usize) -> Result<DensityOperator> {
        if split == 0 || split >= self.dims.len() {
            return Err(Error::usage("group split must leave both sides nonempty"));
        }
        let a = self.dims[..split].iter().product();
        let b = self.dims[split..].iter().product();
        Ok(DensityOperator {
            dims: vec![a, b],
            matrix: self.matrix.clone(),
        })
    }

    /// `K rho K^dagger` with `K` acting on the whole space; dims may change.
    pub fn conjugate_by(&self, k: &ComplexMatrix, dims: Vec<usize>) -> Result<DensityOperator> {
        DensityOperator::new(self.matrix.conjugate_by(k), dims)
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson::from_hermitian(&self.matrix, Some(self.dims.clone()))
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        let (m, dims) = j.to_hermitian()?;
        DensityOperator::new(m, dims)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: MatrixJson = serde_json::from_str(text)?;
        DensityOperator::from_json(&j)
    }
}

/// Projection onto the PSD cone (negative eigenvalues set to zero).
pub fn psd_part(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(m.eig()?.map(|l| l.max(0.0)))
}

fn psd_sqrt(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    Ok(m.eig()?.map(|l| l.max(0.0).sqrt()))
}

fn same_dim(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::usage(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `tr|sqrt(rho) sqrt(tau)|` for PSD operators (small negative parts clipped).
pub fn fidelity_bar(rho: &HermitianMatrix, tau: &HermitianMatrix) -> Result<f64> {
    same_dim(rho, tau)?;
    let prod = psd_sqrt(rho)?.matrix() * psd_sqrt(tau)?.matrix();
    trace_norm_general(&prod)
}

/// Generalized fidelity including the `sqrt((1 - tr rho)(1 - tr tau))` completion.
pub fn fidelity_generalized(rho: &HermitianMatrix, tau: &HermitianMatrix) -> Result<f64> {
    let fb = fidelity_bar(rho, tau)?;
    let completion = ((1.0 - rho.trace()).max(0.0) * (1.0 - tau.trace()).max(0.0)).sqrt();
    Ok((fb + completion).clamp(0.0, 1.0))
}

pub fn purified_distance(rho: &HermitianMatrix, tau: &HermitianMatrix) -> Result<f64> {
    let f = fidelity_generalized(rho, tau)?;
    Ok((1.0 - f * f).max(0.0).sqrt())
}

/// `||rho - tau||_1 / 2 + |tr rho - tr tau| / 2`.
pub fn gen_trace_distance(rho: &HermitianMatrix, tau: &HermitianMatrix) -> Result<f64> {
    same_dim(rho, tau)?;
    let diff = rho - tau;
    Ok(0.5 * diff.trace_norm()? + 0.5 * (rho.trace() - tau.trace()).abs())
}

/// `log2 lambda_max(sigma^{-1/2} rho sigma^{-1/2})`, or `+inf` when the
/// support of `rho` is not contained in that of `sigma`.
pub fn dmax_quantum(rho: &HermitianMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    same_dim(rho, sigma)?;
    let n = rho.dim();
    let pi = sigma.support_projector()?;
    let outside = &HermitianMatrix::identity(n) - &pi;
    let leak = rho.conjugate_by(outside.matrix());
    let e = leak.eig()?;
    let leak_norm = e.max().abs().max(e.min().abs());
    if leak_norm > n as f64 * 1e-9 {
        return Ok(f64::INFINITY);
    }
    let inv = sigma.inv_sqrt_pinv()?;
    let lmax = rho.conjugate_by(inv.matrix()).max_eigenvalue()?;
    Ok(if lmax <= 0.0 {
        f64::NEG_INFINITY
    } else {
        lmax.log2()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn distances_of_pure_states() {
        let a = DensityOperator::pure(&ket(&[1.0, 0.0]), vec![2]).unwrap();
        let b = DensityOperator::pure(&ket(&[0.0, 1.0]), vec![2]).unwrap();
        let (a, b) = (a.matrix(), b.matrix());
        assert!((fidelity_generalized(a, a).unwrap() - 1.0).abs() < 1e-12);
        assert!(purified_distance(a, a).unwrap() < 1e-6);
        assert!(gen_trace_distance(a, a).unwrap() < 1e-12);
        assert!(fidelity_generalized(a, b).unwrap() < 1e-7);
        assert!((purified_distance(a, b).unwrap() - 1.0).abs() < 1e-12);
        assert!((gen_trace_distance(a, b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn completion_term_for_subnormalized_state() {
        let half = HermitianMatrix::from_real_diag(&[0.5, 0.0]);
        assert!((fidelity_generalized(&half, &half).unwrap() - 1.0).abs() < 1e-12);
        assert!(purified_distance(&half, &half).unwrap() < 1e-6);
    }

    #[test]
    fn fuchs_van_de_graaf() {
        let r = DensityOperator::new(
            HermitianMatrix::new(
                ComplexMatrix::new(
                    2,
                    2,
                    vec![
                        Complex64::new(0.7, 0.0),
                        Complex64::new(0.2, 0.1),
                        Complex64::new(0.2, -0.1),
                        Complex64::new(0.3, 0.0),
                    ],
                )
                .unwrap(),
            )
            .unwrap(),
            vec![2],
        )
        .unwrap();
        let s = HermitianMatrix::from_real_diag(&[0.4, 0.5]);
        let f = fidelity_generalized(r.matrix(), &s).unwrap();
        let t = gen_trace_distance(r.matrix(), &s).unwrap();
        assert!(1.0 - f <= t + 1e-12 && t <= (1.0 - f * f).sqrt() + 1e-12);
    }

    #[test]
    fn dmax_examples() {
        let zero = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        let mixed = HermitianMatrix::identity(2).scale(0.5);
        assert!((dmax_quantum(&zero, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(dmax_quantum(&mixed, &mixed).unwrap().abs() < 1e-12);
        assert_eq!(dmax_quantum(&mixed, &zero).unwrap(), f64::INFINITY);
        assert!(dmax_quantum(&zero, &zero).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid_states() {
        assert!(DensityOperator::diagonal(&[0.7, 0.5], vec![2]).is_err());
        assert!(DensityOperator::diagonal(&[1.2, -0.2], vec![2]).is_err());
        assert!(DensityOperator::diagonal(&[0.5, 0.5], vec![3]).is_err());
        let e = DensityOperator::max_entangled(2).unwrap();
        let a = e.marginal(&[0]).unwrap();
        assert!(
            a.matrix()
                .max_abs_diff(&HermitianMatrix::identity(2).scale(0.5))
                < 1e-12
        );
    }
}
