use std::ops::{Add, Sub};

use num_complex::Complex64;

use super::complex::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Construction tolerance on `max |A - A^dagger|`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_TOL` count as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;

/// Complex hermitian matrix. Stored as `(A + A^dagger) / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    inner: ComplexMatrix,
}

/// Eigendecomposition `A = V diag(values) V^dagger`, values ascending.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigen {
    /// Reassembles `V f(diag) V^dagger` for an arbitrary spectral map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &w) in fv.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                if vik == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        HermitianMatrix::hermitize(out)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Numerical-rank cutoff `dim * max|lambda| * 1e-12`.
    pub fn rank_threshold(&self) -> f64 {
        let scale = self.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
        self.values.len() as f64 * scale * 1e-12
    }
}

/// Which spectral root to take in [`HermitianMatrix::sqrt_kind`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootKind {
    Sqrt,
    InvSqrtPinv,
}

impl HermitianMatrix {
    /// Checked constructor: rejects matrices further than
    /// [`HERMITICITY_TOL`] from hermitian.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::usage("hermitian matrix must be square"));
        }
        let r = m.hermiticity_residual();
        if r > HERMITICITY_TOL {
            return Err(Error::domain(format!(
                "matrix is not hermitian (residual {r:.3e})"
            )));
        }
        Ok(Self::hermitize(m))
    }

    /// Stores `(A + A^dagger) / 2` without checking; for computed products.
    pub fn hermitize(m: ComplexMatrix) -> Self {
        assert!(m.is_square(), "hermitize needs a square matrix");
        let n = m.rows();
        let inner = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(m[(i, i)].re, 0.0)
            } else {
                (m[(i, j)] + m[(j, i)].conj()) * 0.5
            }
        });
        HermitianMatrix { inner }
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::identity(n),
        }
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        HermitianMatrix {
            inner: ComplexMatrix::from_real_diag(d),
        }
    }

    /// `|v><v|` for a column vector.
    pub fn projector_onto(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::hermitize(ComplexMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.inner[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace().re
    }

    pub fn scale(&self, s: f64) -> Self {
        HermitianMatrix {
            inner: self.inner.scale(s),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::hermitize(self.inner.kron(&other.inner))
    }

    /// `B A B^dagger` for arbitrary (possibly rectangular) `B`.
    pub fn conjugate_by(&self, b: &ComplexMatrix) -> Self {
        Self::hermitize(self.inner.conjugate_by(b))
    }

    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        Ok(Self::hermitize(self.inner.partial_trace(dims, keep)?))
    }

    pub fn permute_factors(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        Ok(Self::hermitize(self.inner.permute_factors(dims, perm)?))
    }

    /// tr(A B) for hermitian A, B (always real).
    pub fn inner_product(&self, other: &Self) -> f64 {
        self.inner.trace_product_re(&other.inner)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    /// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
    pub fn eig(&self) -> Result<Eigen> {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.min())
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(self.eig()?.max())
    }

    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= -tol)
    }

    /// Square root or pseudo-inverse square root of a PSD matrix.
    ///
    /// Eigenvalues down to `-PSD_TOL` are clipped to zero; anything more
    /// negative is a domain error. The pseudo-inverse drops eigenvalues at or
    /// below `dim * max|lambda| * 1e-12`.
    pub fn sqrt_kind(&self, kind: RootKind) -> Result<Self> {
        let e = self.eig()?;
        if e.min() < -PSD_TOL {
            return Err(Error::domain(format!(
                "matrix is not PSD (min eigenvalue {:.3e})",
                e.min()
            )));
        }
        Ok(match kind {
            RootKind::Sqrt => e.map(|l| l.max(0.0).sqrt()),
            RootKind::InvSqrtPinv => {
                let tau = e.rank_threshold();
                e.map(|l| if l > tau { 1.0 / l.sqrt() } else { 0.0 })
            }
        })
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.sqrt_kind(RootKind::Sqrt)
    }

    pub fn inv_sqrt_pinv(&self) -> Result<Self> {
        self.sqrt_kind(RootKind::InvSqrtPinv)
    }

    /// Orthogonal projector onto the support (eigenvalues above the rank cutoff).
    pub fn support_projector(&self) -> Result<Self> {
        let e = self.eig()?;
        let tau = e.rank_threshold();
        Ok(e.map(|l| if l > tau { 1.0 } else { 0.0 }))
    }

    /// Projector `{A}_+` onto the eigenspaces with strictly positive eigenvalue.
    ///
    /// Eigenvalues within the numerical-rank cutoff of zero are treated as zero.
    pub fn positive_part(&self) -> Result<Self> {
        let e = self.eig()?;
        let tau = e.rank_threshold();
        Ok(e.map(|l| if l > tau { 1.0 } else { 0.0 }))
    }

    /// Sum of absolute eigenvalues.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(self.eig()?.values.iter().map(|l| l.abs()).sum())
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;

    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

/// Cyclic Jacobi eigensolver for hermitian matrices.
///
/// Each rotation first removes the phase of the pivot entry, then applies a
/// real Jacobi rotation in the (p, q) plane.
pub fn eig_hermitian(m: &HermitianMatrix) -> Result<Eigen> {
    let n = m.dim();
    let mut a: Vec<Complex64> = m.matrix().data().to_vec();
    let mut v = ComplexMatrix::identity(n);
    let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n <= 1 || norm == 0.0 {
        return Ok(finish(n, a, v));
    }
    let target = norm * f64::EPSILON * 0.5;
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let g = apq.norm();
                if g <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let phase = apq / g;
                let theta = (aqq - app) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s conj(phase), c conj(phase)]] on columns p, q.
                let gpp = Complex64::new(c, 0.0);
                let gpq = Complex64::new(s, 0.0);
                let gqp = -phase.conj() * s;
                let gqq = phase.conj() * c;
                // A <- A G
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * gpp + akq * gqp;
                    a[k * n + q] = akp * gpq + akq * gqq;
                }
                // A <- G^dagger A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = gpp.conj() * apk + gqp.conj() * aqk;
                    a[q * n + k] = gpq.conj() * apk + gqq.conj() * aqk;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = Complex64::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex64::new(a[q * n + q].re, 0.0);
                // V <- V G
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * gpp + vkq * gqp;
                    v[(k, q)] = vkp * gpq + vkq * gqq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::numerical(format!(
            "hermitian Jacobi did not converge in {MAX_SWEEPS} sweeps (n = {n})"
        )));
    }
    Ok(finish(n, a, v))
}

fn finish(n: usize, a: Vec<Complex64>, v: ComplexMatrix) -> Eigen {
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigen { values, vectors }
}

/// Unitary `V` maximizing `Re tr[M V]`, so that `tr[M V] = tr|M|`.
///
/// Built from the polar decomposition `M = U |M|` as `V = U^dagger`. On a
/// singular `M` the kernel is completed by Gram-Schmidt over the standard
/// basis, which is deterministic.
pub fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::usage("polar_unitary needs a square matrix"));
    }
    let n = m.rows();
    let mtm = HermitianMatrix::hermitize(&m.adjoint() * m);
    let e = mtm.eig()?;
    // Descending singular values, so the well-conditioned columns come first.
    let sv: Vec<f64> = e.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let tau = n as f64 * smax * 1e-12;
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for k in (0..n).rev() {
        if sv[k] <= tau {
            continue;
        }
        let w = e.vectors.column_vec(k);
        let mw = m * &ComplexMatrix::column(&w);
        let mut u: Vec<Complex64> = mw.data().iter().map(|z| z / sv[k]).collect();
        if orthonormalize_against(&mut u, &left) {
            left.push(u);
            right.push(w);
        }
    }
    // Complete the kernel pairing deterministically.
    let mut kernel: Vec<Vec<Complex64>> = Vec::new();
    for k in (0..n).rev() {
        if sv[k] <= tau {
            kernel.push(e.vectors.column_vec(k));
        }
    }
    // Any right vectors dropped by orthonormalization go back to the kernel set.
    let mut right_all = right.clone();
    let mut kernel_ortho: Vec<Vec<Complex64>> = Vec::new();
    for mut w in kernel {
        if orthonormalize_against(&mut w, &right_all) {
            right_all.push(w.clone());
            kernel_ortho.push(w);
        }
    }
    let mut basis = 0;
    while right_all.len() < n && basis < n {
        let mut w = vec![ZERO; n];
        w[basis] = ONE;
        if orthonormalize_against(&mut w, &right_all) {
            right_all.push(w.clone());
            kernel_ortho.push(w);
        }
        basis += 1;
    }
    let mut basis = 0;
    for w in kernel_ortho {
        loop {
            let mut u = vec![ZERO; n];
            u[basis % n] = ONE;
            basis += 1;
            if orthonormalize_against(&mut u, &left) {
                left.push(u);
                right.push(w);
                break;
            }
            if basis > 2 * n {
                return Err(Error::numerical("polar completion failed"));
            }
        }
    }
    // U = sum_k u_k w_k^dagger ; V = U^dagger = sum_k w_k u_k^dagger.
    let mut v = ComplexMatrix::zeros(n, n);
    for (u, w) in left.iter().zip(&right) {
        for i in 0..n {
            for j in 0..n {
                v[(i, j)] += w[i] * u[j].conj();
            }
        }
    }
    Ok(v)
}

/// Modified Gram-Schmidt (two passes); returns false if `v` is dependent.
fn orthonormalize_against(v: &mut [Complex64], basis: &[Vec<Complex64>]) -> bool {
    let norm0: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let proj: Complex64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= proj * bi;
            }
        }
    }
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-8 * norm0 {
        return false;
    }
    for vi in v.iter_mut() {
        *vi /= norm;
    }
    true
}

/// Sum of singular values of a square matrix.
pub fn trace_norm_general(m: &ComplexMatrix) -> Result<f64> {
    let mtm = HermitianMatrix::hermitize(&m.adjoint() * m);
    Ok(mtm.eig()?.values.iter().map(|l| l.max(0.0).sqrt()).sum())
}
