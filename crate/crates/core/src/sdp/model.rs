use num_complex::Complex64;

use super::problem::{SdpProblem, SymCoeffs};
use super::solver::{solve_sdp_with, SdpOptions, SdpSolution, SdpStatus};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};

/// Handle to a Hermitian PSD matrix variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HermVar {
    id: usize,
    dim: usize,
}

impl HermVar {
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Handle to a nonnegative real scalar variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalarVar {
    id: usize,
}

/// `coef * X[p][q]` for a variable `X`. Scalar variables use `p = q = 0`.
#[derive(Clone, Copy, Debug)]
struct Term {
    var: usize,
    p: usize,
    q: usize,
    coef: Complex64,
}

impl Term {
    fn scaled(self, s: Complex64) -> Term {
        Term {
            coef: self.coef * s,
            ..self
        }
    }
}

/// Real affine expression `Re(sum of terms) + constant`.
#[derive(Clone, Debug, Default)]
pub struct LinExpr {
    terms: Vec<Term>,
    constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    /// Adds `Re(coef * X[p][q])`.
    pub fn re_entry(mut self, x: &HermVar, p: usize, q: usize, coef: Complex64) -> Self {
        assert!(p < x.dim && q < x.dim, "entry outside variable");
        self.terms.push(Term {
            var: x.id,
            p,
            q,
            coef,
        });
        self
    }

    pub fn scalar(mut self, s: &ScalarVar, coef: f64) -> Self {
        self.terms.push(Term {
            var: s.id,
            p: 0,
            q: 0,
            coef: Complex64::new(coef, 0.0),
        });
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }
}

/// Square matrix expression whose entries are complex-affine in the variables.
#[derive(Clone, Debug)]
pub struct HermExpr {
    dim: usize,
    entries: Vec<Vec<Term>>,
    constant: ComplexMatrix,
}

impl HermExpr {
    pub fn zeros(dim: usize) -> Self {
        HermExpr {
            dim,
            entries: vec![Vec::new(); dim * dim],
            constant: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(k: &HermitianMatrix) -> Self {
        let mut e = HermExpr::zeros(k.dim());
        e.constant = k.matrix().clone();
        e
    }

    pub fn var(x: &HermVar) -> Self {
        HermExpr::block(x, 0, x.dim)
    }

    /// Principal sub-block `X[off..off+size][off..off+size]`.
    pub fn block(x: &HermVar, off: usize, size: usize) -> Self {
        assert!(off + size <= x.dim, "block outside variable");
        let mut e = HermExpr::zeros(size);
        for i in 0..size {
            for j in 0..size {
                e.entries[i * size + j].push(Term {
                    var: x.id,
                    p: off + i,
                    q: off + j,
                    coef: Complex64::new(1.0, 0.0),
                });
            }
        }
        e
    }

    /// `s * K` for a scalar variable `s`.
    pub fn scalar_times(s: &ScalarVar, k: &HermitianMatrix) -> Self {
        let n = k.dim();
        let mut e = HermExpr::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let c = k.get(i, j);
                if c != Complex64::new(0.0, 0.0) {
                    e.entries[i * n + j].push(Term {
                        var: s.id,
                        p: 0,
                        q: 0,
                        coef: c,
                    });
                }
            }
        }
        e
    }

    fn kron_impl(&self, k: &HermitianMatrix, const_left: bool) -> Self {
        let (dk, de) = (k.dim(), self.dim);
        let n = dk * de;
        let mut out = HermExpr::zeros(n);
        for a in 0..dk {
            for b in 0..dk {
                let c = k.get(a, b);
                if c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..de {
                    for j in 0..de {
                        let (r, s) = if const_left {
                            (a * de + i, b * de + j)
                        } else {
                            (i * dk + a, j * dk + b)
                        };
                        let src = &self.entries[i * de + j];
                        out.entries[r * n + s].extend(src.iter().map(|t| t.scaled(c)));
                        out.constant[(r, s)] = c * self.constant[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// `K ⊗ self`.
    pub fn kron_left(&self, k: &HermitianMatrix) -> Self {
        self.kron_impl(k, true)
    }

    /// `self ⊗ K`.
    pub fn kron_right(&self, k: &HermitianMatrix) -> Self {
        self.kron_impl(k, false)
    }

    /// Partial trace over the second factor of a `da x db` bipartition.
    pub fn trace_second(&self, da: usize, db: usize) -> Self {
        assert_eq!(da * db, self.dim, "bipartition does not match dimension");
        let mut out = HermExpr::zeros(da);
        for a in 0..da {
            for b in 0..da {
                for k in 0..db {
                    let (r, s) = (a * db + k, b * db + k);
                    out.entries[a * da + b].extend_from_slice(&self.entries[r * self.dim + s]);
                    out.constant[(a, b)] += self.constant[(r, s)];
                }
            }
        }
        out
    }

    /// Partial trace over the first factor of a `da x db` bipartition.
    pub fn trace_first(&self, da: usize, db: usize) -> Self {
        assert_eq!(da * db, self.dim, "bipartition does not match dimension");
        let mut out = HermExpr::zeros(db);
        for k in 0..db {
            for l in 0..db {
                for a in 0..da {
                    let (r, s) = (a * db + k, a * db + l);
                    out.entries[k * db + l].extend_from_slice(&self.entries[r * self.dim + s]);
                    out.constant[(k, l)] += self.constant[(r, s)];
                }
            }
        }
        out
    }

    pub fn scale(mut self, s: f64) -> Self {
        let c = Complex64::new(s, 0.0);
        for e in &mut self.entries {
            for t in e.iter_mut() {
                t.coef *= c;
            }
        }
        self.constant = self.constant.scale(s);
        self
    }

    pub fn plus(mut self, other: &HermExpr) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.extend_from_slice(b);
        }
        self.constant = &self.constant + &other.constant;
        self
    }

    pub fn minus(self, other: &HermExpr) -> Self {
        self.plus(&other.clone().scale(-1.0))
    }

    /// Real part of the trace.
    pub fn trace(&self) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.trace().re);
        for i in 0..self.dim {
            out.terms.extend_from_slice(&self.entries[i * self.dim + i]);
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
enum VarKind {
    Hermitian(usize),
    Scalar,
}

/// Builder for SDPs over Hermitian PSD and nonnegative scalar variables.
///
/// Each Hermitian `d x d` variable `X = A + iB` is embedded as the real PSD
/// block `[[A, -B], [B, A]]` of size `2d`.
#[derive(Clone, Debug, Default)]
pub struct Model {
    vars: Vec<VarKind>,
    objective: LinExpr,
    maximizing: bool,
    rows: Vec<(Vec<Term>, f64)>,
}

#[derive(Clone, Debug)]
pub struct ModelSolution {
    pub status: SdpStatus,
    /// Objective value, including its constant.
    pub value: f64,
    pub dual_value: f64,
    pub raw: SdpSolution,
    herm: Vec<Option<HermitianMatrix>>,
    scalars: Vec<f64>,
}

impl ModelSolution {
    pub fn herm(&self, x: &HermVar) -> &HermitianMatrix {
        self.herm[x.id].as_ref().expect("Hermitian variable")
    }

    pub fn scalar(&self, s: &ScalarVar) -> f64 {
        self.scalars[s.id]
    }

    pub fn ensure_optimal(&self, what: &str) -> Result<()> {
        match self.status {
            SdpStatus::Optimal => Ok(()),
            SdpStatus::Infeasible => {
                Err(Error::numerical(format!("{what}: SDP reported infeasible")))
            }
            SdpStatus::NumericalFailure => Err(Error::numerical(format!(
                "{what}: SDP did not converge (gap {:.2e}, infeasibility {:.2e}/{:.2e})",
                self.raw.relative_gap, self.raw.primal_infeasibility, self.raw.dual_infeasibility
            ))),
        }
    }
}

impl Model {
    pub fn new() -> Self {
        Model::default()
    }

    pub fn herm_var(&mut self, dim: usize) -> HermVar {
        assert!(dim > 0, "empty variable");
        self.vars.push(VarKind::Hermitian(dim));
        HermVar {
            id: self.vars.len() - 1,
            dim,
        }
    }

    pub fn nonneg(&mut self) -> ScalarVar {
        self.vars.push(VarKind::Scalar);
        ScalarVar {
            id: self.vars.len() - 1,
        }
    }

    pub fn minimize(&mut self, e: LinExpr) {
        self.objective = e;
        self.maximizing = false;
    }

    pub fn maximize(&mut self, e: LinExpr) {
        self.objective = LinExpr {
            terms: e
                .terms
                .iter()
                .map(|t| t.scaled(Complex64::new(-1.0, 0.0)))
                .collect(),
            constant: -e.constant,
        };
        self.maximizing = true;
    }

    fn add_row(&mut self, terms: Vec<Term>, rhs: f64) {
        if terms.is_empty() && rhs.abs() <= 1e-15 {
            return;
        }
        self.rows.push((terms, rhs));
    }

    /// `e == 0` for a real affine expression.
    pub fn lin_eq(&mut self, e: LinExpr) {
        self.add_row(e.terms, -e.constant);
    }

    /// `e >= 0`, via a nonnegative slack.
    pub fn lin_ge(&mut self, e: LinExpr) {
        let s = self.nonneg();
        self.lin_eq(e.scalar(&s, -1.0));
    }

    /// `e <= 0`.
    pub fn lin_le(&mut self, e: LinExpr) {
        let s = self.nonneg();
        self.lin_eq(e.scalar(&s, 1.0));
    }

    /// Entrywise `e == k`.
    pub fn eq(&mut self, e: &HermExpr, k: &HermitianMatrix) {
        assert_eq!(e.dim, k.dim(), "dimension mismatch");
        let n = e.dim;
        let neg_i = Complex64::new(0.0, -1.0);
        for i in 0..n {
            for j in i..n {
                let terms = &e.entries[i * n + j];
                let target = k.get(i, j) - e.constant[(i, j)];
                self.add_row(terms.clone(), target.re);
                if i < j {
                    let im: Vec<Term> = terms.iter().map(|t| t.scaled(neg_i)).collect();
                    self.add_row(im, target.im);
                }
            }
        }
    }

    /// `e ⪰ 0`, via a Hermitian slack.
    pub fn psd(&mut self, e: &HermExpr) -> HermVar {
        let s = self.herm_var(e.dim);
        let lhs = e.clone().minus(&HermExpr::var(&s));
        self.eq(&lhs, &HermitianMatrix::zeros(e.dim));
        s
    }

    fn push_term(&self, out: &mut SymCoeffs, t: &Term, scale: f64) {
        match self.vars[t.var] {
            VarKind::Scalar => out.add_entry(t.var, 0, 0, scale * t.coef.re),
            VarKind::Hermitian(d) => {
                let (p, q) = (t.p, t.q);
                let (re, im) = (scale * t.coef.re, scale * t.coef.im);
                out.add_entry(t.var, p, q, 0.5 * re);
                out.add_entry(t.var, p + d, q + d, 0.5 * re);
                if p != q {
                    out.add_entry(t.var, p + d, q, -0.5 * im);
                    out.add_entry(t.var, p, q + d, 0.5 * im);
                }
            }
        }
    }

    pub fn to_problem(&self) -> SdpProblem {
        let dims = self
            .vars
            .iter()
            .map(|v| match v {
                VarKind::Hermitian(d) => 2 * d,
                VarKind::Scalar => 1,
            })
            .collect();
        let mut p = SdpProblem::new(dims);
        for t in &self.objective.terms {
            self.push_term(&mut p.objective, t, 1.0);
        }
        p.objective.compress();
        for (terms, rhs) in &self.rows {
            let mut row = SymCoeffs::new();
            for t in terms {
                self.push_term(&mut row, t, 1.0);
            }
            p.add_constraint(row, *rhs);
        }
        p
    }

    pub fn solve(&self) -> Result<ModelSolution> {
        self.solve_with(&SdpOptions::default())
    }

    pub fn solve_with(&self, opts: &SdpOptions) -> Result<ModelSolution> {
        let problem = self.to_problem();
        let raw = solve_sdp_with(&problem, opts)?;
        let mut herm = Vec::with_capacity(self.vars.len());
        let mut scalars = Vec::with_capacity(self.vars.len());
        for (id, v) in self.vars.iter().enumerate() {
            let x = &raw.x[id];
            match *v {
                VarKind::Scalar => {
                    herm.push(None);
                    scalars.push(x[(0, 0)]);
                }
                VarKind::Hermitian(d) => {
                    let m = ComplexMatrix::from_fn(d, d, |p, q| {
                        Complex64::new(
                            0.5 * (x[(p, q)] + x[(p + d, q + d)]),
                            0.5 * (x[(p + d, q)] - x[(p, q + d)]),
                        )
                    });
                    herm.push(Some(HermitianMatrix::hermitize(m)));
                    scalars.push(f64::NAN);
                }
            }
        }
        let sign = if self.maximizing { -1.0 } else { 1.0 };
        let c = self.objective.constant;
        Ok(ModelSolution {
            status: raw.status,
            value: sign * (raw.primal_value + c),
            dual_value: sign * (raw.dual_value + c),
            raw,
            herm,
            scalars,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit(a: f64, b: Complex64, d: f64) -> HermitianMatrix {
        HermitianMatrix::new(
            ComplexMatrix::new(2, 2, vec![c(a, 0.0), b, b.conj(), c(d, 0.0)]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn largest_eigenvalue_of_complex_matrix() {
        let k = qubit(1.0, c(0.3, -0.7), -0.5);
        let mut m = Model::new();
        let t = m.nonneg();
        let shifted = HermExpr::scalar_times(&t, &HermitianMatrix::identity(2))
            .minus(&HermExpr::constant(&k));
        m.psd(&shifted);
        m.minimize(LinExpr::new().scalar(&t, 1.0));
        let sol = m.solve().unwrap();
        sol.ensure_optimal("lambda max").unwrap();
        let exact = k.max_eigenvalue().unwrap();
        assert!((sol.value - exact).abs() < 1e-7, "{} vs {exact}", sol.value);
    }

    #[test]
    fn fidelity_from_block_matrix() {
        let rho = qubit(0.7, c(0.1, 0.2), 0.3);
        let sigma = qubit(0.4, c(-0.2, 0.05), 0.6);
        let mut m = Model::new();
        let y = m.herm_var(4);
        m.eq(&HermExpr::block(&y, 0, 2), &rho);
        m.eq(&HermExpr::block(&y, 2, 2), &sigma);
        let mut obj = LinExpr::new();
        for k in 0..2 {
            obj = obj.re_entry(&y, k, 2 + k, c(1.0, 0.0));
        }
        m.maximize(obj);
        let sol = m.solve().unwrap();
        sol.ensure_optimal("fidelity").unwrap();
        let prod = rho.sqrt().unwrap().matrix() * sigma.sqrt().unwrap().matrix();
        let exact = crate::linalg::trace_norm_general(&prod).unwrap();
        assert!((sol.value - exact).abs() < 1e-7, "{} vs {exact}", sol.value);
        let yv = sol.herm(&y);
        assert!(yv.min_eigenvalue().unwrap() > -1e-7);
        assert!(
            HermitianMatrix::hermitize(ComplexMatrix::from_fn(2, 2, |i, j| yv.get(i, j)))
                .max_abs_diff(&rho)
                < 1e-7
        );
    }

    #[test]
    fn partial_trace_and_kron_constraints() {
        // min tr S s.t. rho_A ⊗ S ⪰ rho_AB for a product state: optimum is tr rho_B = 1.
        let ra = qubit(0.6, c(0.1, -0.1), 0.4);
        let rb = qubit(0.3, c(0.0, 0.2), 0.7);
        let rab = ra.kron(&rb);
        let mut m = Model::new();
        let s = m.herm_var(2);
        let lhs = HermExpr::var(&s)
            .kron_left(&ra)
            .minus(&HermExpr::constant(&rab));
        m.psd(&lhs);
        m.minimize(HermExpr::var(&s).trace());
        let sol = m.solve().unwrap();
        sol.ensure_optimal("kron").unwrap();
        assert!((sol.value - 1.0).abs() < 1e-6, "{}", sol.value);

        let mut m2 = Model::new();
        let x2 = m2.herm_var(4);
        m2.eq(&HermExpr::var(&x2).trace_second(2, 2), &ra);
        m2.eq(&HermExpr::var(&x2).trace_first(2, 2), &rb);
        m2.minimize(HermExpr::var(&x2).trace());
        let sol2 = m2.solve().unwrap();
        sol2.ensure_optimal("marginals").unwrap();
        let xv = sol2.herm(&x2);
        assert!(xv.partial_trace(&[2, 2], &[0]).unwrap().max_abs_diff(&ra) < 1e-7);
        assert!(xv.partial_trace(&[2, 2], &[1]).unwrap().max_abs_diff(&rb) < 1e-7);
    }
}
