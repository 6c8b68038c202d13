use serde::Serialize;

use super::problem::{SdpProblem, SymCoeffs};
use crate::error::Result;
use crate::linalg::real::{cholesky, sym_eig, sym_min_eigenvalue, SemiCholesky};
use crate::linalg::RealMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SdpOptions {
    pub max_iterations: usize,
    /// Target relative gap and relative infeasibilities.
    pub gap_tol: f64,
    pub feas_tol: f64,
    /// Looser thresholds under which a stalled run still counts as optimal.
    pub accept_gap: f64,
    pub accept_feas: f64,
    pub step_factor: f64,
    /// Phase-1 violation above which the problem is declared infeasible.
    pub infeasibility_threshold: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            max_iterations: 200,
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            accept_gap: 1e-6,
            accept_feas: 1e-7,
            step_factor: 0.95,
            infeasibility_threshold: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    pub x: Vec<RealMatrix>,
    pub y: Vec<f64>,
    pub z: Vec<RealMatrix>,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub iterations: usize,
}

impl SdpSolution {
    fn merit(&self) -> f64 {
        self.primal_infeasibility
            .max(self.dual_infeasibility)
            .max(self.relative_gap)
    }
}

pub fn solve_sdp(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_sdp_with(problem, &SdpOptions::default())
}

/// Primal-dual interior-point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector step. Iterates may start infeasible.
///
/// When the run neither converges nor stalls acceptably close to optimal, an
/// auxiliary phase-1 problem decides whether the constraints are infeasible.
pub fn solve_sdp_with(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let run = interior_point(problem, opts);
    if run.status == SdpStatus::Optimal {
        return Ok(run);
    }
    if phase_one_violation(problem, opts).is_some_and(|v| v > opts.infeasibility_threshold) {
        return Ok(SdpSolution {
            status: SdpStatus::Infeasible,
            ..run
        });
    }
    Ok(run)
}

/// Minimum total violation `sum |<A_i,X> - b_i|` over PSD `X`, computed with
/// a tiny trace penalty so that both phase-1 problems have interior points.
fn phase_one_violation(problem: &SdpProblem, opts: &SdpOptions) -> Option<f64> {
    const TRACE_PENALTY: f64 = 1e-8;
    let m = problem.constraints.len();
    if m == 0 {
        return Some(0.0);
    }
    let slack = problem.block_dims.len();
    let mut dims = problem.block_dims.clone();
    dims.push(2 * m);
    let mut aux = SdpProblem::new(dims);
    for (b, &d) in problem.block_dims.iter().enumerate() {
        for i in 0..d {
            aux.objective.add_entry(b, i, i, TRACE_PENALTY);
        }
    }
    for k in 0..2 * m {
        aux.objective.add_entry(slack, k, k, 1.0);
    }
    aux.objective.compress();
    for (i, (a, &b)) in problem.constraints.iter().zip(&problem.rhs).enumerate() {
        let mut row = a.clone();
        row.add_entry(slack, 2 * i, 2 * i, 1.0);
        row.add_entry(slack, 2 * i + 1, 2 * i + 1, -1.0);
        aux.add_constraint(row, b);
    }
    let sol = interior_point(&aux, opts);
    if sol.status != SdpStatus::Optimal {
        return None;
    }
    let s = &sol.x[slack];
    Some((0..2 * m).map(|k| s[(k, k)].max(0.0)).sum())
}

struct Scaling {
    g: RealMatrix,
    w: RealMatrix,
    lambda: Vec<f64>,
}

/// NT scaling point: `G^T Z G = G^{-1} X G^{-T} = diag(lambda)`, `W = G G^T`.
fn nt_scaling(x: &RealMatrix, z: &RealMatrix) -> Result<Scaling> {
    let l = cholesky(x)?;
    let mut s = l.t_matmul(&z.matmul(&l));
    s.symmetrize();
    let (ev, q) = sym_eig(&s)?;
    let n = x.rows();
    let lambda: Vec<f64> = ev.iter().map(|&e| e.max(1e-300).sqrt()).collect();
    let lq = l.matmul(&q);
    let g = RealMatrix::from_fn(n, n, |i, j| lq[(i, j)] / lambda[j].sqrt());
    let w = g.matmul_t(&g);
    Ok(Scaling { g, w, lambda })
}

fn a_op(cons: &[SymCoeffs], x: &[RealMatrix]) -> Vec<f64> {
    cons.iter().map(|a| a.dot(x)).collect()
}

fn a_adj(cons: &[SymCoeffs], y: &[f64], dims: &[usize]) -> Vec<RealMatrix> {
    let mut out: Vec<RealMatrix> = dims.iter().map(|&d| RealMatrix::zeros(d, d)).collect();
    for (a, &yi) in cons.iter().zip(y) {
        a.add_to(&mut out, yi);
    }
    out
}

fn blocks_dot(a: &[RealMatrix], b: &[RealMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn blocks_norm(a: &[RealMatrix]) -> f64 {
    a.iter().map(|x| x.dot(x)).sum::<f64>().sqrt()
}

fn vec_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Schur complement `M_ij = <A_i, W A_j W>`.
fn schur(cons: &[SymCoeffs], sc: &[Scaling], dims: &[usize]) -> RealMatrix {
    let m = cons.len();
    let mut mm = RealMatrix::zeros(m, m);
    let mut t: Vec<RealMatrix> = dims.iter().map(|&d| RealMatrix::zeros(d, d)).collect();
    for j in 0..m {
        let mut touched: Vec<usize> = cons[j].entries().iter().map(|e| e.0).collect();
        touched.dedup();
        for &(b, p, q, v) in cons[j].entries() {
            let w = &sc[b].w;
            let n = dims[b];
            let tb = &mut t[b];
            for r in 0..n {
                for s in 0..n {
                    let mut add = w[(r, p)] * w[(q, s)];
                    if p != q {
                        add += w[(r, q)] * w[(p, s)];
                    }
                    tb[(r, s)] += v * add;
                }
            }
        }
        for i in 0..m {
            mm[(i, j)] = cons[i].dot(&t);
        }
        for &b in &touched {
            t[b] = RealMatrix::zeros(dims[b], dims[b]);
        }
    }
    mm.symmetrize();
    mm
}

/// Largest step `alpha` with `diag(lambda) + alpha D` PSD (unbounded as `inf`).
fn max_step(lambda: &[f64], d: &RealMatrix) -> Result<f64> {
    let n = lambda.len();
    let mut s = RealMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    s.symmetrize();
    let e = sym_min_eigenvalue(&s)?;
    Ok(if e < 0.0 { -1.0 / e } else { f64::INFINITY })
}

struct Direction {
    dx: Vec<RealMatrix>,
    dy: Vec<f64>,
    dz: Vec<RealMatrix>,
    // Scaled directions, used for step lengths and the corrector term.
    sdx: Vec<RealMatrix>,
    sdz: Vec<RealMatrix>,
}

fn direction(
    problem: &SdpProblem,
    sc: &[Scaling],
    chol: &SemiCholesky,
    rp: &[f64],
    rd: &[RealMatrix],
    h: &[RealMatrix],
) -> Direction {
    let cons = &problem.constraints;
    let ghg: Vec<RealMatrix> = sc
        .iter()
        .zip(h)
        .map(|(s, h)| s.g.matmul(h).matmul_t(&s.g))
        .collect();
    let wrw: Vec<RealMatrix> = sc
        .iter()
        .zip(rd)
        .map(|(s, r)| s.w.matmul(r).matmul(&s.w))
        .collect();
    let a1 = a_op(cons, &ghg);
    let a2 = a_op(cons, &wrw);
    let rhs: Vec<f64> = (0..rp.len()).map(|i| rp[i] - a1[i] + a2[i]).collect();
    let dy = chol.solve(&rhs);
    let mut dz = rd.to_vec();
    for (d, a) in dz.iter_mut().zip(a_adj(cons, &dy, &problem.block_dims)) {
        d.axpy(-1.0, &a);
    }
    let mut sdz = Vec::with_capacity(sc.len());
    let mut sdx = Vec::with_capacity(sc.len());
    let mut dx = Vec::with_capacity(sc.len());
    for ((s, dzb), hb) in sc.iter().zip(&dz).zip(h) {
        let mut z_s = s.g.t_matmul(&dzb.matmul(&s.g));
        z_s.symmetrize();
        let mut x_s = hb.clone();
        x_s.axpy(-1.0, &z_s);
        let mut x = s.g.matmul(&x_s).matmul_t(&s.g);
        x.symmetrize();
        sdz.push(z_s);
        sdx.push(x_s);
        dx.push(x);
    }
    Direction {
        dx,
        dy,
        dz,
        sdx,
        sdz,
    }
}

fn step_lengths(sc: &[Scaling], d: &Direction) -> Result<(f64, f64)> {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (i, s) in sc.iter().enumerate() {
        ap = ap.min(max_step(&s.lambda, &d.sdx[i])?);
        ad = ad.min(max_step(&s.lambda, &d.sdz[i])?);
    }
    Ok((ap, ad))
}

fn interior_point(problem: &SdpProblem, opts: &SdpOptions) -> SdpSolution {
    let dims = &problem.block_dims;
    let cons = &problem.constraints;
    let m = cons.len();
    let n_total = problem.total_dim() as f64;
    let mut c = problem.zero_blocks();
    problem.objective.add_to(&mut c, 1.0);
    let b = &problem.rhs;
    let b_norm = vec_norm(b);
    let c_norm = blocks_norm(&c);

    let mut xi: f64 = 10f64.max(n_total.sqrt());
    let mut eta: f64 = 10f64.max(n_total.sqrt()).max(c_norm);
    for (a, &bi) in cons.iter().zip(b) {
        let an = a.frobenius_norm();
        xi = xi.max(n_total * (1.0 + bi.abs()) / (1.0 + an));
        eta = eta.max(an);
    }
    let mut x: Vec<RealMatrix> = dims
        .iter()
        .map(|&d| RealMatrix::identity(d).scale(xi))
        .collect();
    let mut z: Vec<RealMatrix> = dims
        .iter()
        .map(|&d| RealMatrix::identity(d).scale(eta))
        .collect();
    let mut y = vec![0.0; m];

    let snapshot = |x: &[RealMatrix], y: &[f64], z: &[RealMatrix], it: usize| -> SdpSolution {
        let ax = a_op(cons, x);
        let rp: f64 = vec_norm(&ax.iter().zip(b).map(|(a, b)| b - a).collect::<Vec<_>>());
        let mut rd = c.clone();
        for (r, (ay, zb)) in rd.iter_mut().zip(a_adj(cons, y, dims).iter().zip(z)) {
            r.axpy(-1.0, ay);
            r.axpy(-1.0, zb);
        }
        let pobj = blocks_dot(&c, x);
        let dobj: f64 = b.iter().zip(y).map(|(b, y)| b * y).sum();
        let denom = 1.0 + pobj.abs() + dobj.abs();
        let gap = (pobj - dobj).abs().max(blocks_dot(x, z).abs()) / denom;
        SdpSolution {
            status: SdpStatus::NumericalFailure,
            primal_value: pobj,
            dual_value: dobj,
            x: x.to_vec(),
            y: y.to_vec(),
            z: z.to_vec(),
            primal_infeasibility: rp / (1.0 + b_norm),
            dual_infeasibility: blocks_norm(&rd) / (1.0 + c_norm),
            relative_gap: gap,
            iterations: it,
        }
    };

    let mut best = snapshot(&x, &y, &z, 0);
    let converged = |s: &SdpSolution, gap: f64, feas: f64| {
        s.relative_gap <= gap && s.primal_infeasibility <= feas && s.dual_infeasibility <= feas
    };

    for it in 0..opts.max_iterations {
        let cur = snapshot(&x, &y, &z, it);
        if cur.merit() < best.merit() {
            best = cur.clone();
        }
        if converged(&cur, opts.gap_tol, opts.feas_tol) {
            best = cur;
            best.status = SdpStatus::Optimal;
            return best;
        }
        let scale = 1.0 + xi + eta;
        let big = x.iter().chain(&z).map(|m| m.max_abs()).fold(0.0, f64::max);
        let ybig = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if big > 1e12 * scale || ybig > 1e12 * scale {
            break;
        }

        let step = (|| -> Result<Option<()>> {
            let sc: Vec<Scaling> = x
                .iter()
                .zip(&z)
                .map(|(xb, zb)| nt_scaling(xb, zb))
                .collect::<Result<_>>()?;
            let mu: f64 = sc
                .iter()
                .flat_map(|s| s.lambda.iter())
                .map(|l| l * l)
                .sum::<f64>()
                / n_total;
            let ax = a_op(cons, &x);
            let rp: Vec<f64> = ax.iter().zip(b).map(|(a, b)| b - a).collect();
            let mut rd = c.clone();
            for (r, (ay, zb)) in rd.iter_mut().zip(a_adj(cons, &y, dims).iter().zip(&z)) {
                r.axpy(-1.0, ay);
                r.axpy(-1.0, zb);
            }
            let chol = SemiCholesky::new(&schur(cons, &sc, dims), 1e-14)?;

            // Predictor: affine-scaling target.
            let h_aff: Vec<RealMatrix> = sc
                .iter()
                .map(|s| RealMatrix::from_diag(&s.lambda.iter().map(|l| -l).collect::<Vec<_>>()))
                .collect();
            let aff = direction(problem, &sc, &chol, &rp, &rd, &h_aff);
            let (ap, ad) = step_lengths(&sc, &aff)?;
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for (i, s) in sc.iter().enumerate() {
                let n = s.lambda.len();
                let xs = RealMatrix::from_fn(n, n, |p, q| {
                    (if p == q { s.lambda[p] } else { 0.0 }) + ap * aff.sdx[i][(p, q)]
                });
                let zs = RealMatrix::from_fn(n, n, |p, q| {
                    (if p == q { s.lambda[p] } else { 0.0 }) + ad * aff.sdz[i][(p, q)]
                });
                mu_aff += xs.dot(&zs);
            }
            mu_aff /= n_total;
            let sigma = (mu_aff.max(0.0) / mu).powi(3).clamp(0.0, 1.0);

            // Corrector with centering and second-order term.
            let h_cor: Vec<RealMatrix> = sc
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let n = s.lambda.len();
                    let xz = aff.sdx[i].matmul(&aff.sdz[i]);
                    RealMatrix::from_fn(n, n, |p, q| {
                        let mut r = -0.5 * (xz[(p, q)] + xz[(q, p)]);
                        if p == q {
                            r += sigma * mu - s.lambda[p] * s.lambda[p];
                        }
                        2.0 * r / (s.lambda[p] + s.lambda[q])
                    })
                })
                .collect();
            let dir = direction(problem, &sc, &chol, &rp, &rd, &h_cor);
            let (ap, ad) = step_lengths(&sc, &dir)?;
            let ap = (opts.step_factor * ap).min(1.0);
            let ad = (opts.step_factor * ad).min(1.0);
            if ap < 1e-12 && ad < 1e-12 {
                return Ok(None);
            }
            for (xb, d) in x.iter_mut().zip(&dir.dx) {
                xb.axpy(ap, d);
                xb.symmetrize();
            }
            for (zb, d) in z.iter_mut().zip(&dir.dz) {
                zb.axpy(ad, d);
                zb.symmetrize();
            }
            for (yi, d) in y.iter_mut().zip(&dir.dy) {
                *yi += ad * d;
            }
            Ok(Some(()))
        })();
        match step {
            Ok(Some(())) => {}
            _ => break,
        }
    }
    let last = snapshot(&x, &y, &z, opts.max_iterations);
    if last.merit() < best.merit() {
        best = last;
    }
    if converged(&best, opts.accept_gap, opts.accept_feas) {
        best.status = SdpStatus::Optimal;
    }
    best
}
