//! Dense two-phase tableau simplex with Bland's rule.

use serde::Serialize;

use crate::error::{Error, Result};

/// Entries smaller than this are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-10;
/// Phase-one objective above this means the problem is infeasible.
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced costs above `-OPT_TOL` count as nonnegative.
const OPT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// One sparse constraint row `sum coeff_j x_j (sense) rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Linear program over `x` with `lower <= x <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub direction: Direction,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<Option<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the problem's own direction.
    pub value: f64,
    pub x: Vec<f64>,
    /// Row multipliers with `value = sum_i y_i rhs_i + bound terms`.
    pub duals: Vec<f64>,
    /// Multipliers of the finite upper bounds, indexed by variable.
    pub bound_duals: Vec<f64>,
    pub dual_value: f64,
    /// Phase-one multipliers certifying infeasibility.
    pub farkas: Option<Vec<f64>>,
    pub primal_residual: f64,
    pub iterations: usize,
}

impl LpProblem {
    pub fn new(direction: Direction, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            direction,
            objective,
            rows: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.rows.push(LpRow { coeffs, sense, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::usage(
                "bound vectors do not match the variable count",
            ));
        }
        if !self.objective.iter().all(|c| c.is_finite())
            || !self.lower.iter().all(|l| l.is_finite())
        {
            return Err(Error::usage("objective and lower bounds must be finite"));
        }
        for (j, u) in self.upper.iter().enumerate() {
            if let Some(u) = u {
                if !u.is_finite() || *u < self.lower[j] {
                    return Err(Error::usage(format!("bad upper bound on variable {j}")));
                }
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if !r.rhs.is_finite() || r.coeffs.iter().any(|&(j, a)| j >= n || !a.is_finite()) {
                return Err(Error::usage(format!("malformed constraint row {i}")));
            }
        }
        Ok(())
    }

    /// `max_i |violation of row i or bound i|` at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for r in &self.rows {
            let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match r.sense {
                Sense::Le => (lhs - r.rhs).max(0.0),
                Sense::Ge => (r.rhs - lhs).max(0.0),
                Sense::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj);
            if let Some(u) = self.upper[j] {
                worst = worst.max(xj - u);
            }
        }
        worst
    }
}

/// Column kinds of the standardized tableau.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Col {
    Structural,
    Slack,
    Surplus,
    Artificial,
}

struct Tableau {
    m: usize,
    width: usize,
    a: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<Col>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.a[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.a[r * w + c];
        for v in &mut self.a[r * w..(r + 1) * w] {
            *v /= p;
        }
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, &pv) in self.obj.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule until optimal. Returns false on unboundedness.
    fn run(&mut self, allow: impl Fn(Col) -> bool, iters: &mut usize, cap: usize) -> Result<bool> {
        let n = self.width - 1;
        loop {
            let enter = (0..n).find(|&j| allow(self.kinds[j]) && self.obj[j] < -OPT_TOL);
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aic = self.at(i, c);
                if aic > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aic;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            let tie = (ratio - br).abs() <= 1e-12 * br.abs().max(1.0);
                            if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, c);
            *iters += 1;
            if *iters > cap {
                return Err(Error::numerical(format!("simplex exceeded {cap} pivots")));
            }
        }
    }

    /// Simplex multipliers `y_i = c_unit(i) - reduced cost of row i's unit column`.
    fn duals(&self, unit_col: &[usize], cost: &[f64]) -> Vec<f64> {
        unit_col.iter().map(|&j| cost[j] - self.obj[j]).collect()
    }
}

/// Solves the linear program; see [`LpSolution`] for the certificates returned.
pub fn solve_lp(prob: &LpProblem) -> Result<LpSolution> {
    prob.validate()?;
    let n = prob.num_vars();
    let sign = match prob.direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let cost: Vec<f64> = prob.objective.iter().map(|c| sign * c).collect();
    let l = &prob.lower;

    // Rows: original rows with x = l + x', then upper-bound rows x'_j <= u_j - l_j.
    struct StdRow {
        coeffs: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
        flip: f64,
    }
    let mut rows: Vec<StdRow> = Vec::with_capacity(prob.rows.len());
    for r in &prob.rows {
        let shift: f64 = r.coeffs.iter().map(|&(j, a)| a * l[j]).sum();
        rows.push(StdRow {
            coeffs: r.coeffs.clone(),
            sense: r.sense,
            rhs: r.rhs - shift,
            flip: 1.0,
        });
    }
    let bounded: Vec<usize> = (0..n).filter(|&j| prob.upper[j].is_some()).collect();
    for &j in &bounded {
        rows.push(StdRow {
            coeffs: vec![(j, 1.0)],
            sense: Sense::Le,
            rhs: prob.upper[j].unwrap_or(0.0) - l[j],
            flip: 1.0,
        });
    }
    for r in &mut rows {
        if r.rhs < 0.0 {
            r.rhs = -r.rhs;
            r.flip = -1.0;
            for c in &mut r.coeffs {
                c.1 = -c.1;
            }
            r.sense = match r.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = rows.len();
    let mut kinds = vec![Col::Structural; n];
    let mut unit_col = vec![0usize; m];
    let mut extra: Vec<(usize, usize, f64)> = Vec::new(); // (row, col, coeff)
    for (i, r) in rows.iter().enumerate() {
        match r.sense {
            Sense::Le => {
                unit_col[i] = kinds.len();
                extra.push((i, kinds.len(), 1.0));
                kinds.push(Col::Slack);
            }
            Sense::Ge => {
                extra.push((i, kinds.len(), -1.0));
                kinds.push(Col::Surplus);
                unit_col[i] = kinds.len();
                extra.push((i, kinds.len(), 1.0));
                kinds.push(Col::Artificial);
            }
            Sense::Eq => {
                unit_col[i] = kinds.len();
                extra.push((i, kinds.len(), 1.0));
                kinds.push(Col::Artificial);
            }
        }
    }
    let ncols = kinds.len();
    let width = ncols + 1;
    let mut a = vec![0.0; m * width];
    for (i, r) in rows.iter().enumerate() {
        for &(j, v) in &r.coeffs {
            a[i * width + j] += v;
        }
        a[i * width + ncols] = r.rhs;
    }
    for &(i, j, v) in &extra {
        a[i * width + j] = v;
    }
    let mut full_cost = cost.clone();
    full_cost.resize(ncols, 0.0);
    let mut t = Tableau {
        m,
        width,
        a,
        obj: vec![0.0; width],
        basis: unit_col.clone(),
        kinds,
    };
    let cap = 50 * (m + ncols) + 1000;
    let mut iters = 0;

    // Phase one: minimize the sum of artificials.
    let has_art = t.kinds.contains(&Col::Artificial);
    if has_art {
        let p1_cost: Vec<f64> = t
            .kinds
            .iter()
            .map(|&k| if k == Col::Artificial { 1.0 } else { 0.0 })
            .collect();
        t.obj = p1_cost
            .iter()
            .copied()
            .chain(std::iter::once(0.0))
            .collect();
        for i in 0..m {
            if t.kinds[t.basis[i]] == Col::Artificial {
                for j in 0..width {
                    t.obj[j] -= t.a[i * width + j];
                }
            }
        }
        t.run(|_| true, &mut iters, cap)?;
        let infeas = -t.obj[ncols];
        if infeas > FEAS_TOL {
            let y = t.duals(&unit_col, &p1_cost);
            let farkas = orig_multipliers(&y, &rows.iter().map(|r| r.flip).collect::<Vec<_>>());
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                x: vec![],
                duals: farkas[..prob.rows.len()].to_vec(),
                bound_duals: vec![0.0; n],
                dual_value: f64::NAN,
                farkas: Some(farkas),
                primal_residual: f64::NAN,
                iterations: iters,
            });
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if t.kinds[t.basis[i]] == Col::Artificial {
                if let Some(c) = (0..ncols)
                    .find(|&j| t.kinds[j] != Col::Artificial && t.at(i, j).abs() > PIVOT_TOL)
                {
                    t.pivot(i, c);
                }
            }
        }
    }

    // Phase two with artificials barred from entering.
    t.obj = full_cost
        .iter()
        .copied()
        .chain(std::iter::once(0.0))
        .collect();
    for i in 0..m {
        let cb = full_cost[t.basis[i]];
        if cb != 0.0 {
            for j in 0..width {
                t.obj[j] -= cb * t.a[i * width + j];
            }
        }
    }
    let bounded_ok = t.run(|k| k != Col::Artificial, &mut iters, cap)?;
    if !bounded_ok {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            value: -sign * f64::INFINITY,
            x: vec![],
            duals: vec![],
            bound_duals: vec![],
            dual_value: f64::NAN,
            farkas: None,
            primal_residual: f64::NAN,
            iterations: iters,
        });
    }
    let mut xs = vec![0.0; ncols];
    for i in 0..m {
        xs[t.basis[i]] = t.rhs(i).max(0.0);
    }
    let x: Vec<f64> = (0..n).map(|j| l[j] + xs[j]).collect();
    let y_std = t.duals(&unit_col, &full_cost);
    let y = orig_multipliers(&y_std, &rows.iter().map(|r| r.flip).collect::<Vec<_>>());
    let value_min: f64 = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    // dual objective: y^T (b - A l) + w^T (u - l) + c^T l, all in the minimization frame
    let mut dual_min: f64 = cost.iter().zip(l).map(|(c, v)| c * v).sum();
    for (i, r) in prob.rows.iter().enumerate() {
        let shift: f64 = r.coeffs.iter().map(|&(j, a)| a * l[j]).sum();
        dual_min += y[i] * (r.rhs - shift);
    }
    let mut bound_duals = vec![0.0; n];
    for (k, &j) in bounded.iter().enumerate() {
        let w = y[prob.rows.len() + k];
        bound_duals[j] = sign * w;
        dual_min += w * (prob.upper[j].unwrap_or(0.0) - l[j]);
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value: sign * value_min,
        primal_residual: prob.residual(&x),
        x,
        duals: y[..prob.rows.len()].iter().map(|v| sign * v).collect(),
        bound_duals,
        dual_value: sign * dual_min,
        farkas: None,
        iterations: iters,
    })
}

fn orig_multipliers(y: &[f64], flip: &[f64]) -> Vec<f64> {
    y.iter().zip(flip).map(|(v, f)| v * f).collect()
}
