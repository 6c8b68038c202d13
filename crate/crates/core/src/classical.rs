//! Exact classical smooth max-information and min-entropy under
//! generalized-trace-distance smoothing, computed as linear programs.
//!
//! For a normalized reference `P` and a candidate `P'` with `sum P' <= 1`,
//! `T(P', P) = sum (P - P')_+`. The ball constraint is therefore linear:
//! `w >= P - P'`, `w >= 0`, `sum w <= eps`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, Direction, LpProblem, LpStatus, Sense};
use crate::probability::{generalized_trace_distance, Distribution};
use crate::spectrum::{d_max_classical, h_s, i_s, i_s_given_q};

/// Optima below this are clamped before taking the logarithm.
pub const LOG_FLOOR: f64 = 1e-300;
/// Tolerance of the independent feasibility re-check.
pub const VERIFY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassicalKind {
    ImaxPartial,
    HminPartial,
    ImaxFull,
    HminFull,
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothedMeasureResult {
    pub kind: ClassicalKind,
    pub eps: f64,
    /// Measure value in bits.
    pub value: f64,
    /// Smoothed distribution `P'`.
    #[serde(serialize_with = "ser_dist")]
    pub optimizer: Distribution,
    /// Optimal `Q_Y` for the max-information variants.
    pub q: Option<Vec<f64>>,
    /// Generalized trace distance `T(P', P)`.
    pub distance: f64,
    /// Largest constraint violation found by the independent re-check.
    pub residual: f64,
    pub lp_iterations: usize,
}

fn ser_dist<S: serde::Serializer>(d: &Distribution, s: S) -> std::result::Result<S::Ok, S::Error> {
    d.to_json().serialize(s)
}

/// Rejects radii outside the validity range `0 <= eps < T(P, 0) = 1`.
pub fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::domain(format!(
            "smoothing radius {eps} is not valid: need 0 <= eps < 1 = T(P, 0) for normalized P"
        )));
    }
    Ok(())
}

/// Variable layout shared by all smoothing programs:
/// `P'` in `[0, N)`, slack `w` in `[N, 2N)`, extras from `2N`.
struct Layout {
    nx: usize,
    ny: usize,
}

impl Layout {
    fn n(&self) -> usize {
        self.nx * self.ny
    }
    fn pp(&self, x: usize, y: usize) -> usize {
        x * self.ny + y
    }
    fn w(&self, x: usize, y: usize) -> usize {
        self.n() + x * self.ny + y
    }
    fn extra(&self, k: usize) -> usize {
        2 * self.n() + k
    }
}

/// LP with the `P'`, `w` variables and the trace-ball rows in place.
fn ball_lp(
    p: &Distribution,
    eps: f64,
    extras: usize,
    objective_extra: &[f64],
) -> Result<(LpProblem, Layout)> {
    let (nx, ny) = p.require_bipartite()?;
    let lay = Layout { nx, ny };
    let n = lay.n();
    let mut obj = vec![0.0; 2 * n + extras];
    obj[2 * n..].copy_from_slice(objective_extra);
    let mut lp = LpProblem::new(Direction::Minimize, obj);
    for x in 0..nx {
        for y in 0..ny {
            lp.add_row(
                vec![(lay.w(x, y), 1.0), (lay.pp(x, y), 1.0)],
                Sense::Ge,
                p.get(x, y),
            );
        }
    }
    lp.add_row((0..n).map(|k| (n + k, 1.0)).collect(), Sense::Le, eps);
    Ok((lp, lay))
}

fn solve_checked(lp: &LpProblem) -> Result<crate::lp::LpSolution> {
    let sol = solve_lp(lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol),
        LpStatus::Infeasible => Err(Error::numerical("smoothing LP reported infeasible")),
        LpStatus::Unbounded => Err(Error::numerical("smoothing LP reported unbounded")),
    }
}

fn extract_optimizer(lay: &Layout, x: &[f64]) -> Result<Distribution> {
    let mut w: Vec<f64> = x[..lay.n()].iter().map(|v| v.max(0.0)).collect();
    let t: f64 = w.iter().sum();
    if t > 1.0 {
        w.iter_mut().for_each(|v| *v /= t);
    }
    Distribution::new(vec![lay.nx, lay.ny], w)
}

fn log_value(v: f64) -> f64 {
    v.max(LOG_FLOOR).log2()
}

/// Max-information LP `min sum R` with `P' <= P_X x R`; `fix_marginal` adds `P'_X = P_X`.
fn imax_lp(
    p: &Distribution,
    eps: f64,
    fix_marginal: bool,
    kind: ClassicalKind,
) -> Result<SmoothedMeasureResult> {
    p.require_normalized()?;
    check_eps(eps)?;
    let (nx, ny) = p.require_bipartite()?;
    let (px, _) = p.marginals2()?;
    let (mut lp, lay) = ball_lp(p, eps, ny, &vec![1.0; ny])?;
    for x in 0..nx {
        for y in 0..ny {
            lp.add_row(
                vec![(lay.pp(x, y), 1.0), (lay.extra(y), -px[x])],
                Sense::Le,
                0.0,
            );
        }
    }
    if fix_marginal {
        for (x, &pxx) in px.iter().enumerate() {
            lp.add_row(
                (0..ny).map(|y| (lay.pp(x, y), 1.0)).collect(),
                Sense::Eq,
                pxx,
            );
        }
    } else {
        lp.add_row((0..lay.n()).map(|k| (k, 1.0)).collect(), Sense::Eq, 1.0);
    }
    let sol = solve_checked(&lp)?;
    let opt = extract_optimizer(&lay, &sol.x)?;
    let r: Vec<f64> = (0..ny).map(|y| sol.x[lay.extra(y)].max(0.0)).collect();
    let total: f64 = r.iter().sum();
    let q: Vec<f64> = if total > 0.0 {
        r.iter().map(|v| v / total).collect()
    } else {
        vec![1.0 / ny as f64; ny]
    };
    let value = log_value(total);
    let distance = generalized_trace_distance(&opt, p)?;
    // Independent re-check of every constraint of the defining program.
    let mut residual = (distance - eps).max(0.0);
    residual = residual.max((opt.total() - 1.0).abs());
    let (ox, _) = opt.marginals2()?;
    if fix_marginal {
        for x in 0..nx {
            residual = residual.max((ox[x] - px[x]).abs());
        }
    }
    for x in 0..nx {
        for y in 0..ny {
            residual = residual.max(opt.get(x, y) - px[x] * r[y]);
        }
    }
    finish(
        kind,
        eps,
        value,
        opt,
        Some(q),
        distance,
        residual,
        sol.iterations,
    )
}

/// Min-entropy LP `min t` with `P' <= t 1 x P_Y`, `sum P' <= 1`;
/// `fix_marginal` adds `P'_Y <= P_Y`.
fn hmin_lp(
    p: &Distribution,
    eps: f64,
    fix_marginal: bool,
    kind: ClassicalKind,
) -> Result<SmoothedMeasureResult> {
    p.require_normalized()?;
    check_eps(eps)?;
    let (nx, ny) = p.require_bipartite()?;
    let (_, py) = p.marginals2()?;
    let (mut lp, lay) = ball_lp(p, eps, 1, &[1.0])?;
    let t = lay.extra(0);
    for x in 0..nx {
        for y in 0..ny {
            lp.add_row(vec![(lay.pp(x, y), 1.0), (t, -py[y])], Sense::Le, 0.0);
        }
    }
    if fix_marginal {
        for (y, &pyy) in py.iter().enumerate() {
            lp.add_row(
                (0..nx).map(|x| (lay.pp(x, y), 1.0)).collect(),
                Sense::Le,
                pyy,
            );
        }
    }
    lp.add_row((0..lay.n()).map(|k| (k, 1.0)).collect(), Sense::Le, 1.0);
    let sol = solve_checked(&lp)?;
    let opt = extract_optimizer(&lay, &sol.x)?;
    let tv = sol.x[t].max(0.0);
    let value = -log_value(tv);
    let distance = generalized_trace_distance(&opt, p)?;
    let mut residual = (distance - eps).max(0.0);
    residual = residual.max(opt.total() - 1.0);
    let (_, oy) = opt.marginals2()?;
    if fix_marginal {
        for y in 0..ny {
            residual = residual.max(oy[y] - py[y]);
        }
    }
    for x in 0..nx {
        for y in 0..ny {
            residual = residual.max(opt.get(x, y) - tv * py[y]);
        }
    }
    finish(
        kind,
        eps,
        value,
        opt,
        None,
        distance,
        residual,
        sol.iterations,
    )
}

#[allow(clippy::too_many_arguments)]
fn finish(
    kind: ClassicalKind,
    eps: f64,
    value: f64,
    optimizer: Distribution,
    q: Option<Vec<f64>>,
    distance: f64,
    residual: f64,
    lp_iterations: usize,
) -> Result<SmoothedMeasureResult> {
    if residual > VERIFY_TOL {
        return Err(Error::numerical(format!(
            "{kind:?} optimizer fails re-verification (residual {residual:.3e})"
        )));
    }
    Ok(SmoothedMeasureResult {
        kind,
        eps,
        value,
        optimizer,
        q,
        distance,
        residual,
        lp_iterations,
    })
}

/// `I_max^{eps,T}(X. ; Y)`: smoothing with the X marginal held fixed.
pub fn imax_partial_classical(p: &Distribution, eps: f64) -> Result<SmoothedMeasureResult> {
    imax_lp(p, eps, true, ClassicalKind::ImaxPartial)
}

/// `I_max^{eps,T}(X ; Y)` without the marginal constraint.
pub fn imax_full_classical(p: &Distribution, eps: f64) -> Result<SmoothedMeasureResult> {
    imax_lp(p, eps, false, ClassicalKind::ImaxFull)
}

/// `H_min^{eps,T}(X | Y.)`: smoothing with `P'_Y <= P_Y`.
pub fn hmin_partial_classical(p: &Distribution, eps: f64) -> Result<SmoothedMeasureResult> {
    hmin_lp(p, eps, true, ClassicalKind::HminPartial)
}

/// `H_min^{eps,T}(X | Y)` without the marginal constraint.
pub fn hmin_full_classical(p: &Distribution, eps: f64) -> Result<SmoothedMeasureResult> {
    hmin_lp(p, eps, false, ClassicalKind::HminFull)
}

pub fn classical_measure(
    kind: ClassicalKind,
    p: &Distribution,
    eps: f64,
) -> Result<SmoothedMeasureResult> {
    match kind {
        ClassicalKind::ImaxPartial => imax_partial_classical(p, eps),
        ClassicalKind::HminPartial => hmin_partial_classical(p, eps),
        ClassicalKind::ImaxFull => imax_full_classical(p, eps),
        ClassicalKind::HminFull => hmin_full_classical(p, eps),
    }
}

/// `I_max^{eps,T}(X. ; Y)_{P|Q}`: the max-information program with `Q_Y` fixed.
pub fn imax_partial_given_q(
    p: &Distribution,
    q: &[f64],
    eps: f64,
) -> Result<SmoothedMeasureResult> {
    p.require_normalized()?;
    check_eps(eps)?;
    let (nx, ny) = p.require_bipartite()?;
    check_q(q, ny)?;
    let (px, _) = p.marginals2()?;
    let (mut lp, lay) = ball_lp(p, eps, 1, &[1.0])?;
    let t = lay.extra(0);
    for x in 0..nx {
        for y in 0..ny {
            lp.add_row(
                vec![(lay.pp(x, y), 1.0), (t, -px[x] * q[y])],
                Sense::Le,
                0.0,
            );
        }
    }
    for (x, &pxx) in px.iter().enumerate() {
        lp.add_row(
            (0..ny).map(|y| (lay.pp(x, y), 1.0)).collect(),
            Sense::Eq,
            pxx,
        );
    }
    let sol = match solve_lp(&lp)? {
        s if s.status == LpStatus::Optimal => s,
        s if s.status == LpStatus::Infeasible => {
            // Q misses too much of P's support to fit in the ball: the value is +inf.
            return Ok(SmoothedMeasureResult {
                kind: ClassicalKind::ImaxPartial,
                eps,
                value: f64::INFINITY,
                optimizer: p.clone(),
                q: Some(q.to_vec()),
                distance: 0.0,
                residual: 0.0,
                lp_iterations: s.iterations,
            });
        }
        _ => return Err(Error::numerical("smoothing LP reported unbounded")),
    };
    let opt = extract_optimizer(&lay, &sol.x)?;
    let tv = sol.x[t].max(0.0);
    let distance = generalized_trace_distance(&opt, p)?;
    let (ox, _) = opt.marginals2()?;
    let mut residual = (distance - eps).max(0.0);
    for x in 0..nx {
        residual = residual.max((ox[x] - px[x]).abs());
        for y in 0..ny {
            residual = residual.max(opt.get(x, y) - tv * px[x] * q[y]);
        }
    }
    finish(
        ClassicalKind::ImaxPartial,
        eps,
        log_value(tv),
        opt,
        Some(q.to_vec()),
        distance,
        residual,
        sol.iterations,
    )
}

fn check_q(q: &[f64], ny: usize) -> Result<()> {
    if q.len() != ny {
        return Err(Error::usage(format!(
            "Q has {} entries, expected {ny}",
            q.len()
        )));
    }
    if q.iter().any(|v| !v.is_finite() || *v < 0.0) || (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("Q must be a normalized distribution"));
    }
    Ok(())
}

/// Explicit smoother `P'_{Y|x} = P_{Y|x} 1(Good_x) + eps_x Q_Y`.
///
/// `Good_x` holds the `y` with `P_{Y|x}(y) <= 2^c Q_Y(y)` for
/// `c = I_s^eps(X;Y)_{P|Q}`, and `eps_x` is the conditional mass outside it.
#[derive(Clone, Debug, Serialize)]
pub struct Thm1Smoother {
    #[serde(serialize_with = "ser_dist")]
    pub smoothed: Distribution,
    /// `c = I_s^eps(X;Y)_{P|Q}`.
    pub c: f64,
    /// `sum_x P_X(x) eps_x`, the mass moved.
    pub moved: f64,
    pub distance: f64,
    /// `D_max(P' || P_X x Q)`.
    pub dmax: f64,
}

pub fn thm1_smoother_construction(p: &Distribution, q: &[f64], eps: f64) -> Result<Thm1Smoother> {
    p.require_normalized()?;
    let (nx, ny) = p.require_bipartite()?;
    check_q(q, ny)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let c = i_s_given_q(p, q, eps)?;
    let (px, _) = p.marginals2()?;
    let mut w = vec![0.0; nx * ny];
    let mut moved = 0.0;
    for x in 0..nx {
        if px[x] <= 0.0 {
            continue;
        }
        let mut eps_x = 0.0;
        let mut good = vec![false; ny];
        for y in 0..ny {
            let cond = p.get(x, y) / px[x];
            // the spectrum threshold compares P/(P_X Q) against 2^c in log space
            let ratio_log = if q[y] > 0.0 {
                (cond / q[y]).log2()
            } else {
                f64::INFINITY
            };
            good[y] = cond == 0.0 || ratio_log <= c + 1e-12 * c.abs().max(1.0);
            if !good[y] {
                eps_x += cond;
            }
        }
        for y in 0..ny {
            let cond = p.get(x, y) / px[x];
            let v = if good[y] { cond } else { 0.0 } + eps_x * q[y];
            w[x * ny + y] = px[x] * v;
        }
        moved += px[x] * eps_x;
    }
    let smoothed = Distribution::new(vec![nx, ny], w)?;
    let base = Distribution::new(
        vec![nx, ny],
        (0..nx * ny).map(|i| px[i / ny] * q[i % ny]).collect(),
    )?;
    Ok(Thm1Smoother {
        distance: generalized_trace_distance(&smoothed, p)?,
        dmax: d_max_classical(&smoothed, &base)?,
        smoothed,
        c,
        moved,
    })
}

/// Slacks of the four spectrum sandwich inequalities; all should be `>= 0`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub eps: f64,
    pub delta: f64,
    pub imax: f64,
    pub hmin: f64,
    /// `I_s^{eps/(1-delta)+delta}`.
    pub is_lower_arg: f64,
    pub is_eps: f64,
    /// `H_s^{eps/(1-delta)}`.
    pub hs_upper_arg: f64,
    pub hs_eps: f64,
    /// `imax - (I_s^{eps/(1-delta)+delta} - 2 log 1/delta)`
    pub slack_imax_lower: f64,
    /// `I_s^eps + 1 - imax`
    pub slack_imax_upper: f64,
    /// `H_s^{eps/(1-delta)} + log 1/delta - hmin`
    pub slack_hmin_upper: f64,
    /// `hmin - (H_s^eps - 1)`
    pub slack_hmin_lower: f64,
}

impl SandwichReport {
    pub fn min_slack(&self) -> f64 {
        [
            self.slack_imax_lower,
            self.slack_imax_upper,
            self.slack_hmin_upper,
            self.slack_hmin_lower,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }
}

/// Evaluates the four inequalities relating the marginal-pinned measures
/// to the information-spectrum quantities.
pub fn check_thm1_sandwich(p: &Distribution, eps: f64, delta: f64) -> Result<SandwichReport> {
    if !(eps > 0.0 && delta > 0.0 && delta < 1.0 && eps + delta <= 1.0) {
        return Err(Error::domain(format!(
            "need eps, delta > 0 and eps + delta <= 1 (got {eps}, {delta})"
        )));
    }
    let imax = imax_partial_classical(p, eps)?.value;
    let hmin = hmin_partial_classical(p, eps)?.value;
    let log_inv_delta = (1.0 / delta).log2();
    let is_lower_arg = i_s(p, eps / (1.0 - delta) + delta)?;
    let is_eps = i_s(p, eps)?;
    let hs_upper_arg = h_s(p, eps / (1.0 - delta))?;
    let hs_eps = h_s(p, eps)?;
    Ok(SandwichReport {
        eps,
        delta,
        imax,
        hmin,
        is_lower_arg,
        is_eps,
        hs_upper_arg,
        hs_eps,
        slack_imax_lower: imax - (is_lower_arg - 2.0 * log_inv_delta),
        slack_imax_upper: is_eps + 1.0 - imax,
        slack_hmin_upper: hs_upper_arg + log_inv_delta - hmin,
        slack_hmin_lower: hmin - (hs_eps - 1.0),
    })
}

/// `I_s^eps(X;Y)_{P|Q} - (I_s^{eps+delta}(X;Y)_P - log 1/delta)`; nonnegative when `eps + delta < 1`.
pub fn reference_change_slack(p: &Distribution, q: &[f64], eps: f64, delta: f64) -> Result<f64> {
    let lhs = i_s_given_q(p, q, eps)?;
    let rhs = i_s(p, eps + delta)? - (1.0 / delta).log2();
    Ok(lhs - rhs)
}
