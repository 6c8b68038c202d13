use num_complex::Complex64;
use serde::Serialize;

use super::state::{dmax_quantum, gen_trace_distance, purified_distance, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::json::MatrixJson;
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::sdp::{HermExpr, HermVar, LinExpr, Model};

/// Largest joint dimension accepted by the SDP formulations.
pub const MAX_SDP_DIM: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Metric {
    #[serde(rename = "P")]
    Purified,
    #[serde(rename = "T")]
    GeneralizedTrace,
}

impl Metric {
    pub fn distance(self, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
        match self {
            Metric::Purified => purified_distance(a, b),
            Metric::GeneralizedTrace => gen_trace_distance(a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothingBall {
    pub metric: Metric,
    pub eps: f64,
}

impl SmoothingBall {
    pub fn purified(eps: f64) -> Self {
        SmoothingBall {
            metric: Metric::Purified,
            eps,
        }
    }

    pub fn trace(eps: f64) -> Self {
        SmoothingBall {
            metric: Metric::GeneralizedTrace,
            eps,
        }
    }

    /// Both metrics put a normalized state at distance 1 from zero, so the
    /// ball is valid iff `eps < 1`.
    pub fn validate(&self, rho: &DensityOperator) -> Result<()> {
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return Err(Error::domain(format!(
                "smoothing radius {} must be >= 0",
                self.eps
            )));
        }
        if self.eps > 0.0 {
            rho.require_normalized()?;
        }
        if self.eps >= 1.0 {
            return Err(Error::domain(format!(
                "smoothing radius {} invalid: the distance from the state to zero is 1",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumKind {
    Imax,
    Hmin,
    ImaxPartial,
    HminPartial,
    ImaxFull,
    HminFull,
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpDiagnostics {
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuantumMeasureResult {
    pub kind: QuantumKind,
    pub ball: Option<SmoothingBall>,
    /// Measure value in bits.
    pub value: f64,
    /// Smoothed state.
    #[serde(serialize_with = "ser_matrix")]
    pub optimizer: HermitianMatrix,
    /// Normalized `sigma_B` for max-information, `rho_B` for min-entropy.
    #[serde(serialize_with = "ser_matrix")]
    pub side: HermitianMatrix,
    /// `2^value` for max-information, `2^-value` for min-entropy.
    pub scale: f64,
    /// Distance of the optimizer from the input, recomputed directly.
    pub distance: f64,
    /// Minimum eigenvalue of the defining operator inequality's slack.
    pub operator_residual: f64,
    /// Largest entry of the pinned-marginal violation (zero for full measures).
    pub marginal_residual: f64,
    pub sdp: Option<SdpDiagnostics>,
}

fn ser_matrix<S: serde::Serializer>(
    m: &HermitianMatrix,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from_hermitian(m, None).serialize(s)
}

fn check_dims(rho: &DensityOperator) -> Result<(usize, usize)> {
    let (da, db) = rho.require_bipartite()?;
    if da * db > MAX_SDP_DIM {
        return Err(Error::resource(format!(
            "joint dimension {} exceeds the SDP limit {MAX_SDP_DIM}",
            da * db
        )));
    }
    Ok((da, db))
}

/// Orthonormal basis of the support of a PSD operator, or `None` at full rank.
fn support_basis(m: &HermitianMatrix) -> Result<Option<ComplexMatrix>> {
    let e = m.eig()?;
    let tau = e.rank_threshold();
    let cols: Vec<usize> = (0..e.values.len()).filter(|&k| e.values[k] > tau).collect();
    if cols.len() == e.values.len() {
        return Ok(None);
    }
    Ok(Some(ComplexMatrix::from_fn(
        e.values.len(),
        cols.len(),
        |i, k| e.vectors[(i, cols[k])],
    )))
}

fn compress(m: &HermitianMatrix, w: &Option<ComplexMatrix>) -> HermitianMatrix {
    match w {
        Some(w) => m.conjugate_by(&w.adjoint()),
        None => m.clone(),
    }
}

fn expand(m: &HermitianMatrix, w: &Option<ComplexMatrix>) -> HermitianMatrix {
    match w {
        Some(w) => m.conjugate_by(w),
        None => m.clone(),
    }
}

/// Smoothed-state variable for the ball around `rho`.
enum Smoothed {
    Fixed,
    Var(HermVar),
    Block(HermVar),
}

impl Smoothed {
    fn expr(&self, rho: &HermitianMatrix) -> HermExpr {
        match self {
            Smoothed::Fixed => HermExpr::constant(rho),
            Smoothed::Var(x) => HermExpr::var(x),
            Smoothed::Block(y) => HermExpr::block(y, 0, rho.dim()),
        }
    }

    fn value(&self, sol: &crate::sdp::ModelSolution, rho: &HermitianMatrix) -> HermitianMatrix {
        let n = rho.dim();
        match self {
            Smoothed::Fixed => rho.clone(),
            Smoothed::Var(x) => sol.herm(x).clone(),
            Smoothed::Block(y) => {
                let yv = sol.herm(y);
                HermitianMatrix::hermitize(ComplexMatrix::from_fn(n, n, |i, j| yv.get(i, j)))
            }
        }
    }
}

/// Adds the smoothed state and its ball constraint to the model.
///
/// The purified ball uses `[[R, X], [X^dagger, rho]] ⪰ 0` with
/// `Re tr X >= sqrt(1 - eps^2)`; `rho` is replaced by its eigenvalues on its
/// support so that the block has an interior. The trace ball writes
/// `R - rho = P - N` with `tr N <= eps`, which is the exact generalized trace
/// distance whenever `tr R <= 1`.
fn add_ball(m: &mut Model, rho: &HermitianMatrix, ball: Option<SmoothingBall>) -> Result<Smoothed> {
    let ball = match ball {
        Some(b) if b.eps > 0.0 => b,
        _ => return Ok(Smoothed::Fixed),
    };
    let n = rho.dim();
    match ball.metric {
        Metric::Purified => {
            let e = rho.eig()?;
            let tau = e.rank_threshold();
            let cols: Vec<usize> = (0..n).filter(|&k| e.values[k] > tau).collect();
            let k = cols.len();
            let y = m.herm_var(n + k);
            let diag = HermitianMatrix::from_real_diag(
                &cols.iter().map(|&c| e.values[c]).collect::<Vec<_>>(),
            );
            m.eq(&HermExpr::block(&y, n, k), &diag);
            let mut overlap = LinExpr::constant(-(1.0 - ball.eps * ball.eps).sqrt());
            for i in 0..n {
                for (kk, &c) in cols.iter().enumerate() {
                    let v = e.vectors[(i, c)];
                    if v != Complex64::new(0.0, 0.0) {
                        overlap = overlap.re_entry(&y, i, n + kk, v.conj());
                    }
                }
            }
            m.lin_ge(overlap);
            Ok(Smoothed::Block(y))
        }
        Metric::GeneralizedTrace => {
            let r = m.herm_var(n);
            let neg = m.herm_var(n);
            let p = HermExpr::var(&r)
                .minus(&HermExpr::constant(rho))
                .plus(&HermExpr::var(&neg));
            m.psd(&p);
            m.lin_le(
                HermExpr::var(&neg)
                    .trace()
                    .plus(&LinExpr::constant(-ball.eps)),
            );
            Ok(Smoothed::Var(r))
        }
    }
}

fn diagnostics(sol: &crate::sdp::ModelSolution) -> SdpDiagnostics {
    SdpDiagnostics {
        relative_gap: sol.raw.relative_gap,
        primal_infeasibility: sol.raw.primal_infeasibility,
        dual_infeasibility: sol.raw.dual_infeasibility,
        iterations: sol.raw.iterations,
    }
}

fn imax_impl(
    rho: &DensityOperator,
    ball: Option<SmoothingBall>,
    partial: bool,
) -> Result<QuantumMeasureResult> {
    let (da, db) = check_dims(rho)?;
    if let Some(b) = ball {
        b.validate(rho)?;
    }
    rho.require_normalized()?;
    let kind = match (ball.is_some(), partial) {
        (false, _) => QuantumKind::Imax,
        (true, true) => QuantumKind::ImaxPartial,
        (true, false) => QuantumKind::ImaxFull,
    };
    let full = rho.matrix();
    let rho_a = full.partial_trace(&[da, db], &[0])?;
    // Every feasible smoothed state lives on supp(rho_A) ⊗ B.
    let va = support_basis(&rho_a)?;
    let ra = compress(&rho_a, &va);
    let w = va.map(|v| v.kron(&ComplexMatrix::identity(db)));
    let rc = compress(full, &w);
    let r = ra.dim();

    let mut m = Model::new();
    let s = m.herm_var(db);
    let smoothed = add_ball(&mut m, &rc, ball)?;
    let rt = smoothed.expr(&rc);
    m.psd(&HermExpr::var(&s).kron_left(&ra).minus(&rt));
    if !matches!(smoothed, Smoothed::Fixed) {
        if partial {
            m.eq(&rt.trace_second(r, db), &ra);
        } else {
            m.lin_eq(rt.trace().plus(&LinExpr::constant(-1.0)));
        }
    }
    m.minimize(HermExpr::var(&s).trace());
    let sol = m.solve()?;
    sol.ensure_optimal("max-information SDP")?;

    let optimizer = expand(&smoothed.value(&sol, &rc), &w);
    let s_val = sol.herm(&s).clone();
    let trace_s = sol.value;
    if !(trace_s > 0.0) {
        return Err(Error::numerical(
            "max-information SDP returned a nonpositive trace",
        ));
    }
    let sigma = s_val.scale(1.0 / s_val.trace());
    let slack = &rho_a.kron(&s_val) - &optimizer;
    let marginal_residual = if partial && ball.is_some() {
        optimizer
            .partial_trace(&[da, db], &[0])?
            .max_abs_diff(&rho_a)
    } else {
        0.0
    };
    let distance = ball.map_or(Ok(0.0), |b| b.metric.distance(&optimizer, full))?;
    Ok(QuantumMeasureResult {
        kind,
        ball,
        value: trace_s.log2(),
        optimizer,
        side: sigma,
        scale: trace_s,
        distance,
        operator_residual: slack.min_eigenvalue()?,
        marginal_residual,
        sdp: Some(diagnostics(&sol)),
    })
}

fn hmin_impl(
    rho: &DensityOperator,
    ball: Option<SmoothingBall>,
    partial: bool,
) -> Result<QuantumMeasureResult> {
    let (da, db) = check_dims(rho)?;
    if let Some(b) = ball {
        b.validate(rho)?;
    }
    let kind = match (ball.is_some(), partial) {
        (false, _) => QuantumKind::Hmin,
        (true, true) => QuantumKind::HminPartial,
        (true, false) => QuantumKind::HminFull,
    };
    let full = rho.matrix();
    let rho_b = full.partial_trace(&[da, db], &[1])?;
    let id_rho_b = HermitianMatrix::identity(da).kron(&rho_b);
    if ball.map_or(true, |b| b.eps == 0.0) {
        let d = dmax_quantum(full, &id_rho_b)?;
        return Ok(QuantumMeasureResult {
            kind,
            ball,
            value: -d,
            optimizer: full.clone(),
            side: rho_b,
            scale: d.exp2(),
            distance: 0.0,
            operator_residual: (&id_rho_b.scale(d.exp2()) - full).min_eigenvalue()?,
            marginal_residual: 0.0,
            sdp: None,
        });
    }
    // Every feasible smoothed state lives on A ⊗ supp(rho_B).
    let vb = support_basis(&rho_b)?;
    let rbc = compress(&rho_b, &vb);
    let w = vb.map(|v| ComplexMatrix::identity(da).kron(&v));
    let rc = compress(full, &w);
    let rb = rbc.dim();

    let mut m = Model::new();
    let t = m.nonneg();
    let smoothed = add_ball(&mut m, &rc, ball)?;
    let rt = smoothed.expr(&rc);
    let bound = HermitianMatrix::identity(da).kron(&rbc);
    m.psd(&HermExpr::scalar_times(&t, &bound).minus(&rt));
    if partial {
        m.psd(&HermExpr::constant(&rbc).minus(&rt.trace_first(da, rb)));
    }
    m.lin_le(rt.trace().plus(&LinExpr::constant(-1.0)));
    m.minimize(LinExpr::new().scalar(&t, 1.0));
    let sol = m.solve()?;
    sol.ensure_optimal("min-entropy SDP")?;

    let optimizer = expand(&smoothed.value(&sol, &rc), &w);
    let tv = sol.value;
    if !(tv > 0.0) {
        return Err(Error::numerical(
            "min-entropy SDP returned a nonpositive scale",
        ));
    }
    let slack = &id_rho_b.scale(tv) - &optimizer;
    let marginal_residual = if partial {
        let excess = &optimizer.partial_trace(&[da, db], &[1])? - &rho_b;
        excess.max_eigenvalue()?.max(0.0)
    } else {
        0.0
    };
    let distance = ball.map_or(Ok(0.0), |b| b.metric.distance(&optimizer, full))?;
    Ok(QuantumMeasureResult {
        kind,
        ball,
        value: -tv.log2(),
        optimizer,
        side: rho_b,
        scale: tv,
        distance,
        operator_residual: slack.min_eigenvalue()?,
        marginal_residual,
        sdp: Some(diagnostics(&sol)),
    })
}

/// `I_max(A;B) = log min tr S` over `S ⪰ 0` with `rho_AB ⪯ rho_A ⊗ S`.
pub fn imax_unsmoothed(rho: &DensityOperator) -> Result<QuantumMeasureResult> {
    imax_impl(rho, None, true)
}

/// `H_min(A|B) = -D_max(rho_AB || 1_A ⊗ rho_B)`.
pub fn hmin_unsmoothed(rho: &DensityOperator) -> Result<QuantumMeasureResult> {
    hmin_impl(rho, None, true)
}

/// Smooth max-information with the `A` marginal pinned to `rho_A`.
pub fn imax_partial_quantum(
    rho: &DensityOperator,
    ball: SmoothingBall,
) -> Result<QuantumMeasureResult> {
    imax_impl(rho, Some(ball), true)
}

/// Smooth min-entropy over states whose `B` marginal is dominated by `rho_B`.
pub fn hmin_partial_quantum(
    rho: &DensityOperator,
    ball: SmoothingBall,
) -> Result<QuantumMeasureResult> {
    hmin_impl(rho, Some(ball), true)
}

/// Smooth max-information over normalized states with `rho_A` fixed in the bound only.
pub fn imax_full_quantum(
    rho: &DensityOperator,
    ball: SmoothingBall,
) -> Result<QuantumMeasureResult> {
    imax_impl(rho, Some(ball), false)
}

/// Smooth conditional min-entropy over sub-normalized states.
pub fn hmin_full_quantum(
    rho: &DensityOperator,
    ball: SmoothingBall,
) -> Result<QuantumMeasureResult> {
    hmin_impl(rho, Some(ball), false)
}

pub fn quantum_measure(
    kind: QuantumKind,
    rho: &DensityOperator,
    ball: SmoothingBall,
) -> Result<QuantumMeasureResult> {
    match kind {
        QuantumKind::Imax => imax_unsmoothed(rho),
        QuantumKind::Hmin => hmin_unsmoothed(rho),
        QuantumKind::ImaxPartial => imax_partial_quantum(rho, ball),
        QuantumKind::HminPartial => hmin_partial_quantum(rho, ball),
        QuantumKind::ImaxFull => imax_full_quantum(rho, ball),
        QuantumKind::HminFull => hmin_full_quantum(rho, ball),
    }
}
