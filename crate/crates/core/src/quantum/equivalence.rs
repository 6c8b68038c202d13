use serde::Serialize;

use super::constructions::{thm2_hat_construction, thm3_hat_construction};
use super::measures::{
    hmin_full_quantum, hmin_partial_quantum, imax_full_quantum, imax_partial_quantum, SmoothingBall,
};
use super::state::{dmax_quantum, purified_distance, DensityOperator};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;

/// Partial versus full smoothing in the purified ball, with the repaired
/// states as explicit certificates. Every `slack_*` field should be `>= 0`.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub eps: f64,
    pub delta: f64,
    /// `log2((8 + delta^2) / delta^2)`.
    pub log_term: f64,
    pub imax_full: f64,
    /// `I_max^{2 eps + delta}(A. ; B)`.
    pub imax_partial: f64,
    /// `D_max(rho_hat || rho_A x sigma_B)` of the repaired state.
    pub imax_certificate: f64,
    pub hmin_full: f64,
    /// `H_min^{2 eps + delta}(A | B.)`.
    pub hmin_partial: f64,
    /// `-D_max(rho_hat || 1_A x rho_B)` of the repaired state.
    pub hmin_certificate: f64,
    pub slack_imax: f64,
    pub slack_hmin: f64,
    pub slack_imax_certificate: f64,
    pub slack_hmin_certificate: f64,
    /// Largest of the two repaired-marginal residuals.
    pub marginal_residual: f64,
    /// Largest purified distance of a repaired state from the input.
    pub max_distance: f64,
}

impl EquivalenceReport {
    pub fn min_slack(&self) -> f64 {
        [
            self.slack_imax,
            self.slack_hmin,
            self.slack_imax_certificate,
            self.slack_hmin_certificate,
            2.0 * self.eps + self.delta - self.max_distance,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }
}

/// Runs both full-smoothing SDPs at `eps`, both partial ones at `2 eps + delta`,
/// and repairs the full optimizers' marginals.
pub fn check_partial_full_equivalence(
    rho: &DensityOperator,
    eps: f64,
    delta: f64,
) -> Result<EquivalenceReport> {
    let (da, db) = rho.require_bipartite()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} must lie in (0, 1)")));
    }
    let wide = 2.0 * eps + delta;
    let log_term = ((8.0 + delta * delta) / (delta * delta)).log2();
    let rho_a = rho.matrix().partial_trace(&[da, db], &[0])?;
    let rho_b = rho.matrix().partial_trace(&[da, db], &[1])?;

    let full = imax_full_quantum(rho, SmoothingBall::purified(eps))?;
    let partial = imax_partial_quantum(rho, SmoothingBall::purified(wide))?;
    let hat2 = thm2_hat_construction(rho, &full.optimizer, &full.side, delta)?;
    let imax_certificate = dmax_quantum(&hat2.rho_hat, &rho_a.kron(&full.side))?;

    let hfull = hmin_full_quantum(rho, SmoothingBall::purified(eps))?;
    let hpartial = hmin_partial_quantum(rho, SmoothingBall::purified(wide))?;
    let hat3 = thm3_hat_construction(rho, &hfull.optimizer, delta)?;
    let hmin_certificate =
        -dmax_quantum(&hat3.rho_hat, &HermitianMatrix::identity(da).kron(&rho_b))?;

    let max_distance = purified_distance(&hat2.rho_hat, rho.matrix())?
        .max(purified_distance(&hat3.rho_hat, rho.matrix())?);
    Ok(EquivalenceReport {
        eps,
        delta,
        log_term,
        imax_full: full.value,
        imax_partial: partial.value,
        imax_certificate,
        hmin_full: hfull.value,
        hmin_partial: hpartial.value,
        hmin_certificate,
        slack_imax: full.value + log_term - partial.value,
        slack_hmin: hpartial.value - (hfull.value - log_term),
        slack_imax_certificate: full.value + log_term - imax_certificate,
        slack_hmin_certificate: hmin_certificate - (hfull.value - log_term),
        marginal_residual: hat2.marginal_residual.max(hat3.marginal_residual),
        max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random;

    #[test]
    fn random_two_qubit_state_satisfies_both_bounds() {
        let mut rng = random::seeded(3);
        let rho = random::density(&mut rng, &[2, 2], 3);
        let r = check_partial_full_equivalence(&rho, 0.1, 0.05).unwrap();
        assert!(r.holds(1e-5), "{r:?}");
        assert!(r.marginal_residual < 1e-8);
    }

    #[test]
    fn rejects_bad_delta() {
        let rho = DensityOperator::diagonal(&[0.25; 4], vec![2, 2]).unwrap();
        assert!(matches!(
            check_partial_full_equivalence(&rho, 0.1, 0.0),
            Err(Error::Domain(_))
        ));
    }
}
