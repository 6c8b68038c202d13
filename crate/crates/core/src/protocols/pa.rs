use serde::Serialize;

use super::{Check, ProtocolReport, ToeplitzHashFamily};
use crate::classical::{check_eps, hmin_partial_classical};
use crate::error::{Error, Result};
use crate::probability::Distribution;

/// Largest `n` with `|X| = 2^n` for exact seed enumeration.
pub const MAX_PA_INPUT_BITS: u32 = 6;

/// `H_min(X|Y) = -log2 sum_y max_x P(x, y)`.
pub fn guessing_entropy(p: &Distribution) -> Result<f64> {
    let (nx, ny) = p.require_bipartite()?;
    let guess: f64 = (0..ny)
        .map(|y| (0..nx).map(|x| p.get(x, y)).fold(0.0, f64::max))
        .sum();
    Ok(-guess.log2())
}

fn input_bits(p: &Distribution) -> Result<u32> {
    p.require_normalized()?;
    let (nx, _) = p.require_bipartite()?;
    if !nx.is_power_of_two() || nx < 2 {
        return Err(Error::usage(format!("|X| = {nx} is not 2^n with n >= 1")));
    }
    let n = nx.trailing_zeros();
    if n > MAX_PA_INPUT_BITS {
        return Err(Error::resource(format!(
            "{n} input bits exceed {MAX_PA_INPUT_BITS}"
        )));
    }
    Ok(n)
}

/// Toeplitz hashing of `X` into `l` bits, averaged exactly over all seeds.
#[derive(Clone, Debug, Serialize)]
pub struct PaRun {
    pub report: ProtocolReport,
    pub input_bits: u32,
    pub key_bits: u32,
    pub seeds: usize,
    /// `T(omega_SZY, U_S x U_Z x P_Y)`.
    pub error: f64,
    pub hmin: f64,
    /// `1/2 sqrt(2^l 2^-H_min(X|Y))`.
    pub leftover_bound: f64,
}

pub fn privacy_amplify_exact(p: &Distribution, l: u32) -> Result<PaRun> {
    let n = input_bits(p)?;
    let family = ToeplitzHashFamily::new(n, l)?;
    let (nx, ny) = p.require_bipartite()?;
    let (_, py) = p.marginals2()?;
    let keys = 1usize << l;
    let uniform = 1.0 / keys as f64;
    let mut total = 0.0;
    let mut acc = vec![0.0; keys * ny];
    for seed in 0..family.seed_count() as u32 {
        let rows = family.rows(seed);
        acc.iter_mut().for_each(|v| *v = 0.0);
        for x in 0..nx {
            let z = ToeplitzHashFamily::hash_with_rows(&rows, x as u32) as usize;
            for y in 0..ny {
                acc[z * ny + y] += p.get(x, y);
            }
        }
        total += acc
            .iter()
            .enumerate()
            .map(|(c, v)| (v - py[c % ny] * uniform).abs())
            .sum::<f64>();
    }
    let error = 0.5 * total / family.seed_count() as f64;
    let hmin = guessing_entropy(p)?;
    let leftover_bound = 0.5 * (l as f64 - hmin).exp2().sqrt();
    Ok(PaRun {
        report: ProtocolReport {
            protocol: "privacy-amplification",
            error,
            resource: l as f64,
            bound: hmin,
            checks: vec![Check::le(
                "error <= leftover hash bound",
                error,
                leftover_bound,
            )],
        },
        input_bits: n,
        key_bits: l,
        seeds: family.seed_count(),
        error,
        hmin,
        leftover_bound,
    })
}

/// Key length `ceil(H_min^{eps-delta,T}(X|Y.) - log2(1/(4 delta^2)))` and its
/// exact security.
#[derive(Clone, Debug, Serialize)]
pub struct PaSmoothedRun {
    pub report: ProtocolReport,
    pub eps: f64,
    pub delta: f64,
    pub hmin_smooth: f64,
    /// Unclamped key length from the formula.
    pub formula_bits: f64,
    /// Key length actually run, clamped to `[0, n]`.
    pub key_bits: u32,
    pub run: PaRun,
}

pub fn pa_smoothed_run(p: &Distribution, eps: f64, delta: f64) -> Result<PaSmoothedRun> {
    let n = input_bits(p)?;
    check_eps(eps)?;
    if !(delta > 0.0 && delta <= eps) {
        return Err(Error::domain(format!(
            "delta {delta} must lie in (0, eps = {eps}]"
        )));
    }
    let hmin_smooth = hmin_partial_classical(p, eps - delta)?.value;
    let formula_bits = (hmin_smooth - (1.0 / (4.0 * delta * delta)).log2()).ceil();
    let key_bits = formula_bits.clamp(0.0, n as f64) as u32;
    let run = privacy_amplify_exact(p, key_bits)?;
    let report = ProtocolReport {
        protocol: "privacy-amplification-smoothed",
        error: run.error,
        resource: key_bits as f64,
        bound: hmin_smooth,
        checks: vec![Check::le("error <= eps", run.error, eps)],
    };
    Ok(PaSmoothedRun {
        report,
        eps,
        delta,
        hmin_smooth,
        formula_bits,
        key_bits,
        run,
    })
}

/// Every key length from 0 to `n`, with the converse check on the secure ones.
#[derive(Clone, Debug, Serialize)]
pub struct PaConverse {
    pub report: ProtocolReport,
    pub eps: f64,
    pub hmin_smooth: f64,
    /// `(l, exact error)`.
    pub sweep: Vec<(u32, f64)>,
    /// Longest key with error at most `eps`.
    pub best_secure: Option<u32>,
}

/// Converse tolerance on the key length.
const CONVERSE_TOL: f64 = 1e-6;

pub fn pa_converse_check(p: &Distribution, eps: f64) -> Result<PaConverse> {
    let n = input_bits(p)?;
    check_eps(eps)?;
    let hmin_smooth = hmin_partial_classical(p, eps)?.value;
    let mut sweep = Vec::with_capacity(n as usize + 1);
    for l in 0..=n {
        sweep.push((l, privacy_amplify_exact(p, l)?.error));
    }
    let mut checks = Vec::new();
    for w in sweep.windows(2) {
        checks.push(Check::le(
            format!("error monotone at l={}", w[1].0),
            w[0].1,
            w[1].1 + 1e-12,
        ));
    }
    let best_secure = sweep
        .iter()
        .filter(|(_, e)| *e <= eps)
        .map(|(l, _)| *l)
        .max();
    if let Some(l) = best_secure {
        checks.push(Check::le(
            "secure l <= H_min^eps",
            l as f64,
            hmin_smooth + CONVERSE_TOL,
        ));
    }
    Ok(PaConverse {
        report: ProtocolReport {
            protocol: "privacy-amplification-converse",
            error: sweep
                .iter()
                .find(|(l, _)| Some(*l) == best_secure)
                .map_or(0.0, |s| s.1),
            resource: best_secure.unwrap_or(0) as f64,
            bound: hmin_smooth,
            checks,
        },
        eps,
        hmin_smooth,
        sweep,
        best_secure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_independent(n: u32, ny: usize) -> Distribution {
        let nx = 1usize << n;
        Distribution::new(vec![nx, ny], vec![1.0 / (nx * ny) as f64; nx * ny]).unwrap()
    }

    fn hmin_three() -> Distribution {
        // 4-bit X, Y is the low bit of X: H_min(X|Y) = 3.
        let mut w = vec![0.0; 16 * 2];
        for x in 0..16 {
            w[x * 2 + (x & 1)] = 1.0 / 16.0;
        }
        Distribution::new(vec![16, 2], w).unwrap()
    }

    #[test]
    fn uniform_full_length_pays_for_singular_seeds() {
        // Singular Toeplitz matrices leave the key non-uniform, so the error is
        // positive but stays under the leftover hash bound of 1/2.
        let run = privacy_amplify_exact(&uniform_independent(1, 2), 1).unwrap();
        assert!((run.error - 0.25).abs() < 1e-12);
        for n in 1..=5 {
            let run = privacy_amplify_exact(&uniform_independent(n, 2), n).unwrap();
            assert!(run.error <= 0.5 + 1e-12, "n={n} error={}", run.error);
            assert!(run.report.passed());
        }
    }

    #[test]
    fn uniform_short_key_meets_bound() {
        let run = privacy_amplify_exact(&uniform_independent(6, 1), 2).unwrap();
        assert!(run.error <= 0.125 + 1e-12);
    }

    #[test]
    fn correlated_fixture_quarter() {
        let p = hmin_three();
        assert!((guessing_entropy(&p).unwrap() - 3.0).abs() < 1e-12);
        let run = privacy_amplify_exact(&p, 1).unwrap();
        assert!(run.error <= 0.25 + 1e-12 && run.report.passed());
    }

    #[test]
    fn guessing_entropy_matches_lp() {
        let p = hmin_three();
        let lp = hmin_partial_classical(&p, 0.0).unwrap().value;
        assert!((lp - guessing_entropy(&p).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn converse_sweep() {
        let c = pa_converse_check(&hmin_three(), 0.0).unwrap();
        assert!(c.report.passed(), "{:?}", c.report.checks);
        assert!(c.best_secure.unwrap() <= 3);
        let u = pa_converse_check(&uniform_independent(3, 1), 0.1).unwrap();
        assert!(u.best_secure.unwrap() <= 3);
        assert!(u.report.passed());
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Distribution::from_rows(&[vec![0.3], vec![0.3], vec![0.4]]).unwrap();
        assert!(matches!(privacy_amplify_exact(&p, 1), Err(Error::Usage(_))));
        assert!(matches!(
            privacy_amplify_exact(&uniform_independent(7, 1), 1),
            Err(Error::Resource(_))
        ));
    }
}
